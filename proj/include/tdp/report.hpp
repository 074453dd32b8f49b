#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "tdp/placer.hpp"

namespace tdp {

// Trace CSV: one row per placement iteration. Timing columns stay empty on
// iterations that did not run analysis (lambda still at zero).
inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
    out << "iter,lambda,hpwl,wns,tns,cpd,max_util,moved\n";
    out << std::setprecision(17);
    for (const TraceRow& r : rows) {
        out << r.iter << ',' << r.lambda_eff << ',' << r.hpwl << ',';
        if (r.timed)
            out << r.wns << ',' << r.tns << ',' << r.cpd;
        else
            out << ",,";
        out << ',' << r.max_util << ',' << r.moved << '\n';
    }
}

inline void write_trace_csv_file(const std::string& path, const std::vector<TraceRow>& rows) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write trace file: " + path);
    write_trace_csv(f, rows);
}

inline std::vector<TraceRow> read_trace_csv(std::istream& in) {
    std::vector<TraceRow> rows;
    std::string line;
    if (!std::getline(in, line) || line.rfind("iter,", 0) != 0)
        throw ValidationError("trace: missing header row");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        cells.resize(8);
        TraceRow r;
        try {
            r.iter = std::stoi(cells[0]);
            r.lambda_eff = std::stod(cells[1]);
            r.hpwl = std::stod(cells[2]);
            r.timed = !cells[3].empty();
            if (r.timed) {
                r.wns = std::stod(cells[3]);
                r.tns = std::stod(cells[4]);
                r.cpd = std::stod(cells[5]);
            }
            if (!cells[6].empty()) r.max_util = std::stod(cells[6]);
            if (!cells[7].empty()) r.moved = std::stoi(cells[7]);
        } catch (const std::exception&) {
            throw ValidationError("trace: malformed row: " + line);
        }
        rows.push_back(r);
    }
    if (rows.empty()) throw ValidationError("trace: no data rows");
    return rows;
}

inline std::vector<TraceRow> read_trace_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open trace file: " + path);
    return read_trace_csv(f);
}

namespace detail {

struct PlotSeries {
    std::string label;
    std::vector<double> xs, ys;
};

// One panel: framed polyline with min/max tick labels. Single points render
// as a marker so 1-iteration traces still show something.
inline void svg_panel(std::ostream& out, const PlotSeries& s, int ox, int oy, int w, int h) {
    out << "<g transform=\"translate(" << ox << "," << oy << ")\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    out << "<text x=\"8\" y=\"16\" font-size=\"13\" font-family=\"sans-serif\">" << s.label
        << "</text>\n";
    if (s.xs.empty()) {
        out << "<text x=\"" << w / 2 - 40 << "\" y=\"" << h / 2
            << "\" font-size=\"12\" fill=\"#888\" font-family=\"sans-serif\">no data</text>\n</g>\n";
        return;
    }
    double x0 = s.xs.front(), x1 = s.xs.back();
    double y0 = s.ys[0], y1 = s.ys[0];
    for (double y : s.ys) {
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    int pad = 24;
    auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (w - 2 * pad); };
    auto py = [&](double y) { return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad); };
    if (s.xs.size() == 1) {
        out << "<circle cx=\"" << px(s.xs[0]) << "\" cy=\"" << py(s.ys[0])
            << "\" r=\"3\" fill=\"#06c\"/>\n";
    } else {
        out << "<polyline fill=\"none\" stroke=\"#06c\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.xs.size(); i++)
            out << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
        out << "\"/>\n";
    }
    out << "<text x=\"" << w - pad << "\" y=\"" << h - 8
        << "\" font-size=\"10\" text-anchor=\"end\" font-family=\"sans-serif\">iter " << x1
        << "</text>\n";
    out << "<text x=\"8\" y=\"" << h - 8 << "\" font-size=\"10\" font-family=\"sans-serif\">"
        << std::setprecision(6) << y0 << " .. " << y1 << "</text>\n";
    out << "</g>\n";
}

} // namespace detail

// Four stacked convergence panels (HPWL, WNS, TNS, CPD) in one SVG document.
inline std::string render_trace_svg(const std::vector<TraceRow>& rows) {
    const int w = 640, h = 170, gap = 10;
    detail::PlotSeries hpwl{"HPWL", {}, {}}, wns{"WNS (ns)", {}, {}}, tns{"TNS (ns)", {}, {}},
        cpd{"CPD (ns)", {}, {}};
    for (const TraceRow& r : rows) {
        hpwl.xs.push_back(r.iter);
        hpwl.ys.push_back(r.hpwl);
        if (r.timed) {
            wns.xs.push_back(r.iter);
            wns.ys.push_back(r.wns);
            tns.xs.push_back(r.iter);
            tns.ys.push_back(r.tns);
            cpd.xs.push_back(r.iter);
            cpd.ys.push_back(r.cpd);
        }
    }
    std::ostringstream out;
    int total_h = 4 * h + 5 * gap;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w + 2 * gap << "\" height=\""
        << total_h << "\">\n";
    detail::svg_panel(out, hpwl, gap, gap, w, h);
    detail::svg_panel(out, wns, gap, gap * 2 + h, w, h);
    detail::svg_panel(out, tns, gap, gap * 3 + 2 * h, w, h);
    detail::svg_panel(out, cpd, gap, gap * 4 + 3 * h, w, h);
    out << "</svg>\n";
    return out.str();
}

// Plain-text summary of a run; the final CPD line repeats the last timed
// trace row so the two artifacts can be cross-checked.
inline std::string render_summary(const std::vector<TraceRow>& rows, const json* timing) {
    std::ostringstream out;
    out << std::setprecision(6);
    const TraceRow& first = rows.front();
    const TraceRow& last = rows.back();
    out << "iterations: " << rows.size() << "\n";
    out << "hpwl: " << first.hpwl << " -> " << last.hpwl;
    if (first.hpwl > 0)
        out << "  (" << (last.hpwl - first.hpwl) / first.hpwl * 100.0 << "%)";
    out << "\n";
    const TraceRow* timed = nullptr;
    for (const TraceRow& r : rows)
        if (r.timed) timed = &r;
    if (timed)
        out << "final timing: wns " << timed->wns << "  tns " << timed->tns << "  cpd "
            << timed->cpd << "\n";
    else
        out << "final timing: not evaluated (pure wirelength run)\n";
    out << "max bin utilization: " << last.max_util << "\n";
    if (timing) {
        out << "timing report: wns " << timing->at("wns").get<double>() << "  tns "
            << timing->at("tns").get<double>() << "  cpd " << timing->at("cpd").get<double>()
            << "  critical path arcs " << timing->at("critical_path").size() << "\n";
    }
    return out.str();
}

} // namespace tdp
