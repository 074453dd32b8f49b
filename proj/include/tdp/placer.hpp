#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tdp/congestion.hpp"
#include "tdp/delay_model.hpp"
#include "tdp/legalize.hpp"
#include "tdp/qp.hpp"
#include "tdp/sta.hpp"

namespace tdp {

struct PlacerConfig {
    double lambda = 0.5;    // timing share of the objective, after warm-up
    int lambda_warmup = 10; // iterations to ramp lambda from 0 to its target
    double alpha = 1.5;     // exponent offset
    double beta = 0.5;      // exponent slope on slack / T_thr
    double gamma = 0.3;     // critical-path bonus
    double percentile = 5.0;
    double clock_period = 1.0; // ns
    int max_iterations = 40;
    int min_iterations = 5;
    double anchor_base = 0.01; // anchor weight, fraction of the mean B2B weight
    double anchor_growth = 5.0;
    double clock_pseudo_base = 0.05;
    int long_path_arcs = 8; // paths shorter than this skip the region pull
    double region_majority = 0.5;
    double b_min = 1e-3, b_max = 10.0; // base clamp
    double eps = 1e-4;                 // coincident-pin distance clamp
    double cg_tolerance = 1e-6;
    int cg_max_iters = 500;
    int batch_size = 256;
    int cell_size = 4;
    int bin_size = 2;
    double hpwl_stop = 0.005; // relative HPWL change considered a stall
    int hpwl_stop_iters = 3;
    double kappa = 1.5;      // clock-pressure demand inflation
    double clock_util = 0.8; // share of clock capacity that triggers it
    double cap_coef = 0.1;   // congestion-to-capacity coefficient
    int threads = 1;
    uint64_t seed = 1;
};

inline void validate_config(const PlacerConfig& cfg) {
    if (cfg.lambda < 0.0 || cfg.lambda > 1.0)
        throw ValidationError("placer: lambda must lie in [0, 1]");
    if (cfg.alpha < 0 || cfg.beta < 0 || cfg.gamma < 0)
        throw ValidationError("placer: alpha, beta, gamma must be non-negative");
    if (cfg.percentile <= 0.0 || cfg.percentile >= 100.0)
        throw ValidationError("placer: percentile must lie in (0, 100)");
    if (cfg.lambda > 0.0 && cfg.clock_period <= 0.0)
        throw ValidationError("placer: clock period must be positive for timing-driven runs");
    if (cfg.max_iterations < 1) throw ValidationError("placer: max_iterations must be at least 1");
    if (cfg.eps <= 0 || cfg.cg_tolerance <= 0)
        throw ValidationError("placer: eps and cg_tolerance must be positive");
}

// Nearest-rank percentile of the slack distribution, the loop's running
// read of global timing quality.
inline double estimate_timing_threshold(std::vector<double> slacks, double percentile) {
    if (slacks.empty()) throw ValidationError("timing threshold: no slacks");
    std::sort(slacks.begin(), slacks.end());
    size_t n = slacks.size();
    size_t k = static_cast<size_t>(std::ceil(percentile / 100.0 * double(n)));
    k = std::clamp<size_t>(k, 1, n);
    return slacks[k - 1];
}

// Weight of one timing arc. Arcs at or above the threshold stay at the base
// weight of zero; below it, w = b^e with
//   b = clamp(1 - slack/clock_period, b_min, b_max)
//   e = alpha + beta*slack/T_thr (+ gamma*c_forward/c_max on the critical path)
// so that deeper-negative slack raises both the base and the exponent, and
// critical-path arcs far from their endpoint get the biggest push.
inline double timing_arc_weight(double slack, bool on_path, int c_forward, int c_max,
                                double t_thr, double slack_threshold, const PlacerConfig& cfg) {
    if (!(slack < slack_threshold)) return 0.0;
    double b = std::clamp(1.0 - slack / cfg.clock_period, cfg.b_min, cfg.b_max);
    double e = cfg.alpha;
    if (t_thr != 0.0) e += cfg.beta * slack / t_thr;
    if (on_path && c_max >= 1) e += cfg.gamma * double(c_forward) / double(c_max);
    return std::pow(b, e);
}

// Pull every instance of a long critical path toward the horizontal center
// of the clock region holding the majority of the path, if there is one.
// Inter-region crossings are what the pull is meant to avoid, so a path
// without a strict majority region is left alone.
inline std::vector<PseudoNet> clock_region_pseudo_nets(const TimingGraph& g,
                                                       const std::vector<CriticalPath>& paths,
                                                       const Netlist& nl,
                                                       const PlacementState& pl,
                                                       const Device& dev, double weight,
                                                       int min_arcs, double majority) {
    std::vector<PseudoNet> out;
    if (weight <= 0) return out;
    for (const CriticalPath& cp : paths) {
        if (cp.c_max() < min_arcs) continue;
        std::vector<int> insts;
        insts.push_back(g.vertices[g.arcs[cp.arcs.front()].src].inst);
        for (int a : cp.arcs) insts.push_back(g.vertices[g.arcs[a].dst].inst);
        std::sort(insts.begin(), insts.end());
        insts.erase(std::unique(insts.begin(), insts.end()), insts.end());

        std::vector<int> count(dev.clock_region_count(), 0);
        for (int id : insts) count[dev.clock_region_of(pl.x[id], pl.y[id])]++;
        int dominant = 0;
        for (int r = 1; r < dev.clock_region_count(); r++)
            if (count[r] > count[dominant]) dominant = r;
        if (double(count[dominant]) <= majority * double(insts.size())) continue;

        Device::Rect rect = dev.clock_region_bounds(dominant);
        double cx = 0.5 * (rect.x0 + rect.x1);
        for (int id : insts) {
            if (nl.instances[id].fixed) continue;
            PseudoNet pn;
            pn.inst = id;
            pn.kind = PseudoKind::ClockRegion;
            pn.tx = cx;
            pn.weight = weight;
            out.push_back(pn);
        }
    }
    return out;
}

struct TraceRow {
    int iter = 0;
    double lambda_eff = 0;
    double hpwl = 0;
    bool timed = false; // timing columns valid only when the iteration ran STA
    double wns = 0, tns = 0, cpd = 0;
    double max_util = 0;
    int moved = 0;
};

struct GlobalPlaceResult {
    PlacementState placement;
    std::vector<TraceRow> trace;
    bool cg_converged = true;
    BatchStats model_stats;
    // metrics of the placement actually returned; the timing triple is only
    // meaningful when the run measured it (timed = true)
    double hpwl = 0;
    bool timed = false;
    double wns = 0, tns = 0, cpd = 0;
};

// One placement run. Per iteration: timing analysis at the current placement
// (once lambda has warmed past zero), slack-derived arc weights and region
// pulls, quadratic assembly and solve, then rough legalization whose spread
// positions become next iteration's anchors, and resource adjustment whose
// scalings shape next iteration's bins. Stops early once HPWL stalls after
// the warm-up.
inline GlobalPlaceResult global_place(const Netlist& nl, const Device& dev,
                                      const PlacerConfig& cfg,
                                      const DelayPredictor* model = nullptr,
                                      const PlacementState* start = nullptr) {
    validate_config(cfg);
    if (cfg.lambda > 0.0 && !model)
        throw ValidationError("placer: timing-driven run needs a delay model");
    GlobalPlaceResult res;
    PlacementState pl = start ? *start : initial_placement(nl, dev, cfg.seed);

    TimingGraph tg;
    bool tg_built = false;
    LogicDelayTable table = LogicDelayTable::defaults();

    std::vector<PseudoNet> anchors;
    AdjustResult adjust;
    double prev_hpwl = std::numeric_limits<double>::quiet_NaN();
    int stall = 0;

    // Spreading keeps the iterate sequence jittering around its plateau, so
    // the loop returns the best snapshot rather than whatever the last
    // iteration happened to produce: best worst-slack for timing-driven
    // runs, best wirelength for pure runs.
    PlacementState best_pl;
    double best_wns = -std::numeric_limits<double>::infinity();
    double best_tns = 0, best_cpd = 0;
    double best_hpwl = std::numeric_limits<double>::infinity();
    bool have_best = false;

    for (int iter = 0; iter < cfg.max_iterations; iter++) {
        double ramp = cfg.lambda_warmup > 0
                          ? std::min(1.0, double(iter) / double(cfg.lambda_warmup))
                          : 1.0;
        double lambda_eff = cfg.lambda * ramp;

        TraceRow row;
        row.iter = iter;
        row.lambda_eff = lambda_eff;

        double mean_b2b = mean_b2b_weight(nl, pl, cfg.eps);
        std::vector<TimingArcTerm> arc_terms;
        std::vector<PseudoNet> pseudos;
        if (lambda_eff > 0.0) {
            if (!tg_built) {
                tg = build_timing_graph(nl, table, cfg.clock_period);
                levelize(tg);
                tg_built = true;
            }
            GCellGrid grid = compute_routing_density(nl, pl, dev, cfg.cell_size);
            StaResult sta = run_sta(tg, nl, pl, dev, grid, *model, cfg.batch_size,
                                    cfg.cell_size, cfg.threads);
            res.model_stats.nets_encoded += sta.stats.nets_encoded;
            res.model_stats.pairs_predicted += sta.stats.pairs_predicted;
            row.timed = true;
            row.wns = tg.wns;
            row.tns = tg.tns;
            row.cpd = tg.cpd;

            // the slacks describe pl as it stands, before this solve touches it
            if (cfg.lambda > 0.0 && (!have_best || tg.wns > best_wns)) {
                best_wns = tg.wns;
                best_tns = tg.tns;
                best_cpd = tg.cpd;
                best_pl = pl;
                have_best = true;
            }

            std::vector<double> slacks(tg.arcs.size());
            for (size_t a = 0; a < tg.arcs.size(); a++) slacks[a] = tg.arcs[a].slack;
            double t_thr = estimate_timing_threshold(slacks, cfg.percentile);
            double gate = std::min(t_thr, 0.0); // extra weighting only below worst-case zero
            std::vector<int> path_pos(tg.arcs.size(), -1);
            for (int k = 0; k < sta.path.c_max(); k++) path_pos[sta.path.arcs[k]] = k;
            for (size_t a = 0; a < tg.arcs.size(); a++) {
                bool on_path = path_pos[a] >= 0;
                double w = timing_arc_weight(tg.arcs[a].slack, on_path,
                                             on_path ? sta.path.c_forward(path_pos[a]) : 0,
                                             sta.path.c_max(), t_thr, gate, cfg);
                if (w <= 0) continue;
                const TimingArc& arc = tg.arcs[a];
                const Net& net = nl.nets[arc.net];
                TimingArcTerm term;
                term.src_inst = tg.vertices[arc.src].inst;
                term.dst_inst = tg.vertices[arc.dst].inst;
                term.src_dx = net.driver.dx;
                term.src_dy = net.driver.dy;
                term.dst_dx = net.loads[arc.load_index].dx;
                term.dst_dy = net.loads[arc.load_index].dy;
                term.w = w;
                arc_terms.push_back(term);
            }
            std::vector<PseudoNet> crpn = clock_region_pseudo_nets(
                tg, {sta.path}, nl, pl, dev, cfg.clock_pseudo_base * mean_b2b,
                cfg.long_path_arcs, cfg.region_majority);
            pseudos.insert(pseudos.end(), crpn.begin(), crpn.end());
        }

        double anchor_w =
            cfg.anchor_base * mean_b2b * (1.0 + double(iter) / cfg.anchor_growth);
        if (anchor_w > 0)
            for (PseudoNet a : anchors) {
                a.weight = anchor_w;
                pseudos.push_back(a);
            }

        QuadraticSystem sys = assemble_system(nl, pl, arc_terms, pseudos, lambda_eff, cfg.eps);
        SolveStats st;
        PlacementState solved =
            solve_system(sys, pl, dev, cfg.cg_tolerance, cfg.cg_max_iters, &st);
        res.cg_converged = res.cg_converged && st.converged;

        BinGrid bins =
            build_bin_grid(nl, solved, dev, cfg.bin_size, adjust.demand_scale, adjust.cap_scale);
        SpreadResult spread = spread_instances(nl, solved, dev, bins);
        pl = std::move(spread.placement);
        anchors = std::move(spread.anchors);
        row.max_util = spread.max_util;
        row.moved = spread.moved;

        GCellGrid post_grid = compute_routing_density(nl, pl, dev, cfg.cell_size);
        adjust = adjust_resources(nl, pl, dev, post_grid, cfg.bin_size, cfg.kappa,
                                  cfg.clock_util, cfg.cap_coef);

        row.hpwl = total_hpwl(nl, pl);
        res.trace.push_back(row);

        if (cfg.lambda == 0.0 && row.hpwl < best_hpwl) {
            best_hpwl = row.hpwl;
            best_pl = pl;
            have_best = true;
        }

        if (std::isfinite(prev_hpwl) && prev_hpwl > 0 &&
            std::abs(row.hpwl - prev_hpwl) / prev_hpwl < cfg.hpwl_stop)
            stall++;
        else
            stall = 0;
        prev_hpwl = row.hpwl;
        bool warmed = cfg.lambda == 0.0 || lambda_eff >= cfg.lambda;
        if (stall >= cfg.hpwl_stop_iters && iter + 1 >= cfg.min_iterations && warmed) break;
    }
    res.placement = have_best ? std::move(best_pl) : std::move(pl);
    res.hpwl = total_hpwl(nl, res.placement);
    if (cfg.lambda > 0.0 && have_best) {
        res.timed = true;
        res.wns = best_wns;
        res.tns = best_tns;
        res.cpd = best_cpd;
    }
    return res;
}

} // namespace tdp
