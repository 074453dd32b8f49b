#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tdp/netlist.hpp"

namespace tdp {

// Uniform g-cell grid over the die. cell_size is in sites; edge cells may be
// partial when the die dimension is not a multiple.
struct GCellGrid {
    int cell_size = 4;
    int cols = 0, rows = 0;
    double die_w = 0, die_h = 0;
    std::vector<double> density; // rows*cols, row-major

    double& at(int cx, int cy) { return density[cy * cols + cx]; }
    double at(int cx, int cy) const { return density[cy * cols + cx]; }

    int cell_x(double x) const {
        return std::clamp(static_cast<int>(std::floor(x / cell_size)), 0, cols - 1);
    }
    int cell_y(double y) const {
        return std::clamp(static_cast<int>(std::floor(y / cell_size)), 0, rows - 1);
    }
};

inline GCellGrid make_gcell_grid(const Device& dev, int cell_size) {
    if (cell_size <= 0) throw ValidationError("congestion: cell_size must be positive");
    GCellGrid g;
    g.cell_size = cell_size;
    g.cols = (dev.width + cell_size - 1) / cell_size;
    g.rows = (dev.height + cell_size - 1) / cell_size;
    g.die_w = dev.width;
    g.die_h = dev.height;
    g.density.assign(size_t(g.cols) * g.rows, 0.0);
    return g;
}

// Pin-count scaling of a net's routing demand: fanout beyond 3 pins adds 20%
// per extra pin.
inline double net_weight(int pin_count) {
    return 1.0 + 0.2 * std::max(0, pin_count - 3);
}

struct CellRange {
    int x0, y0, x1, y1; // inclusive
    int count() const { return (x1 - x0 + 1) * (y1 - y0 + 1); }
};

inline CellRange net_cell_range(const Net& net, const PlacementState& pl, const GCellGrid& g) {
    double lx = pl.pin_x(net.driver), hx = lx;
    double ly = pl.pin_y(net.driver), hy = ly;
    for (const PinRef& p : net.loads) {
        lx = std::min(lx, pl.pin_x(p));
        hx = std::max(hx, pl.pin_x(p));
        ly = std::min(ly, pl.pin_y(p));
        hy = std::max(hy, pl.pin_y(p));
    }
    return {g.cell_x(lx), g.cell_y(ly), g.cell_x(hx), g.cell_y(hy)};
}

// Each net spreads weight * HPWL evenly over the g-cells its bounding box
// intersects; per-cell demand is the sum over covering nets.
inline GCellGrid compute_routing_density(const Netlist& nl, const PlacementState& pl,
                                         const Device& dev, int cell_size) {
    GCellGrid g = make_gcell_grid(dev, cell_size);
    for (const Net& net : nl.nets) {
        if (net.pin_count() < 2) continue; // no routing demand
        CellRange r = net_cell_range(net, pl, g);
        double share = net_weight(net.pin_count()) * net_hpwl(net, pl) / r.count();
        for (int cy = r.y0; cy <= r.y1; cy++)
            for (int cx = r.x0; cx <= r.x1; cx++) g.at(cx, cy) += share;
    }
    return g;
}

// Mean routing demand over the cells the net's bounding box intersects.
inline double net_avg_routing_density(const Net& net, const PlacementState& pl,
                                      const GCellGrid& g) {
    CellRange r = net_cell_range(net, pl, g);
    double sum = 0.0;
    for (int cy = r.y0; cy <= r.y1; cy++)
        for (int cx = r.x0; cx <= r.x1; cx++) sum += g.at(cx, cy);
    return sum / r.count();
}

// ---------------------------------------------------------------------------
// Exact point-in-rectangle counting over a static point set. Points are
// bucketed at g-cell granularity with a prefix-sum over bucket totals; fully
// covered buckets resolve in O(1), boundary buckets scan their points. The
// result is exact, matching a brute-force scan.
struct RectCountIndex {
    double bucket = 4.0;
    int cols = 0, rows = 0;
    std::vector<std::vector<double>> pts_x, pts_y; // per-bucket point lists
    std::vector<long long> prefix;                 // (rows+1)*(cols+1) counts

    void build(const std::vector<double>& xs, const std::vector<double>& ys, double w,
               double h, double bucket_size) {
        bucket = std::max(1.0, bucket_size);
        cols = std::max(1, static_cast<int>(std::ceil(w / bucket)));
        rows = std::max(1, static_cast<int>(std::ceil(h / bucket)));
        pts_x.assign(size_t(cols) * rows, {});
        pts_y.assign(size_t(cols) * rows, {});
        for (size_t i = 0; i < xs.size(); i++) {
            int bx = std::clamp(static_cast<int>(std::floor(xs[i] / bucket)), 0, cols - 1);
            int by = std::clamp(static_cast<int>(std::floor(ys[i] / bucket)), 0, rows - 1);
            pts_x[size_t(by) * cols + bx].push_back(xs[i]);
            pts_y[size_t(by) * cols + bx].push_back(ys[i]);
        }
        prefix.assign(size_t(cols + 1) * (rows + 1), 0);
        for (int r = 0; r < rows; r++)
            for (int c = 0; c < cols; c++)
                prefix[size_t(r + 1) * (cols + 1) + (c + 1)] =
                    prefix[size_t(r) * (cols + 1) + (c + 1)] +
                    prefix[size_t(r + 1) * (cols + 1) + c] -
                    prefix[size_t(r) * (cols + 1) + c] +
                    static_cast<long long>(pts_x[size_t(r) * cols + c].size());
    }

    long long block_count(int c0, int r0, int c1, int r1) const { // inclusive buckets
        return prefix[size_t(r1 + 1) * (cols + 1) + (c1 + 1)] -
               prefix[size_t(r0) * (cols + 1) + (c1 + 1)] -
               prefix[size_t(r1 + 1) * (cols + 1) + c0] +
               prefix[size_t(r0) * (cols + 1) + c0];
    }

    // Number of points inside the closed rectangle [x0,x1] x [y0,y1].
    long long count(double x0, double y0, double x1, double y1) const {
        if (x1 < x0) std::swap(x0, x1);
        if (y1 < y0) std::swap(y0, y1);
        int c0 = std::clamp(static_cast<int>(std::floor(x0 / bucket)), 0, cols - 1);
        int c1 = std::clamp(static_cast<int>(std::floor(x1 / bucket)), 0, cols - 1);
        int r0 = std::clamp(static_cast<int>(std::floor(y0 / bucket)), 0, rows - 1);
        int r1 = std::clamp(static_cast<int>(std::floor(y1 / bucket)), 0, rows - 1);
        // Interior buckets lie strictly inside the rectangle in both axes.
        int ic0 = (c0 * bucket >= x0) ? c0 : c0 + 1;
        int ic1 = ((c1 + 1) * bucket <= x1) ? c1 : c1 - 1;
        int ir0 = (r0 * bucket >= y0) ? r0 : r0 + 1;
        int ir1 = ((r1 + 1) * bucket <= y1) ? r1 : r1 - 1;
        long long total = 0;
        bool has_core = ic0 <= ic1 && ir0 <= ir1;
        if (has_core) total += block_count(ic0, ir0, ic1, ir1);
        for (int r = r0; r <= r1; r++)
            for (int c = c0; c <= c1; c++) {
                if (has_core && c >= ic0 && c <= ic1 && r >= ir0 && r <= ir1) continue;
                const auto& bx = pts_x[size_t(r) * cols + c];
                const auto& by = pts_y[size_t(r) * cols + c];
                for (size_t i = 0; i < bx.size(); i++)
                    if (bx[i] >= x0 && bx[i] <= x1 && by[i] >= y0 && by[i] <= y1) total++;
            }
        return total;
    }
};

// Index over every pin position in the design (drivers and loads alike).
inline RectCountIndex build_pin_index(const Netlist& nl, const PlacementState& pl,
                                      const Device& dev, double bucket = 4.0) {
    std::vector<double> xs, ys;
    for (const Net& net : nl.nets) {
        xs.push_back(pl.pin_x(net.driver));
        ys.push_back(pl.pin_y(net.driver));
        for (const PinRef& p : net.loads) {
            xs.push_back(pl.pin_x(p));
            ys.push_back(pl.pin_y(p));
        }
    }
    RectCountIndex idx;
    idx.build(xs, ys, dev.width, dev.height, bucket);
    return idx;
}

// Pin density between two pins: pins inside the closed rectangle they span,
// divided by the rectangle's area in g-cells (floored at one cell). Symmetric
// in the two pins by construction.
inline double avg_pin_density(double ax, double ay, double bx, double by,
                              const RectCountIndex& pins, int cell_size) {
    long long n = pins.count(std::min(ax, bx), std::min(ay, by), std::max(ax, bx),
                             std::max(ay, by));
    double area = std::abs(ax - bx) * std::abs(ay - by) / (double(cell_size) * cell_size);
    return double(n) / std::max(1.0, area);
}

inline double avg_pin_density(const PinRef& a, const PinRef& b, const Netlist& nl,
                              const PlacementState& pl, const Device& dev, int cell_size) {
    RectCountIndex idx = build_pin_index(nl, pl, dev, cell_size);
    return avg_pin_density(pl.pin_x(a), pl.pin_y(a), pl.pin_x(b), pl.pin_y(b), idx, cell_size);
}

}  // namespace tdp
