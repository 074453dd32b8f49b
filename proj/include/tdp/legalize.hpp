#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tdp/congestion.hpp"
#include "tdp/netlist.hpp"
#include "tdp/qp.hpp"

namespace tdp {

// Square bins of bin_size x bin_size sites; per constrained kind, demand from
// movable instances and capacity from the device's per-site numbers. Edge
// bins hold fewer sites. Demand may be fractional once clock-pressure
// inflation kicks in.
struct BinGrid {
    int bin_size = 2;
    int cols = 0, rows = 0;
    std::vector<InstanceKind> kinds;
    std::vector<std::vector<double>> demand;            // [kind][bin]
    std::vector<std::vector<double>> capacity;          // [kind][bin]
    std::vector<std::vector<std::vector<int>>> members; // [kind][bin] -> movable ids
    std::vector<double> unit;                           // per-instance demand units

    int bin_count() const { return cols * rows; }
    int index(int c, int r) const { return r * cols + c; }
    int col_of(double x) const {
        return std::clamp(static_cast<int>(std::floor(x / bin_size)), 0, cols - 1);
    }
    int row_of(double y) const {
        return std::clamp(static_cast<int>(std::floor(y / bin_size)), 0, rows - 1);
    }
    int bin_at(double x, double y) const { return index(col_of(x), row_of(y)); }
};

// demand_scale: per-instance multiplier (empty = all 1); cap_scale: per-bin
// multiplier from the congestion adjustment (empty = all 1).
inline BinGrid build_bin_grid(const Netlist& nl, const PlacementState& pl, const Device& dev,
                              int bin_size, const std::vector<double>& demand_scale = {},
                              const std::vector<double>& cap_scale = {}) {
    if (bin_size <= 0) throw ValidationError("bin grid: bin_size must be positive");
    BinGrid g;
    g.bin_size = bin_size;
    g.cols = (dev.width + bin_size - 1) / bin_size;
    g.rows = (dev.height + bin_size - 1) / bin_size;
    if (!cap_scale.empty() && static_cast<int>(cap_scale.size()) != g.bin_count())
        throw ValidationError("bin grid: cap_scale size mismatch");
    int nb = g.bin_count();
    std::array<int, kNumInstanceKinds> kind_idx;
    kind_idx.fill(-1);
    for (const auto& [kind, per_site] : dev.capacity) {
        kind_idx[static_cast<int>(kind)] = static_cast<int>(g.kinds.size());
        g.kinds.push_back(kind);
        std::vector<double> cap(nb);
        for (int r = 0; r < g.rows; r++)
            for (int c = 0; c < g.cols; c++) {
                int sw = std::min(bin_size, dev.width - c * bin_size);
                int sh = std::min(bin_size, dev.height - r * bin_size);
                double scale = cap_scale.empty() ? 1.0 : cap_scale[g.index(c, r)];
                cap[g.index(c, r)] = per_site * sw * sh * scale;
            }
        g.capacity.push_back(std::move(cap));
        g.demand.emplace_back(nb, 0.0);
        g.members.emplace_back(nb);
    }
    g.unit.assign(nl.instances.size(), 1.0);
    for (const Instance& inst : nl.instances) {
        if (inst.fixed) continue;
        int k = kind_idx[static_cast<int>(inst.kind)];
        if (k < 0) continue;
        if (!demand_scale.empty()) g.unit[inst.id] = demand_scale[inst.id];
        int b = g.bin_at(pl.x[inst.id], pl.y[inst.id]);
        g.demand[k][b] += g.unit[inst.id];
        g.members[k][b].push_back(inst.id);
    }
    return g;
}

inline std::vector<int> detect_overflow(const BinGrid& g) {
    std::vector<int> out;
    for (int b = 0; b < g.bin_count(); b++)
        for (size_t k = 0; k < g.kinds.size(); k++)
            if (g.demand[k][b] > g.capacity[k][b]) {
                out.push_back(b);
                break;
            }
    return out;
}

inline double max_utilization(const BinGrid& g) {
    double m = 0;
    for (size_t k = 0; k < g.kinds.size(); k++)
        for (int b = 0; b < g.bin_count(); b++)
            if (g.capacity[k][b] > 0) m = std::max(m, g.demand[k][b] / g.capacity[k][b]);
    return m;
}

struct SpreadResult {
    PlacementState placement;
    std::vector<PseudoNet> anchors; // one per moved instance, at its new spot
    int moved = 0;
    double max_util = 0;
};

// Ripple spreading: overflowed bins shed instances into the nearest bins with
// spare capacity, walking outward ring by ring. Everything is ordered (kinds,
// bins, ring cells, candidate instances), so the result is a deterministic
// function of the input. Demand is conserved move by move, and since targets
// must fully absorb an instance, no move creates a new overflow — a second
// pass finds nothing to do.
inline SpreadResult spread_instances(const Netlist& nl, const PlacementState& pl,
                                     const Device& dev, BinGrid& g) {
    SpreadResult res;
    res.placement = pl;
    const std::vector<double>& unit = g.unit;

    auto slot_position = [&](size_t k, int bin, double& px, double& py) {
        int c = bin % g.cols, r = bin / g.cols;
        int idx = static_cast<int>(g.members[k][bin].size()) - 1;
        int sx = idx % g.bin_size;
        int sy = (idx / g.bin_size) % g.bin_size;
        px = std::clamp(double(c * g.bin_size + sx) + 0.5, 0.0, dev.width - 1.0);
        py = std::clamp(double(r * g.bin_size + sy) + 0.5, 0.0, dev.height - 1.0);
    };

    int max_ring = std::max(g.cols, g.rows);
    for (size_t k = 0; k < g.kinds.size(); k++) {
        for (int b = 0; b < g.bin_count(); b++) {
            if (g.demand[k][b] <= g.capacity[k][b]) continue;
            int bc = b % g.cols, br = b / g.cols;
            for (int ring = 1; ring <= max_ring && g.demand[k][b] > g.capacity[k][b]; ring++) {
                std::vector<int> cells;
                for (int r = std::max(0, br - ring); r <= std::min(g.rows - 1, br + ring); r++)
                    for (int c = std::max(0, bc - ring); c <= std::min(g.cols - 1, bc + ring);
                         c++)
                        if (std::max(std::abs(r - br), std::abs(c - bc)) == ring)
                            cells.push_back(g.index(c, r));
                std::sort(cells.begin(), cells.end());
                for (int t : cells) {
                    if (g.demand[k][b] <= g.capacity[k][b]) break;
                    double tx = (t % g.cols + 0.5) * g.bin_size;
                    double ty = (t / g.cols + 0.5) * g.bin_size;
                    while (g.demand[k][b] > g.capacity[k][b]) {
                        double free = g.capacity[k][t] - g.demand[k][t];
                        // nearest instance to the target that the target can absorb
                        int pick = -1;
                        double best = 0;
                        for (int id : g.members[k][b]) {
                            if (unit[id] > free) continue;
                            double dx = res.placement.x[id] - tx;
                            double dy = res.placement.y[id] - ty;
                            double d2 = dx * dx + dy * dy;
                            if (pick < 0 || d2 < best || (d2 == best && id < pick)) {
                                pick = id;
                                best = d2;
                            }
                        }
                        if (pick < 0) break;
                        auto& src = g.members[k][b];
                        src.erase(std::find(src.begin(), src.end(), pick));
                        g.members[k][t].push_back(pick);
                        g.demand[k][b] -= unit[pick];
                        g.demand[k][t] += unit[pick];
                        double px, py;
                        slot_position(k, t, px, py);
                        res.placement.x[pick] = px;
                        res.placement.y[pick] = py;
                        res.moved++;
                    }
                }
            }
            if (g.demand[k][b] > g.capacity[k][b])
                throw ValidationError(std::string("spread: ") + kind_name(g.kinds[k]) +
                                      " demand exceeds reachable capacity; check the netlist "
                                      "against the device (validate)");
        }
    }

    std::vector<char> is_moved(nl.instances.size(), 0);
    for (size_t k = 0; k < g.kinds.size(); k++)
        for (int b = 0; b < g.bin_count(); b++)
            for (int id : g.members[k][b])
                if (res.placement.x[id] != pl.x[id] || res.placement.y[id] != pl.y[id])
                    is_moved[id] = 1;
    for (size_t id = 0; id < is_moved.size(); id++)
        if (is_moved[id]) {
            PseudoNet a;
            a.inst = static_cast<int>(id);
            a.kind = PseudoKind::Anchor;
            a.tx = res.placement.x[id];
            a.ty = res.placement.y[id];
            res.anchors.push_back(a);
        }
    res.max_util = max_utilization(g);
    return res;
}

struct AdjustResult {
    std::vector<double> demand_scale; // per instance
    std::vector<double> cap_scale;    // per bin
    int inflated = 0;                 // instances hit by the clock rule
};

// Two pressure valves between iterations:
//  (a) clock pressure — when one clock domain's flip-flops crowd a
//      half-column (a bin column crossed with half a clock region's height)
//      past 80% of the region clock capacity, their demand is inflated so
//      spreading pushes them apart;
//  (b) congestion-aware supply — bin capacity shrinks smoothly where routing
//      density runs above the median, f(c) = 1/(1 + coef*c/median), with a
//      uniform relaxation if that would make total supply infeasible.
inline AdjustResult adjust_resources(const Netlist& nl, const PlacementState& pl,
                                     const Device& dev, const GCellGrid& gcells, int bin_size,
                                     double kappa = 1.5, double clock_util = 0.8,
                                     double cap_coef = 0.1) {
    AdjustResult res;
    res.demand_scale.assign(nl.instances.size(), 1.0);
    int bin_cols = (dev.width + bin_size - 1) / bin_size;
    int bin_rows = (dev.height + bin_size - 1) / bin_size;
    int nb = bin_cols * bin_rows;
    res.cap_scale.assign(nb, 1.0);

    int n_clocks = std::max<size_t>(1, nl.clocks.size());
    double region_h = double(dev.height) / dev.cr_rows;
    auto half_col_key = [&](double x, double y, int clock) {
        int col = std::clamp(static_cast<int>(std::floor(x / bin_size)), 0, bin_cols - 1);
        int rr = std::clamp(static_cast<int>(std::floor(y / region_h)), 0, dev.cr_rows - 1);
        int half = (y - rr * region_h) >= region_h / 2 ? 1 : 0;
        return ((col * dev.cr_rows + rr) * 2 + half) * n_clocks + clock;
    };
    std::vector<int> ff_count(size_t(bin_cols) * dev.cr_rows * 2 * n_clocks, 0);
    for (const Instance& inst : nl.instances)
        if (inst.kind == InstanceKind::FF && inst.clock >= 0)
            ff_count[half_col_key(pl.x[inst.id], pl.y[inst.id], inst.clock)]++;
    double limit = clock_util * dev.clock_capacity;
    for (const Instance& inst : nl.instances)
        if (inst.kind == InstanceKind::FF && inst.clock >= 0 && !inst.fixed &&
            ff_count[half_col_key(pl.x[inst.id], pl.y[inst.id], inst.clock)] > limit) {
            res.demand_scale[inst.id] = kappa;
            res.inflated++;
        }

    std::vector<double> cong(nb);
    for (int r = 0; r < bin_rows; r++)
        for (int c = 0; c < bin_cols; c++) {
            double x = (c + 0.5) * bin_size;
            double y = (r + 0.5) * bin_size;
            cong[r * bin_cols + c] = gcells.at(gcells.cell_x(x), gcells.cell_y(y));
        }
    std::vector<double> sorted = cong;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];
    if (median > 0) {
        for (int b = 0; b < nb; b++) res.cap_scale[b] = 1.0 / (1.0 + cap_coef * cong[b] / median);

        // Keep total scaled supply at or above total demand per kind, else
        // spreading has no feasible answer purely because of the scaling.
        for (const auto& [kind, per_site] : dev.capacity) {
            double total_dem = 0, total_cap = 0;
            for (const Instance& inst : nl.instances)
                if (!inst.fixed && inst.kind == kind) total_dem += res.demand_scale[inst.id];
            for (int r = 0; r < bin_rows; r++)
                for (int c = 0; c < bin_cols; c++) {
                    int sw = std::min(bin_size, dev.width - c * bin_size);
                    int sh = std::min(bin_size, dev.height - r * bin_size);
                    total_cap += per_site * sw * sh * res.cap_scale[r * bin_cols + c];
                }
            if (total_dem > total_cap && total_cap > 0) {
                double u = total_dem / total_cap * 1.05;
                for (int b = 0; b < nb; b++) res.cap_scale[b] = std::min(1.0, res.cap_scale[b] * u);
            }
        }
    }
    return res;
}

} // namespace tdp
