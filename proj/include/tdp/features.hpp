#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "tdp/common.hpp"
#include "tdp/congestion.hpp"
#include "tdp/netlist.hpp"

namespace tdp {

constexpr int kVertexFeatureDim = 13; // x, y, kind one-hot (10), direction flag
constexpr int kEnvFeatureDim = 5;     // hpwl, width, length, fanout, avg routing density
constexpr int kPinFeatureDim = 7;     // |dx|, |dy|, net index, 3 crossing flags, pin density

// Relational edge types of a net graph. The driver fans out to every load and
// each load points back, plus a self-loop per vertex on the matching side.
enum EdgeType : int {
    kDriverToLoad = 0,
    kLoadToDriver = 1,
    kDriverSelf = 2,
    kLoadSelf = 3,
    kNumEdgeTypes = 4
};

struct GraphEdge {
    int src, dst;
    int type;
};

// Star graph of one net: vertex 0 is the driver, vertices 1..fanout follow
// the net's load order.
struct NetGraph {
    Eigen::MatrixXd vx; // p x kVertexFeatureDim
    std::vector<GraphEdge> edges;
    int vertex_count() const { return static_cast<int>(vx.rows()); }
};

struct NetFeatures {
    int net = -1;
    NetGraph graph;
    std::array<double, kEnvFeatureDim> env{};
    std::vector<std::array<double, kPinFeatureDim>> pins; // one row per load
};

struct FeatureSet {
    std::vector<NetFeatures> nets; // only nets with at least one load
    size_t total_pairs = 0;
};

inline void fill_vertex_row(Eigen::MatrixXd& m, int row, const Instance& inst,
                            const PlacementState& pl, bool is_load) {
    m(row, 0) = pl.x[inst.id];
    m(row, 1) = pl.y[inst.id];
    for (int k = 0; k < kNumInstanceKinds; k++) m(row, 2 + k) = 0.0;
    m(row, 2 + static_cast<int>(inst.kind)) = 1.0;
    m(row, 12) = is_load ? 1.0 : 0.0;
}

inline NetGraph build_net_graph(const Net& net, const Netlist& nl, const PlacementState& pl) {
    NetGraph g;
    int f = static_cast<int>(net.loads.size());
    g.vx.resize(1 + f, kVertexFeatureDim);
    fill_vertex_row(g.vx, 0, nl.instances[net.driver.inst], pl, false);
    g.edges.reserve(1 + 3 * f);
    g.edges.push_back({0, 0, kDriverSelf});
    for (int k = 0; k < f; k++) {
        fill_vertex_row(g.vx, 1 + k, nl.instances[net.loads[k].inst], pl, true);
        g.edges.push_back({0, 1 + k, kDriverToLoad});
        g.edges.push_back({1 + k, 0, kLoadToDriver});
        g.edges.push_back({1 + k, 1 + k, kLoadSelf});
    }
    return g;
}

// Spatial indexes backing the pin-density and region-crossing features.
struct FeatureIndexes {
    RectCountIndex pins;
    RectCountIndex io, dsp, ramb;
    // Positions of the endpoints' own instances are excluded from crossing
    // counts; we only care about third-party blocks inside the span.
    static bool crosses(const RectCountIndex& idx, double x0, double y0, double x1, double y1,
                        const Instance& a, const Instance& b, InstanceKind kind,
                        const PlacementState& pl) {
        if (x1 < x0) std::swap(x0, x1);
        if (y1 < y0) std::swap(y0, y1);
        long long n = idx.count(x0, y0, x1, y1);
        auto inside = [&](const Instance& inst) {
            return inst.kind == kind && pl.x[inst.id] >= x0 && pl.x[inst.id] <= x1 &&
                   pl.y[inst.id] >= y0 && pl.y[inst.id] <= y1;
        };
        if (inside(a)) n--;
        if (&a != &b && inside(b)) n--;
        return n > 0;
    }
};

inline FeatureIndexes build_feature_indexes(const Netlist& nl, const PlacementState& pl,
                                            const Device& dev, int cell_size) {
    FeatureIndexes fi;
    fi.pins = build_pin_index(nl, pl, dev, cell_size);
    std::vector<double> xs, ys;
    auto collect = [&](InstanceKind k, RectCountIndex& out) {
        xs.clear();
        ys.clear();
        for (const Instance& inst : nl.instances)
            if (inst.kind == k) {
                xs.push_back(pl.x[inst.id]);
                ys.push_back(pl.y[inst.id]);
            }
        out.build(xs, ys, dev.width, dev.height, cell_size);
    };
    collect(InstanceKind::IO, fi.io);
    collect(InstanceKind::DSP, fi.dsp);
    collect(InstanceKind::RAMB, fi.ramb);
    return fi;
}

inline void fill_net_features(NetFeatures& nf, const Net& net, const Netlist& nl,
                              const PlacementState& pl, const GCellGrid& grid,
                              const FeatureIndexes& fi, int cell_size) {
    nf.net = net.id;
    nf.graph = build_net_graph(net, nl, pl);
    double w = net_hpwl_y(net, pl), l = net_hpwl_x(net, pl);
    nf.env = {l + w, w, l, double(net.loads.size()),
              net_avg_routing_density(net, pl, grid)};
    nf.pins.resize(net.loads.size());
    const Instance& di = nl.instances[net.driver.inst];
    double dx0 = pl.pin_x(net.driver), dy0 = pl.pin_y(net.driver);
    for (size_t k = 0; k < net.loads.size(); k++) {
        const Instance& li = nl.instances[net.loads[k].inst];
        double lx = pl.pin_x(net.loads[k]), ly = pl.pin_y(net.loads[k]);
        auto& row = nf.pins[k];
        row[0] = std::abs(lx - dx0);
        row[1] = std::abs(ly - dy0);
        row[2] = double(k);
        row[3] = FeatureIndexes::crosses(fi.io, dx0, dy0, lx, ly, di, li, InstanceKind::IO, pl);
        row[4] = FeatureIndexes::crosses(fi.dsp, dx0, dy0, lx, ly, di, li, InstanceKind::DSP, pl);
        row[5] =
            FeatureIndexes::crosses(fi.ramb, dx0, dy0, lx, ly, di, li, InstanceKind::RAMB, pl);
        row[6] = avg_pin_density(dx0, dy0, lx, ly, fi.pins, cell_size);
    }
}

// Refreshes the full feature set for every net with at least one load.
inline FeatureSet extract_features(const Netlist& nl, const PlacementState& pl,
                                   const Device& dev, const GCellGrid& grid, int cell_size,
                                   int threads = 1) {
    FeatureIndexes fi = build_feature_indexes(nl, pl, dev, cell_size);
    std::vector<int> live;
    live.reserve(nl.nets.size());
    for (const Net& net : nl.nets)
        if (!net.loads.empty()) live.push_back(net.id);

    FeatureSet fs;
    fs.nets.resize(live.size());
    parallel_for(live.size(), threads, [&](size_t i) {
        fill_net_features(fs.nets[i], nl.nets[live[i]], nl, pl, grid, fi, cell_size);
    });
    for (const NetFeatures& nf : fs.nets) fs.total_pairs += nf.pins.size();
    return fs;
}

}  // namespace tdp
