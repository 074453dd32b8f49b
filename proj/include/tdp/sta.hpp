#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "tdp/congestion.hpp"
#include "tdp/delay_model.hpp"
#include "tdp/features.hpp"
#include "tdp/netlist.hpp"

namespace tdp {

// Intrinsic per-kind delays in ns. Sequential kinds carry their clock-to-Q
// here. Bundled defaults are engine fixtures, not vendor data.
struct LogicDelayTable {
    std::array<double, kNumInstanceKinds> delay{};

    static LogicDelayTable defaults() {
        LogicDelayTable t;
        t.delay[static_cast<int>(InstanceKind::LUT)] = 0.15;
        t.delay[static_cast<int>(InstanceKind::FF)] = 0.10;
        t.delay[static_cast<int>(InstanceKind::DSP)] = 0.35;
        t.delay[static_cast<int>(InstanceKind::RAMB)] = 0.40;
        t.delay[static_cast<int>(InstanceKind::MUX)] = 0.05;
        t.delay[static_cast<int>(InstanceKind::IO)] = 0.20;
        t.delay[static_cast<int>(InstanceKind::ClockBuffer)] = 0.0;
        t.delay[static_cast<int>(InstanceKind::CARRY8)] = 0.08;
        t.delay[static_cast<int>(InstanceKind::Shifter)] = 0.12;
        t.delay[static_cast<int>(InstanceKind::LUTRAM)] = 0.20;
        return t;
    }

    double of(InstanceKind k) const { return delay[static_cast<int>(k)]; }
};

// Convention used throughout: arrival is measured at a vertex's input, and
// the vertex's logic delay is charged when a signal leaves it. Sequential
// instances split into a launch vertex (drives fanout, carries clock-to-Q)
// and a capture vertex (receives fanin, logic 0, setup endpoint). This keeps
// arrival, required and slack mutually consistent:
//   T_arr(v) = max over fanin arcs a=(u->v) of T_arr(u) + logic(u) + netD(a)
//   T_req(u) = min over fanout arcs a=(u->v) of T_req(v) - logic(u) - netD(a)
//   slack(a) = T_req(v) - (T_arr(u) + logic(u) + netD(a))
// so the slack of the last critical arc equals the worst endpoint slack
// bit-for-bit.
struct TimingVertex {
    int inst = -1;
    bool is_capture = false;
    double logic = 0.0;
    int level = -1;
    double t_arr = 0.0;
    double t_req = 0.0;
};

struct TimingArc {
    int src = -1;
    int dst = -1;
    int net = -1;
    int load_index = -1; // position in the net's load list
    double delay = 0.0;
    double slack = 0.0;
};

struct TimingGraph {
    std::vector<TimingVertex> vertices;
    std::vector<TimingArc> arcs;
    std::vector<std::vector<int>> fanin, fanout; // arc ids per vertex
    std::vector<int> out_vertex, in_vertex;      // per instance id
    std::vector<std::vector<int>> levels;        // vertex ids, level 0 first
    std::vector<int> best_fanin;                 // argmax arc per vertex, -1 at sources
    double clock_period = 1.0;
    double wns = 0.0, tns = 0.0, cpd = 0.0;

    int add_vertex(double logic, bool is_capture = false, int inst = -1) {
        vertices.push_back({inst, is_capture, logic, -1, 0.0, 0.0});
        return static_cast<int>(vertices.size()) - 1;
    }
    int add_arc(int src, int dst, double delay = 0.0) {
        arcs.push_back({src, dst, -1, -1, delay, 0.0});
        return static_cast<int>(arcs.size()) - 1;
    }
    // Endpoints are capture vertices that actually receive something.
    bool is_endpoint(int v) const {
        return vertices[v].is_capture && !fanin[v].empty();
    }
};

// Adjacency from the arc list; call after the last add_arc.
inline void finalize_graph(TimingGraph& g) {
    g.fanin.assign(g.vertices.size(), {});
    g.fanout.assign(g.vertices.size(), {});
    for (size_t a = 0; a < g.arcs.size(); a++) {
        const TimingArc& arc = g.arcs[a];
        if (arc.src < 0 || arc.dst < 0 || arc.src >= static_cast<int>(g.vertices.size()) ||
            arc.dst >= static_cast<int>(g.vertices.size()))
            throw ValidationError("timing graph: arc endpoint out of range");
        g.fanout[arc.src].push_back(static_cast<int>(a));
        g.fanin[arc.dst].push_back(static_cast<int>(a));
    }
}

// One timing arc per driver->load pin pair of every signal net. Nets driven
// by clock buffers are distribution, not data, and carry no arcs (the clock
// is ideal). Sequential instances always split, so a registered input IO
// contributes a fanin-less capture vertex that is simply never an endpoint.
inline TimingGraph build_timing_graph(const Netlist& nl, const LogicDelayTable& table,
                                      double clock_period) {
    if (clock_period <= 0) throw ValidationError("timing graph: clock period must be positive");
    TimingGraph g;
    g.clock_period = clock_period;
    g.out_vertex.resize(nl.instances.size());
    g.in_vertex.resize(nl.instances.size());
    for (const Instance& inst : nl.instances) {
        if (inst.sequential) {
            g.out_vertex[inst.id] = g.add_vertex(table.of(inst.kind), false, inst.id);
            g.in_vertex[inst.id] = g.add_vertex(0.0, true, inst.id);
        } else {
            int v = g.add_vertex(table.of(inst.kind), false, inst.id);
            g.out_vertex[inst.id] = v;
            g.in_vertex[inst.id] = v;
        }
    }
    for (const Net& net : nl.nets) {
        if (net.loads.empty()) continue;
        if (nl.instances[net.driver.inst].kind == InstanceKind::ClockBuffer) continue;
        int src = g.out_vertex[net.driver.inst];
        for (size_t k = 0; k < net.loads.size(); k++) {
            int a = g.add_arc(src, g.in_vertex[net.loads[k].inst]);
            g.arcs[a].net = net.id;
            g.arcs[a].load_index = static_cast<int>(k);
        }
    }
    finalize_graph(g);
    return g;
}

// Longest-path levels: level(v) = 0 without fanin, else 1 + max over fanin
// sources. A vertex joins a wave only once its last predecessor has been
// retired, so the wave index is exactly that recursion. Every arc crosses
// strictly upward.
inline void levelize(TimingGraph& g) {
    size_t n = g.vertices.size();
    std::vector<int> pending(n);
    std::vector<int> frontier;
    for (size_t v = 0; v < n; v++) {
        pending[v] = static_cast<int>(g.fanin[v].size());
        if (pending[v] == 0) frontier.push_back(static_cast<int>(v));
    }
    size_t placed = 0;
    int level = 0;
    while (!frontier.empty()) {
        for (int v : frontier) g.vertices[v].level = level;
        placed += frontier.size();
        std::vector<int> next;
        for (int v : frontier)
            for (int a : g.fanout[v])
                if (--pending[g.arcs[a].dst] == 0) next.push_back(g.arcs[a].dst);
        frontier = std::move(next);
        level++;
    }
    if (placed != n) throw ValidationError("timing graph: cycle detected");
    g.levels.assign(level, {});
    for (size_t v = 0; v < n; v++) g.levels[g.vertices[v].level].push_back(static_cast<int>(v));
}

inline void forward_propagate(TimingGraph& g) {
    g.best_fanin.assign(g.vertices.size(), -1);
    for (const std::vector<int>& level : g.levels)
        for (int v : level) {
            TimingVertex& dst = g.vertices[v];
            dst.t_arr = 0.0;
            for (int a : g.fanin[v]) {
                const TimingArc& arc = g.arcs[a];
                const TimingVertex& src = g.vertices[arc.src];
                double cand = src.t_arr + src.logic + arc.delay;
                if (g.best_fanin[v] < 0 || cand > dst.t_arr) {
                    dst.t_arr = cand;
                    g.best_fanin[v] = a;
                }
            }
        }
}

inline void backward_propagate(TimingGraph& g) {
    double inf = std::numeric_limits<double>::infinity();
    for (auto it = g.levels.rbegin(); it != g.levels.rend(); ++it)
        for (int v : *it) {
            TimingVertex& src = g.vertices[v];
            src.t_req = src.is_capture ? g.clock_period : inf;
            for (int a : g.fanout[v]) {
                const TimingArc& arc = g.arcs[a];
                double cand = g.vertices[arc.dst].t_req - src.logic - arc.delay;
                src.t_req = std::min(src.t_req, cand);
            }
        }
}

// Arc slack keeps the forward pass's association so the traced path's last
// arc reproduces the worst endpoint slack exactly.
inline void compute_slacks(TimingGraph& g) {
    double inf = std::numeric_limits<double>::infinity();
    for (TimingArc& arc : g.arcs) {
        const TimingVertex& src = g.vertices[arc.src];
        double path = src.t_arr + src.logic + arc.delay;
        arc.slack = g.vertices[arc.dst].t_req - path;
    }
    g.wns = inf;
    g.tns = 0.0;
    bool any = false;
    for (size_t v = 0; v < g.vertices.size(); v++) {
        if (!g.is_endpoint(static_cast<int>(v))) continue;
        any = true;
        double s = g.vertices[v].t_req - g.vertices[v].t_arr;
        g.wns = std::min(g.wns, s);
        g.tns += std::min(0.0, s);
    }
    if (!any) {
        g.wns = inf;
        g.cpd = 0.0;
        return;
    }
    g.cpd = g.clock_period - g.wns;
}

struct CriticalPath {
    std::vector<int> arcs; // graph arc ids, launch side first
    int c_max() const { return static_cast<int>(arcs.size()); }
    // arcs remaining after arc k on the way to the endpoint
    int c_forward(int k) const { return c_max() - 1 - k; }
};

inline CriticalPath extract_critical_path(const TimingGraph& g) {
    CriticalPath cp;
    int worst = -1;
    double worst_slack = std::numeric_limits<double>::infinity();
    for (size_t v = 0; v < g.vertices.size(); v++) {
        if (!g.is_endpoint(static_cast<int>(v))) continue;
        double s = g.vertices[v].t_req - g.vertices[v].t_arr;
        if (s < worst_slack) {
            worst_slack = s;
            worst = static_cast<int>(v);
        }
    }
    if (worst < 0) return cp;
    for (int v = worst; g.best_fanin[v] >= 0; v = g.arcs[g.best_fanin[v]].src)
        cp.arcs.push_back(g.best_fanin[v]);
    std::reverse(cp.arcs.begin(), cp.arcs.end());
    return cp;
}

struct StaResult {
    CriticalPath path;
    BatchStats stats;
};

// Full analysis at a placement: refresh per-net features against the routing
// density grid, predict every arc delay in net batches, then propagate.
inline StaResult run_sta(TimingGraph& g, const Netlist& nl, const PlacementState& pl,
                         const Device& dev, const GCellGrid& grid, const DelayPredictor& model,
                         int batch_size, int cell_size, int threads = 1) {
    FeatureSet fs = extract_features(nl, pl, dev, grid, cell_size, threads);
    StaResult res;
    std::vector<std::vector<double>> pred = model.predict(fs, batch_size, &res.stats);
    std::vector<int> row_of_net(nl.nets.size(), -1);
    for (size_t i = 0; i < fs.nets.size(); i++) row_of_net[fs.nets[i].net] = static_cast<int>(i);
    for (TimingArc& arc : g.arcs) {
        int row = row_of_net[arc.net];
        if (row < 0) throw ValidationError("sta: arc net missing from feature set");
        arc.delay = pred[row][arc.load_index];
    }
    forward_propagate(g);
    backward_propagate(g);
    compute_slacks(g);
    res.path = extract_critical_path(g);
    return res;
}

inline json timing_report_json(const TimingGraph& g, const Netlist& nl, const CriticalPath& cp) {
    json j;
    j["wns"] = g.wns;
    j["tns"] = g.tns;
    j["cpd"] = g.cpd;
    json path = json::array();
    for (int a : cp.arcs) {
        const TimingArc& arc = g.arcs[a];
        json e;
        e["from"] = nl.instances[g.vertices[arc.src].inst].name;
        e["to"] = nl.instances[g.vertices[arc.dst].inst].name;
        e["net"] = nl.nets[arc.net].name;
        e["netD"] = arc.delay;
        e["slack"] = arc.slack;
        path.push_back(std::move(e));
    }
    j["critical_path"] = std::move(path);
    return j;
}

} // namespace tdp
