#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <vector>

#include "tdp/netlist.hpp"

namespace tdp {

// One connection of the bound-to-bound net decomposition of one dimension.
// Pin indices: 0 = driver, k+1 = load k.
struct B2BPair {
    int pin_a = 0, pin_b = 0;
    double w = 0;
};

// Boundary pins connect to each other, inner pins to both boundaries, with
// w = 1/((p-1)*|d|) so the weighted quadratic reproduces the net span
// exactly at the positions the pairs were built from. Coincident pins clamp
// the distance at eps, which sends their term toward zero instead of
// blowing up.
inline std::vector<B2BPair> b2b_pairs(const std::vector<double>& pin_pos, double eps) {
    int p = static_cast<int>(pin_pos.size());
    std::vector<B2BPair> out;
    if (p < 2) return out;
    int lo = 0, hi = 0;
    for (int i = 1; i < p; i++) {
        if (pin_pos[i] < pin_pos[lo]) lo = i;
        if (pin_pos[i] > pin_pos[hi]) hi = i;
    }
    if (lo == hi) hi = lo == 0 ? 1 : 0; // fully coincident net: any boundary pair
    double denom = double(p - 1);
    auto weight = [&](int a, int b) {
        return 1.0 / (denom * std::max(std::abs(pin_pos[a] - pin_pos[b]), eps));
    };
    out.push_back({lo, hi, weight(lo, hi)});
    for (int i = 0; i < p; i++) {
        if (i == lo || i == hi) continue;
        out.push_back({i, lo, weight(i, lo)});
        out.push_back({i, hi, weight(i, hi)});
    }
    return out;
}

// A timing arc stamped as a 2-pin connection per dimension, weighted by the
// slack-derived arc weight on top of the same 1/|d| normalization.
struct TimingArcTerm {
    int src_inst = -1, dst_inst = -1;
    double src_dx = 0, src_dy = 0, dst_dx = 0, dst_dy = 0;
    double w = 0; // already includes the slack weighting, not the lambda split
};

enum class PseudoKind { Anchor, ClockRegion };

// Anchors pull both coordinates toward a point; clock-region pseudo nets pull
// x only, toward the region's horizontal center.
struct PseudoNet {
    int inst = -1;
    PseudoKind kind = PseudoKind::Anchor;
    double tx = 0, ty = 0;
    double weight = 1.0;
};

// Mean connection weight of the plain wirelength model at this placement,
// pooled over both dimensions; anchor and pseudo-net weights are expressed
// relative to it so they track the problem's scale.
inline double mean_b2b_weight(const Netlist& nl, const PlacementState& pl, double eps) {
    double sum = 0;
    size_t count = 0;
    std::vector<double> px, py;
    for (const Net& net : nl.nets) {
        if (net.pin_count() < 2) continue;
        px.clear();
        py.clear();
        px.push_back(pl.pin_x(net.driver));
        py.push_back(pl.pin_y(net.driver));
        for (const PinRef& pin : net.loads) {
            px.push_back(pl.pin_x(pin));
            py.push_back(pl.pin_y(pin));
        }
        for (const B2BPair& pr : b2b_pairs(px, eps)) {
            sum += pr.w;
            count++;
        }
        for (const B2BPair& pr : b2b_pairs(py, eps)) {
            sum += pr.w;
            count++;
        }
    }
    return count ? sum / double(count) : 0.0;
}

// Two independent SPD systems in the movable instances' coordinates. Fixed
// instances are folded into the right-hand side at stamp time.
struct QuadraticSystem {
    std::vector<int> var_of_inst; // -1 for fixed
    std::vector<int> inst_of_var;
    Eigen::SparseMatrix<double> ax, ay;
    Eigen::VectorXd bx, by;
    std::vector<int> singular; // instances with no connectivity in some dim
    double mean_b2b = 0;

    int size() const { return static_cast<int>(inst_of_var.size()); }
};

namespace detail {

struct DimStamper {
    std::vector<Eigen::Triplet<double>>& tri;
    Eigen::VectorXd& rhs;
    const std::vector<int>& var;
    const std::vector<double>& pos; // current coordinates, for fixed folding

    // w * ((pos_i + ci) - (pos_j + cj))^2 with instance-relative pin offsets
    // as constants.
    void pair(int inst_i, int inst_j, double ci, double cj, double w) {
        int vi = var[inst_i], vj = var[inst_j];
        if (vi < 0 && vj < 0) return;
        if (vi >= 0 && vj >= 0) {
            tri.emplace_back(vi, vi, w);
            tri.emplace_back(vj, vj, w);
            tri.emplace_back(vi, vj, -w);
            tri.emplace_back(vj, vi, -w);
            rhs[vi] += w * (cj - ci);
            rhs[vj] += w * (ci - cj);
        } else if (vi >= 0) {
            tri.emplace_back(vi, vi, w);
            rhs[vi] += w * (pos[inst_j] + cj - ci);
        } else {
            tri.emplace_back(vj, vj, w);
            rhs[vj] += w * (pos[inst_i] + ci - cj);
        }
    }

    void anchor(int inst, double target, double w) {
        int v = var[inst];
        if (v < 0) return;
        tri.emplace_back(v, v, w);
        rhs[v] += w * target;
    }
};

} // namespace detail

// Stamps (1-lambda)*(wirelength + anchors) + lambda*(timing arcs +
// clock-region pseudo nets). With lambda = 0 the timing inputs are never
// touched, so the system is bit-identical to a pure wirelength assembly.
inline QuadraticSystem assemble_system(const Netlist& nl, const PlacementState& pl,
                                       const std::vector<TimingArcTerm>& arcs,
                                       const std::vector<PseudoNet>& pseudos, double lambda,
                                       double eps) {
    if (lambda < 0.0 || lambda > 1.0)
        throw ValidationError("assemble: lambda must lie in [0, 1]");
    QuadraticSystem sys;
    sys.var_of_inst.assign(nl.instances.size(), -1);
    for (const Instance& inst : nl.instances)
        if (!inst.fixed) {
            sys.var_of_inst[inst.id] = static_cast<int>(sys.inst_of_var.size());
            sys.inst_of_var.push_back(inst.id);
        }
    int n = sys.size();
    sys.bx = Eigen::VectorXd::Zero(n);
    sys.by = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> tx, ty;
    detail::DimStamper sx{tx, sys.bx, sys.var_of_inst, pl.x};
    detail::DimStamper sy{ty, sys.by, sys.var_of_inst, pl.y};

    double wl_scale = 1.0 - lambda;
    double b2b_sum = 0;
    size_t b2b_count = 0;
    std::vector<double> px, py;
    std::vector<int> pin_inst;
    std::vector<double> pin_dx, pin_dy;
    for (const Net& net : nl.nets) {
        if (net.pin_count() < 2) continue;
        px.clear();
        py.clear();
        pin_inst.clear();
        pin_dx.clear();
        pin_dy.clear();
        auto add_pin = [&](const PinRef& pin) {
            px.push_back(pl.pin_x(pin));
            py.push_back(pl.pin_y(pin));
            pin_inst.push_back(pin.inst);
            pin_dx.push_back(pin.dx);
            pin_dy.push_back(pin.dy);
        };
        add_pin(net.driver);
        for (const PinRef& pin : net.loads) add_pin(pin);
        for (const B2BPair& pr : b2b_pairs(px, eps)) {
            b2b_sum += pr.w;
            b2b_count++;
            sx.pair(pin_inst[pr.pin_a], pin_inst[pr.pin_b], pin_dx[pr.pin_a], pin_dx[pr.pin_b],
                    wl_scale * pr.w);
        }
        for (const B2BPair& pr : b2b_pairs(py, eps)) {
            b2b_sum += pr.w;
            b2b_count++;
            sy.pair(pin_inst[pr.pin_a], pin_inst[pr.pin_b], pin_dy[pr.pin_a], pin_dy[pr.pin_b],
                    wl_scale * pr.w);
        }
    }
    sys.mean_b2b = b2b_count ? b2b_sum / double(b2b_count) : 0.0;

    for (const PseudoNet& pn : pseudos) {
        if (pn.weight <= 0) throw ValidationError("pseudo net weight must be positive");
        if (pn.kind == PseudoKind::Anchor) {
            sx.anchor(pn.inst, pn.tx, wl_scale * pn.weight);
            sy.anchor(pn.inst, pn.ty, wl_scale * pn.weight);
        } else if (lambda > 0.0) {
            sx.anchor(pn.inst, pn.tx, lambda * pn.weight);
        }
    }
    if (lambda > 0.0) {
        for (const TimingArcTerm& arc : arcs) {
            if (arc.w <= 0) continue;
            double ax = pl.x[arc.src_inst] + arc.src_dx - pl.x[arc.dst_inst] - arc.dst_dx;
            double ay = pl.y[arc.src_inst] + arc.src_dy - pl.y[arc.dst_inst] - arc.dst_dy;
            double wx = arc.w / std::max(std::abs(ax), eps);
            double wy = arc.w / std::max(std::abs(ay), eps);
            sx.pair(arc.src_inst, arc.dst_inst, arc.src_dx, arc.dst_dx, lambda * wx);
            sy.pair(arc.src_inst, arc.dst_inst, arc.src_dy, arc.dst_dy, lambda * wy);
        }
    }

    sys.ax.resize(n, n);
    sys.ay.resize(n, n);
    sys.ax.setFromTriplets(tx.begin(), tx.end());
    sys.ay.setFromTriplets(ty.begin(), ty.end());

    // A variable with nothing stamped in a dimension would make the system
    // singular; pin it at its current coordinate and report it.
    for (int v = 0; v < n; v++) {
        bool sing = false;
        if (sys.ax.coeff(v, v) == 0.0) {
            sys.ax.coeffRef(v, v) = 1.0;
            sys.bx[v] = pl.x[sys.inst_of_var[v]];
            sing = true;
        }
        if (sys.ay.coeff(v, v) == 0.0) {
            sys.ay.coeffRef(v, v) = 1.0;
            sys.by[v] = pl.y[sys.inst_of_var[v]];
            sing = true;
        }
        if (sing) sys.singular.push_back(sys.inst_of_var[v]);
    }
    sys.ax.makeCompressed();
    sys.ay.makeCompressed();
    return sys;
}

struct SolveStats {
    int iterations_x = 0, iterations_y = 0;
    double residual_x = 0, residual_y = 0;
    bool converged = true;
};

// Jacobi-preconditioned CG from the current placement; coordinates clamp to
// the die. Non-convergence keeps the best iterate and flags the stats.
inline PlacementState solve_system(const QuadraticSystem& sys, const PlacementState& init,
                                   const Device& dev, double tol, int max_iters,
                                   SolveStats* stats = nullptr) {
    int n = sys.size();
    SolveStats st;
    if (n == 0) {
        if (stats) *stats = st;
        return init;
    }
    Eigen::VectorXd gx(n), gy(n);
    for (int v = 0; v < n; v++) {
        gx[v] = init.x[sys.inst_of_var[v]];
        gy[v] = init.y[sys.inst_of_var[v]];
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(max_iters);
    cg.compute(sys.ax);
    Eigen::VectorXd x = cg.solveWithGuess(sys.bx, gx);
    st.iterations_x = static_cast<int>(cg.iterations());
    st.residual_x = cg.error();
    st.converged = cg.info() == Eigen::Success;
    cg.compute(sys.ay);
    Eigen::VectorXd y = cg.solveWithGuess(sys.by, gy);
    st.iterations_y = static_cast<int>(cg.iterations());
    st.residual_y = cg.error();
    st.converged = st.converged && cg.info() == Eigen::Success;

    PlacementState out = init;
    for (int v = 0; v < n; v++) {
        out.x[sys.inst_of_var[v]] = std::clamp(x[v], 0.0, dev.width - 1.0);
        out.y[sys.inst_of_var[v]] = std::clamp(y[v], 0.0, dev.height - 1.0);
    }
    if (stats) *stats = st;
    return out;
}

} // namespace tdp
