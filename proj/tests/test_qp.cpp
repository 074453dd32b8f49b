#include <catch2/catch_amalgamated.hpp>

#include <Eigen/SparseCholesky>
#include <random>

#include "helpers.hpp"
#include "tdp/qp.hpp"

using namespace tdp;

namespace {

constexpr double kEps = 1e-4;

double pair_energy(const std::vector<double>& pos, double eps) {
    double e = 0;
    for (const B2BPair& pr : b2b_pairs(pos, eps)) {
        double d = pos[pr.pin_a] - pos[pr.pin_b];
        e += pr.w * d * d;
    }
    return e;
}

// Devices and designs used by the assembly tests.
struct QpFixture {
    tt::Builder b;
    PlacementState pl;
    Device dev;
    std::vector<TimingArcTerm> arcs;
    std::vector<PseudoNet> pseudos;
};

// A chain of nets threaded between two fixed pads, with random side
// connections. The chain keeps every movable connected to a pad so the
// systems stay positive definite, not just semidefinite.
QpFixture random_fixture(int nets, uint64_t seed, bool with_timing) {
    QpFixture fx;
    fx.dev = tt::small_device();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(1.0, 62.0);
    std::uniform_real_distribution<double> off(-0.4, 0.4);
    std::uniform_int_distribution<int> extra(0, 2);
    int pad0 = fx.b.inst("pad0", InstanceKind::IO, true, 1.0, 1.0);
    int pad1 = fx.b.inst("pad1", InstanceKind::IO, true, 60.0, 58.0);
    std::vector<int> pool;
    for (int i = 0; i < nets; i++)
        pool.push_back(fx.b.inst("m" + std::to_string(i), InstanceKind::LUT));
    std::uniform_int_distribution<int> pick_pool(0, nets - 1);
    for (int n = 0; n < nets; n++) {
        int drv = n == 0 ? pad0 : pool[n - 1];
        std::vector<int> loads = {n == nets - 1 ? pad1 : pool[n]};
        for (int j = 0, k = extra(rng); j < k; j++) {
            int cand = pick_pool(rng);
            if (pool[cand] != drv && pool[cand] != loads[0]) loads.push_back(pool[cand]);
        }
        int net = fx.b.net("n" + std::to_string(n), drv, loads);
        // sprinkle pin offsets so the folding paths are exercised
        fx.b.nl.nets[net].driver.dx = off(rng);
        fx.b.nl.nets[net].loads[0].dy = off(rng);
    }
    fx.pl.resize(fx.b.nl.instances.size());
    for (size_t i = 0; i < fx.pl.size(); i++) {
        fx.pl.x[i] = pos(rng);
        fx.pl.y[i] = pos(rng);
    }
    fx.pl.x[pad0] = 1.0;
    fx.pl.y[pad0] = 1.0;
    fx.pl.x[pad1] = 60.0;
    fx.pl.y[pad1] = 58.0;
    if (with_timing) {
        std::uniform_int_distribution<int> pick(0, int(fx.pl.size()) - 1);
        std::uniform_real_distribution<double> wdist(0.1, 3.0);
        for (int a = 0; a < nets / 2; a++) {
            TimingArcTerm t;
            t.src_inst = pick(rng);
            do {
                t.dst_inst = pick(rng);
            } while (t.dst_inst == t.src_inst);
            t.src_dx = off(rng);
            t.dst_dy = off(rng);
            t.w = wdist(rng);
            fx.arcs.push_back(t);
        }
        for (int p = 0; p < 6; p++) {
            PseudoNet pn;
            pn.inst = pick(rng);
            pn.kind = p % 2 ? PseudoKind::Anchor : PseudoKind::ClockRegion;
            pn.tx = pos(rng);
            pn.ty = pos(rng);
            pn.weight = wdist(rng);
            fx.pseudos.push_back(pn);
        }
    }
    return fx;
}

// The quadratic objective the stamping encodes, reconstructed term by term
// with the weights frozen at the assembly placement.
double explicit_objective(const QpFixture& fx, double lambda, const PlacementState& at) {
    const Netlist& nl = fx.b.nl;
    double wl = 0, tm = 0;
    std::vector<double> px, py;
    std::vector<const PinRef*> pins;
    for (const Net& net : nl.nets) {
        if (net.pin_count() < 2) continue;
        px.clear();
        py.clear();
        pins.clear();
        pins.push_back(&net.driver);
        px.push_back(fx.pl.pin_x(net.driver));
        py.push_back(fx.pl.pin_y(net.driver));
        for (const PinRef& p : net.loads) {
            pins.push_back(&p);
            px.push_back(fx.pl.pin_x(p));
            py.push_back(fx.pl.pin_y(p));
        }
        for (const B2BPair& pr : b2b_pairs(px, kEps)) {
            double d = (at.x[pins[pr.pin_a]->inst] + pins[pr.pin_a]->dx) -
                       (at.x[pins[pr.pin_b]->inst] + pins[pr.pin_b]->dx);
            wl += pr.w * d * d;
        }
        for (const B2BPair& pr : b2b_pairs(py, kEps)) {
            double d = (at.y[pins[pr.pin_a]->inst] + pins[pr.pin_a]->dy) -
                       (at.y[pins[pr.pin_b]->inst] + pins[pr.pin_b]->dy);
            wl += pr.w * d * d;
        }
    }
    for (const PseudoNet& pn : fx.pseudos) {
        if (pn.kind == PseudoKind::Anchor) {
            double dx = at.x[pn.inst] - pn.tx, dy = at.y[pn.inst] - pn.ty;
            wl += pn.weight * (dx * dx + dy * dy);
        } else {
            double dx = at.x[pn.inst] - pn.tx;
            tm += pn.weight * dx * dx;
        }
    }
    for (const TimingArcTerm& arc : fx.arcs) {
        if (arc.w <= 0) continue;
        double ax = fx.pl.x[arc.src_inst] + arc.src_dx - fx.pl.x[arc.dst_inst] - arc.dst_dx;
        double ay = fx.pl.y[arc.src_inst] + arc.src_dy - fx.pl.y[arc.dst_inst] - arc.dst_dy;
        double dx = at.x[arc.src_inst] + arc.src_dx - at.x[arc.dst_inst] - arc.dst_dx;
        double dy = at.y[arc.src_inst] + arc.src_dy - at.y[arc.dst_inst] - arc.dst_dy;
        tm += arc.w / std::max(std::abs(ax), kEps) * dx * dx;
        tm += arc.w / std::max(std::abs(ay), kEps) * dy * dy;
    }
    return (1.0 - lambda) * wl + lambda * tm;
}

} // namespace

TEST_CASE("pair decomposition shapes", "[qp]") {
    CHECK(b2b_pairs({}, kEps).empty());
    CHECK(b2b_pairs({3.0}, kEps).empty());

    auto two = b2b_pairs({2.0, 7.0}, kEps);
    REQUIRE(two.size() == 1);
    CHECK(two[0].w == Catch::Approx(1.0 / 5.0));

    auto four = b2b_pairs({4.0, 1.0, 9.0, 6.0}, kEps);
    CHECK(four.size() == 5); // boundary pair + two connections per inner pin

    // fully coincident pins fall back to an arbitrary boundary pair
    auto flat = b2b_pairs({5.0, 5.0, 5.0}, kEps);
    REQUIRE(flat.size() == 3);
    CHECK(flat[0].w == Catch::Approx(1.0 / (2.0 * kEps)));
}

TEST_CASE("pair energy reproduces the net span exactly", "[qp]") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> pos(0.0, 100.0);
    std::uniform_int_distribution<int> pins(3, 20);
    for (int t = 0; t < 200; t++) {
        std::vector<double> p(pins(rng));
        for (double& v : p) v = pos(rng);
        double span = *std::max_element(p.begin(), p.end()) -
                      *std::min_element(p.begin(), p.end());
        CHECK(pair_energy(p, kEps) == Catch::Approx(span).epsilon(1e-9));
    }
    // two pins: w * d^2 = d
    CHECK(pair_energy({2.0, 7.0}, kEps) == Catch::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("mean connection weight pools both dimensions", "[qp]") {
    tt::Builder b;
    int a = b.inst("a", InstanceKind::LUT);
    int c = b.inst("c", InstanceKind::FF);
    b.net("n", a, {c});
    PlacementState pl;
    pl.resize(2);
    pl.x = {0.0, 2.0};
    pl.y = {0.0, 4.0};
    CHECK(mean_b2b_weight(b.nl, pl, kEps) == Catch::Approx((0.5 + 0.25) / 2.0));

    Netlist empty;
    PlacementState ep;
    CHECK(mean_b2b_weight(empty, ep, kEps) == 0.0);
}

TEST_CASE("one movable between two pads lands at the weighted mean", "[qp]") {
    for (double start : {5.0, 2.0, 8.5}) {
        tt::Builder b;
        int p0 = b.inst("p0", InstanceKind::IO, true, 0.0, 3.0);
        int p1 = b.inst("p1", InstanceKind::IO, true, 10.0, 3.0);
        int m = b.inst("m", InstanceKind::LUT);
        b.net("n0", p0, {m});
        b.net("n1", m, {p1});
        PlacementState pl;
        pl.resize(3);
        pl.x = {0.0, 10.0, start};
        pl.y = {3.0, 3.0, 3.0};

        QuadraticSystem sys = assemble_system(b.nl, pl, {}, {}, 0.0, kEps);
        REQUIRE(sys.size() == 1);
        CHECK(sys.var_of_inst[p0] == -1);
        CHECK(sys.var_of_inst[p1] == -1);
        CHECK(sys.var_of_inst[m] == 0);

        double w0 = 1.0 / std::max(start, kEps);
        double w1 = 1.0 / std::max(10.0 - start, kEps);
        double expect = (w0 * 0.0 + w1 * 10.0) / (w0 + w1);

        Device dev = tt::small_device();
        SolveStats st;
        PlacementState out = solve_system(sys, pl, dev, 1e-12, 500, &st);
        CHECK(st.converged);
        CHECK(out.x[m] == Catch::Approx(expect).margin(1e-9));
        CHECK(out.y[m] == Catch::Approx(3.0).margin(1e-9));
        CHECK(out.x[p0] == 0.0); // fixed never move
    }
}

TEST_CASE("gradient of the stamped system matches the explicit objective", "[qp]") {
    QpFixture fx = random_fixture(30, 3, true);
    for (double lambda : {0.0, 0.35, 1.0}) {
        QuadraticSystem sys = assemble_system(fx.b.nl, fx.pl, fx.arcs, fx.pseudos, lambda, kEps);

        // evaluate away from the assembly point; the quadratic model is frozen
        PlacementState at = fx.pl;
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> nudge(-2.0, 2.0);
        for (int v = 0; v < sys.size(); v++) {
            at.x[sys.inst_of_var[v]] += nudge(rng);
            at.y[sys.inst_of_var[v]] += nudge(rng);
        }

        Eigen::VectorXd vx(sys.size()), vy(sys.size());
        for (int v = 0; v < sys.size(); v++) {
            vx[v] = at.x[sys.inst_of_var[v]];
            vy[v] = at.y[sys.inst_of_var[v]];
        }
        Eigen::VectorXd gx = 2.0 * (sys.ax * vx - sys.bx);
        Eigen::VectorXd gy = 2.0 * (sys.ay * vy - sys.by);

        const double h = 1e-6;
        for (int v = 0; v < sys.size(); v += 3) {
            int inst = sys.inst_of_var[v];
            if (std::count(sys.singular.begin(), sys.singular.end(), inst)) continue;
            double keep = at.x[inst];
            at.x[inst] = keep + h;
            double up = explicit_objective(fx, lambda, at);
            at.x[inst] = keep - h;
            double dn = explicit_objective(fx, lambda, at);
            at.x[inst] = keep;
            double fd = (up - dn) / (2 * h);
            CHECK(gx[v] == Catch::Approx(fd).margin(1e-4 + 1e-5 * std::abs(fd)));

            keep = at.y[inst];
            at.y[inst] = keep + h;
            up = explicit_objective(fx, lambda, at);
            at.y[inst] = keep - h;
            dn = explicit_objective(fx, lambda, at);
            at.y[inst] = keep;
            fd = (up - dn) / (2 * h);
            CHECK(gy[v] == Catch::Approx(fd).margin(1e-4 + 1e-5 * std::abs(fd)));
        }
    }
}

TEST_CASE("lambda zero never reads the timing inputs", "[qp]") {
    QpFixture fx = random_fixture(25, 9, true);
    std::vector<PseudoNet> anchors_only;
    for (const PseudoNet& pn : fx.pseudos)
        if (pn.kind == PseudoKind::Anchor) anchors_only.push_back(pn);

    QuadraticSystem with = assemble_system(fx.b.nl, fx.pl, fx.arcs, fx.pseudos, 0.0, kEps);
    QuadraticSystem without = assemble_system(fx.b.nl, fx.pl, {}, anchors_only, 0.0, kEps);

    REQUIRE(with.size() == without.size());
    CHECK((with.bx - without.bx).cwiseAbs().maxCoeff() == 0.0);
    CHECK((with.by - without.by).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SparseMatrix<double> dx = with.ax - without.ax;
    Eigen::SparseMatrix<double> dy = with.ay - without.ay;
    CHECK(dx.norm() == 0.0);
    CHECK(dy.norm() == 0.0);
}

TEST_CASE("stamped matrices are symmetric positive definite", "[qp]") {
    for (uint64_t seed : {1, 2, 3, 4, 5}) {
        QpFixture fx = random_fixture(40, seed, true);
        QuadraticSystem sys = assemble_system(fx.b.nl, fx.pl, fx.arcs, fx.pseudos, 0.4, kEps);

        Eigen::SparseMatrix<double> sx = Eigen::SparseMatrix<double>(sys.ax.transpose()) - sys.ax;
        Eigen::SparseMatrix<double> sy = Eigen::SparseMatrix<double>(sys.ay.transpose()) - sys.ay;
        CHECK(sx.norm() == 0.0);
        CHECK(sy.norm() == 0.0);

        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
        llt.compute(sys.ax);
        CHECK(llt.info() == Eigen::Success);
        llt.compute(sys.ay);
        CHECK(llt.info() == Eigen::Success);

        // CG against the direct factorization
        Device dev = fx.dev;
        SolveStats st;
        PlacementState out = solve_system(sys, fx.pl, dev, 1e-8, 500, &st);
        CHECK(st.converged);
        Eigen::VectorXd direct_x = llt.solve(sys.by);
        Eigen::VectorXd got(sys.size());
        for (int v = 0; v < sys.size(); v++) got[v] = out.y[sys.inst_of_var[v]];
        // compare unclamped interior entries
        for (int v = 0; v < sys.size(); v++)
            if (got[v] > 0.0 && got[v] < dev.height - 1.0)
                CHECK(got[v] == Catch::Approx(direct_x[v]).margin(1e-5));
    }
}

TEST_CASE("solver residual meets tolerance and clamps to the die", "[qp]") {
    QpFixture fx = random_fixture(60, 31, false);
    QuadraticSystem sys = assemble_system(fx.b.nl, fx.pl, {}, {}, 0.0, kEps);
    SolveStats st;
    PlacementState out = solve_system(sys, fx.pl, fx.dev, 1e-6, 500, &st);
    REQUIRE(st.converged);

    Eigen::VectorXd x(sys.size());
    for (int v = 0; v < sys.size(); v++) x[v] = out.x[sys.inst_of_var[v]];
    // residual check only holds where the clamp did not bite
    bool clamped = false;
    for (int v = 0; v < sys.size(); v++)
        clamped |= x[v] <= 0.0 || x[v] >= fx.dev.width - 1.0;
    if (!clamped) {
        double rel = (sys.ax * x - sys.bx).norm() / sys.bx.norm();
        CHECK(rel <= 1e-5);
    }
    CHECK(st.iterations_x > 0);

    // a heavy anchor outside the die clamps to the boundary
    tt::Builder b;
    int pad = b.inst("p", InstanceKind::IO, true, 1.0, 1.0);
    int m = b.inst("m", InstanceKind::LUT);
    b.net("n", pad, {m});
    PlacementState pl;
    pl.resize(2);
    pl.x = {1.0, 5.0};
    pl.y = {1.0, 5.0};
    std::vector<PseudoNet> pn = {{m, PseudoKind::Anchor, 500.0, -40.0, 100.0}};
    QuadraticSystem s2 = assemble_system(b.nl, pl, {}, pn, 0.0, kEps);
    PlacementState o2 = solve_system(s2, pl, fx.dev, 1e-9, 500);
    CHECK(o2.x[m] == fx.dev.width - 1.0);
    CHECK(o2.y[m] == 0.0);
}

TEST_CASE("disconnected movables are pinned and reported", "[qp]") {
    tt::Builder b;
    int a = b.inst("a", InstanceKind::LUT);
    int c = b.inst("c", InstanceKind::FF);
    int loner = b.inst("loner", InstanceKind::LUT);
    b.net("n", a, {c});
    PlacementState pl;
    pl.resize(3);
    pl.x = {1.0, 2.0, 7.5};
    pl.y = {1.0, 2.0, 8.5};
    QuadraticSystem sys = assemble_system(b.nl, pl, {}, {}, 0.0, kEps);
    REQUIRE(sys.singular.size() == 1);
    CHECK(sys.singular[0] == loner);

    Device dev = tt::small_device();
    PlacementState out = solve_system(sys, pl, dev, 1e-9, 500);
    CHECK(out.x[loner] == 7.5);
    CHECK(out.y[loner] == 8.5);
}

TEST_CASE("assembly rejects bad inputs", "[qp]") {
    QpFixture fx = random_fixture(5, 51, false);
    REQUIRE_THROWS_AS(assemble_system(fx.b.nl, fx.pl, {}, {}, -0.1, kEps), ValidationError);
    REQUIRE_THROWS_AS(assemble_system(fx.b.nl, fx.pl, {}, {}, 1.5, kEps), ValidationError);
    std::vector<PseudoNet> bad = {{0, PseudoKind::Anchor, 1.0, 1.0, 0.0}};
    REQUIRE_THROWS_AS(assemble_system(fx.b.nl, fx.pl, {}, bad, 0.0, kEps), ValidationError);
}

TEST_CASE("empty system solves to the input placement", "[qp]") {
    tt::Builder b;
    b.inst("p", InstanceKind::IO, true, 2.0, 3.0);
    PlacementState pl;
    pl.resize(1);
    pl.x = {2.0};
    pl.y = {3.0};
    QuadraticSystem sys = assemble_system(b.nl, pl, {}, {}, 0.0, kEps);
    CHECK(sys.size() == 0);
    SolveStats st;
    PlacementState out = solve_system(sys, pl, tt::small_device(), 1e-9, 100, &st);
    CHECK(out.x == pl.x);
    CHECK(st.converged);
}
