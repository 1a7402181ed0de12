#include "qdet/fredholm.hpp"

#include "qdet/kernel.hpp"
#include "qdet/model.hpp"

#include <doctest.h>

#include <cmath>

using namespace qdet;

namespace {

ProblemSpec fig1_spec() {
    std::vector<double> probs(3, 1.0 / 3.0);
    return ProblemSpec(3, 1.0, 1.0, 1.0, 0.0, build_family(3, 2, probs));
}

// small elliptic fixture (n=2, k=1): cheap converged boundary for tests
struct Fixture {
    ProblemSpec spec;
    BoundaryGrid grid;
    SolveReport report;
};

const Fixture& small_fixture() {
    static Fixture fx = [] {
        std::vector<double> half(2, 0.5);
        ProblemSpec spec(2, 1.0, 1.0, 1.0, 0.0, build_family(2, 1, half));
        PicardConfig pc;
        pc.nodes_per_axis = 15;
        pc.max_sweeps = 30;
        McConfig mc;
        mc.samples = 8000;
        mc.seed = 2024;
        auto [grid, report] = picard_solve(spec, pc, mc);
        return Fixture{std::move(spec), std::move(grid), report};
    }();
    return fx;
}

BoundaryGrid huge_boundary(int N) {
    // indicator permanently open: threshold far above any reachable value
    BoundaryGrid g;
    for (int d = 0; d < N - 1; ++d) g.axes.push_back({0.0, 1e8});
    g.phi_star.assign(N, 1e30);
    g.values.assign(g.node_count(), 1e300);
    return g;
}

}  // namespace

TEST_CASE("kernel_K at t = 0 is deterministic") {
    const ProblemSpec spec = fig1_spec();
    BoundaryGrid zero;
    zero.axes = {{0.0, 10.0}, {0.0, 10.0}};
    zero.phi_star = {8.0, 8.0, 8.0};
    zero.values.assign(4, 2.0);

    // phi_N above the threshold: indicator closed, estimate exactly 0
    std::vector<double> above = {0.5, 0.5, 3.0};
    const auto closed = kernel_K(spec, zero, 0.0, above, 100, 1);
    CHECK(closed.value == 0.0);
    CHECK(closed.se == 0.0);

    // phi strictly below: exactly L(phi) with zero stderr
    std::vector<double> below = {0.5, 0.5, 1.0};
    const auto open = kernel_K(spec, zero, 0.0, below, 100, 1);
    CHECK(open.value == doctest::Approx(running_cost(spec, below)));
    CHECK(open.se == 0.0);
}

TEST_CASE("kernel_K with an open indicator matches the mean-flow identity") {
    const ProblemSpec spec = fig1_spec();
    const BoundaryGrid open = huge_boundary(3);
    std::vector<double> phi = {0.2, 0.5, 1.0};
    const double t = 0.5;
    const auto est = kernel_K(spec, open, t, phi, 40000, 31);
    double expect = -spec.lambda / spec.c;
    for (int i = 0; i < 3; ++i)
        expect += spec.family.probs[i] * ((1.0 + phi[i]) * std::exp(spec.lambda * t) - 1.0);
    CHECK(std::fabs(est.value - expect) <= 3.0 * est.se);
    CHECK(est.se > 0.0);
}

TEST_CASE("fredholm_lhs vanishes when the continuation slab is empty") {
    const ProblemSpec spec = fig1_spec();
    BoundaryGrid closed;
    closed.axes = {{0.0, 10.0}, {0.0, 10.0}};
    closed.phi_star = {8.0, 8.0, 8.0};
    closed.values.assign(4, 0.0);  // b == 0: region below it is empty

    QuadConfig quad;
    McConfig mc;
    mc.samples = 2000;
    mc.seed = 5;
    FredholmEngine engine(spec, quad, mc, 2);
    std::vector<double> node = {0.5, 0.5};
    const auto est = engine.fredholm_lhs(closed, node, 0.7);
    CHECK(est.value == 0.0);
    CHECK(est.se == 0.0);
}

TEST_CASE("fredholm_lhs is strictly negative deep in the simplex") {
    const ProblemSpec spec = fig1_spec();
    QuadConfig quad;
    McConfig mc;
    mc.samples = 8000;
    mc.seed = 7;
    FredholmEngine engine(spec, quad, mc, 2);

    // start well below the simplex plane, boundary at the upper plane
    const auto phi_star = engine.phi_star();
    BoundaryGrid up = make_boundary_grid(spec, 9, phi_star);
    BoundSurfaces bs;
    bs.p = spec.family.probs;
    bs.phi_star = phi_star;
    bs.lambda = spec.lambda;
    bs.c = spec.c;
    std::vector<double> coords;
    for (size_t f = 0; f < up.node_count(); ++f) {
        up.node_coords(f, coords);
        up.values[f] = bs.upper(coords);
    }
    std::vector<double> node = {0.1, 0.1};
    const auto est = engine.fredholm_lhs(up, node, 0.1);
    CHECK(est.value < -3.0 * est.se);
}

TEST_CASE("one-dimensional picard solve matches the scalar root") {
    // single-subset family: the boundary grid is a scalar and must agree
    // with the one-dimensional boundary equation root
    ProblemSpec spec(3, 1.0, 1.0, 1.0, 0.0, build_general_family(3, {{{1, 2}, 1.0}}));
    PicardConfig pc;
    pc.max_sweeps = 30;
    McConfig mc;
    mc.samples = 40000;
    mc.seed = 99;
    auto [grid, report] = picard_solve(spec, pc, mc);
    REQUIRE(grid.dims() == 0);
    const double root = phi_star_all(spec)[0];
    CHECK(grid.values[0] == doctest::Approx(root).epsilon(0.02));
    CHECK(report.converged);
}

TEST_CASE("small fixture: solve converges with a sandwiched monotone surface") {
    const Fixture& fx = small_fixture();
    CHECK(fx.report.converged);
    CHECK(fx.grid.is_monotone());

    BoundSurfaces bs;
    bs.p = fx.spec.family.probs;
    bs.phi_star = fx.grid.phi_star;
    bs.lambda = fx.spec.lambda;
    bs.c = fx.spec.c;
    std::vector<double> coords;
    for (size_t f = 0; f < fx.grid.node_count(); ++f) {
        fx.grid.node_coords(f, coords);
        CHECK(fx.grid.values[f] >= bs.lower(coords) - 1e-9);
        CHECK(fx.grid.values[f] <= bs.upper(coords) + 1e-9);
    }

    // residual pass: every node within 5 fresh standard errors
    for (size_t f = 0; f < fx.grid.node_count(); ++f)
        CHECK(std::fabs(fx.grid.residual[f]) <= 5.0 * fx.grid.stderr_[f] + 1e-12);
}

TEST_CASE("value function: bounds, monotonicity, boundary zero") {
    const Fixture& fx = small_fixture();
    QuadConfig quad;
    McConfig mc;
    mc.samples = 8000;
    mc.seed = 77;
    FredholmEngine engine(fx.spec, quad, mc, std::vector<double>(fx.grid.phi_star), 2);

    // range bound -1/c <= V <= 0 within noise at scattered points
    uint64_t state = 1;
    auto nextu = [&state]() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> phi = {nextu() * 5.0, nextu() * 5.0};
        const auto v = engine.value_hat(fx.grid, phi);
        CHECK(v.value <= 3.0 * v.se);
        CHECK(v.value >= -1.0 / fx.spec.c - 3.0 * v.se);
    }

    // monotone in the componentwise order
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> lo = {nextu() * 2.0, nextu() * 2.0};
        std::vector<double> hi = {lo[0] + nextu() * 2.0, lo[1] + nextu() * 2.0};
        const auto vlo = engine.value_hat(fx.grid, lo);
        const auto vhi = engine.value_hat(fx.grid, hi);
        CHECK(vlo.value <= vhi.value + 3.0 * std::sqrt(vlo.se * vlo.se + vhi.se * vhi.se));
    }

    // approximately zero on the boundary itself
    std::vector<double> node = {fx.grid.axes[0][5]};
    const auto von = engine.fredholm_lhs(fx.grid, node, fx.grid.eval(node));
    CHECK(std::fabs(von.value) <= 5.0 * von.se + 1e-12);

    // value_initial: zero at pi = 1, never worse than stopping immediately
    CHECK(value_initial(engine, fx.grid, 1.0).value == 0.0);
    for (double pi : {0.0, 0.25, 0.5}) {
        const auto v = value_initial(engine, fx.grid, pi);
        CHECK(v.value <= 1.0 - pi + 3.0 * v.se);
        CHECK(v.value >= 0.0 - 3.0 * v.se);
    }
}

TEST_CASE("residual responds with the right sign to a raised boundary") {
    const Fixture& fx = small_fixture();
    BoundaryGrid bumped = fx.grid;
    // raise a node carrying a substantial boundary value
    const double target = 0.5 * bumped.values[0];
    size_t mid = 0;
    for (size_t f = 0; f < bumped.node_count(); ++f)
        if (std::fabs(bumped.values[f] - target) < std::fabs(bumped.values[mid] - target))
            mid = f;
    bumped.values[mid] *= 1.10;

    McConfig mc;
    mc.samples = 20000;
    mc.seed = 4242;
    QuadConfig quad;
    ResidualSummary rs = residual_report(fx.spec, bumped, mc, quad, 2);
    (void)rs;
    // starting on a boundary raised above the true one, the collected running
    // cost is positive: the residual flags the node from above
    CHECK(bumped.residual[mid] > 3.0 * bumped.stderr_[mid]);
}
