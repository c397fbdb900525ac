#include <doctest.h>

#include <cmath>

#include "core/dual_curvature.hpp"
#include "core/gauss_integrals.hpp"

using namespace fdm;

namespace {

const Scheme kScheme = Scheme::parse("hermite:64", 0);
const double kHalfMoment = 0.3989422804014327;  // 1/sqrt(2 pi)

MaxAffine abs_ma() { return MaxAffine(1, {{{-1.0}, 0.0}, {{1.0}, 0.0}}); }

DiscreteMeasure to_measure(const EmpiricalMeasure& e) { return cluster_empirical(e); }

}  // namespace

TEST_CASE("cells of max-affine functions") {
    const CellDecomposition c1 = cells_of_max_affine(abs_ma());
    CHECK(c1.envelope.breakpoints == Vec{0.0});
    CHECK(c1.envelope.active_piece == std::vector<int>{0, 1});
    CHECK(c1.piece_active == std::vector<bool>{true, true});

    const MaxAffine h2(1, {{{-1.0}, 1.0}, {{1.0}, 1.0}});
    const CellDecomposition c2 = cells_of_max_affine(h2);
    CHECK(c2.envelope.breakpoints == Vec{0.0});
    CHECK(c2.piece_active == std::vector<bool>{true, true});

    // duplicate slope merged upstream: a single cell remains
    const MaxAffine h3(1, {{{1.0}, 0.0}, {{1.0}, 1.0}});
    CHECK(h3.pieces().size() == 1);
    const CellDecomposition c3 = cells_of_max_affine(h3);
    CHECK(c3.envelope.active_piece == std::vector<int>{0});

    // 2D: redundant piece detection through the LP probe
    const MaxAffine h4(2, {{{1.0, 0.0}, 0.0},
                           {{-1.0, 0.0}, 0.0},
                           {{0.0, 1.0}, 0.0},
                           {{0.0, -1.0}, 0.0},
                           {{0.0, 0.0}, 1.0}});  // constant -1 piece never wins
    const CellDecomposition c4 = cells_of_max_affine(h4);
    CHECK(c4.piece_active == std::vector<bool>{true, true, true, true, false});
}

TEST_CASE("semidiscrete dual curvature of |y|") {
    const MaxAffine h = abs_ma();
    // q = 0: gaussian halves
    const DiscreteMeasure m0 = dual_curvature_semidiscrete(h, 0.0, kScheme);
    REQUIRE(m0.atoms.size() == 2);
    CHECK(m0.atoms[0].location[0] == -1.0);
    CHECK(m0.atoms[0].weight == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m0.atoms[1].weight == doctest::Approx(0.5).epsilon(1e-12));
    // q = -1: half-gaussian first moment 1/sqrt(2 pi) per atom
    const DiscreteMeasure m1 = dual_curvature_semidiscrete(h, -1.0, kScheme);
    CHECK(m1.atoms[0].weight == doctest::Approx(kHalfMoment).epsilon(1e-9));
    CHECK(m1.atoms[1].weight == doctest::Approx(kHalfMoment).epsilon(1e-9));

    // asymmetric gauge max(-y, 2y): breakpoint still at 0
    const MaxAffine g(1, {{{-1.0}, 0.0}, {{2.0}, 0.0}});
    const DiscreteMeasure mg = dual_curvature_semidiscrete(g, 0.0, kScheme);
    REQUIRE(mg.atoms.size() == 2);
    CHECK(mg.atoms[0].weight == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mg.atoms[1].location[0] == 2.0);
}

TEST_CASE("mass conservation: total curvature mass equals the quermassintegral") {
    const std::vector<MaxAffine> battery = {
        abs_ma(),
        MaxAffine(1, {{{-1.0}, 0.0}, {{2.0}, 0.0}}),
        MaxAffine(1, {{{-2.0}, -0.5}, {{-0.5}, 0.0}, {{1.0}, 0.0}, {{3.0}, 1.0}}),
        MaxAffine(1, {{{0.0}, -0.3}, {{1.0}, 0.0}, {{-1.0}, 0.0}}),
    };
    const Scheme mc = Scheme::parse("mc:200000", 23);
    for (const auto& h : battery) {
        for (double q : {0.0, -1.0, -2.0}) {
            const DiscreteMeasure m = dual_curvature_semidiscrete(h, q, kScheme);
            double total = 0.0;
            for (const auto& a : m.atoms) total += a.weight;
            const auto hp = std::make_shared<MaxAffine>(h);
            const IntegralResult w = dual_quermassintegral(hp, q, mc);
            CHECK(std::abs(total - w.value) <= std::max(3.0 * w.stderr_est, 1e-10));
        }
    }
}

TEST_CASE("2D semidiscrete masses: cross gauge against closed forms") {
    // gauge of the square: max(|x|,|y|); at q = 0 each of the 4 cells is a
    // quarter plane rotated 45 degrees: mass 1/4 by symmetry
    const MaxAffine cross(2, {{{1.0, 0.0}, 0.0},
                              {{-1.0, 0.0}, 0.0},
                              {{0.0, 1.0}, 0.0},
                              {{0.0, -1.0}, 0.0}});
    const DiscreteMeasure m = dual_curvature_semidiscrete(cross, 0.0, kScheme);
    REQUIRE(m.atoms.size() == 4);
    for (const auto& a : m.atoms) CHECK(a.weight == doctest::Approx(0.25).epsilon(1e-10));

    // against the sampled oracle at q = -1
    const DiscreteMeasure exact = dual_curvature_semidiscrete(cross, -1.0, kScheme);
    const Scheme mc = Scheme::parse("mc:200000", 29);
    const CellIntegrals sampled = cell_power_integrals_sampled(cross, 1.0, mc);
    for (size_t i = 0; i < 4; ++i)
        CHECK(std::abs(exact.atoms[i].weight - sampled.per_cell[i]) <=
              4.0 * sampled.stderr_est + 1e-6);
}

TEST_CASE("empirical pushforward") {
    // f = x^2/2, q = 0: the image of gamma under the identity map
    const auto f = std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0));
    const EmpiricalMeasure e = dual_curvature_empirical(f, 0.0, 100000, 7);
    CHECK(e.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    double mean = 0.0, var = 0.0;
    for (const auto& s : e.samples) mean += s.weight * s.location[0];
    for (const auto& s : e.samples) var += s.weight * s.location[0] * s.location[0];
    var -= mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);

    // max-affine image lands exactly on the slopes
    const auto h = std::make_shared<MaxAffine>(abs_ma());
    const EmpiricalMeasure eh = dual_curvature_empirical(h, 0.0, 10000, 3);
    const DiscreteMeasure clustered = to_measure(eh);
    REQUIRE(clustered.atoms.size() == 2);
    for (const auto& a : clustered.atoms) CHECK(std::abs(a.weight - 0.5) < 0.02);

    // determinism for a fixed seed
    const EmpiricalMeasure eh2 = dual_curvature_empirical(h, 0.0, 10000, 3);
    CHECK(eh2.samples[123].location[0] == eh.samples[123].location[0]);
}

TEST_CASE("empirical converges to semidiscrete at the sampling rate") {
    const MaxAffine h(1, {{{-1.0}, 0.0}, {{2.0}, 0.3}});
    const DiscreteMeasure exact = dual_curvature_semidiscrete(h, -1.0, kScheme);
    const auto hp = std::make_shared<MaxAffine>(h);
    Vec errors;
    for (long long n : {1000LL, 10000LL, 100000LL}) {
        const DiscreteMeasure emp = to_measure(dual_curvature_empirical(hp, -1.0, n, 41));
        errors.push_back(tv_distance(exact, emp, 1e-9));
    }
    // rate consistent with n^{-1/2}: errors shrink and stay inside a C/sqrt(n) cone
    CHECK(errors[2] < errors[0]);
    const double c = std::max(errors[0] * std::sqrt(1000.0), 1.0);
    for (size_t i = 0; i < errors.size(); ++i) {
        const double n = std::pow(10.0, 3.0 + static_cast<double>(i));
        CHECK(errors[i] <= 5.0 * c / std::sqrt(n));
    }
}

TEST_CASE("pushforward change of variables for a smooth grid function") {
    // grid carrier of x^2/2: integral tanh(z) dC_q vs quadrature of
    // tanh(grad f) f^{-q} dgamma
    const auto quad = std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0));
    const auto grid = std::make_shared<GridFunction>(
        GridFunction::sample(*quad, {-16.0}, {16.0}, {1281}));
    const double q = -1.0;
    const EmpiricalMeasure e = dual_curvature_empirical(grid, q, 200000, 13);
    double emp = 0.0;
    for (const auto& s : e.samples) emp += s.weight * std::tanh(s.location[0]);
    const IntegralResult direct = gauss_expectation(1, kScheme, [&](std::span<const double> x) {
        const double fx = 0.5 * x[0] * x[0];
        return std::tanh(x[0]) * fx;
    });
    CHECK(std::abs(emp - direct.value) < 0.01);
}

TEST_CASE("body bridge identity") {
    // unit disc via the 512-gon: closed forms 1 (q=0) and 2 (q=-2)
    const MaxAffine disc = gauge_from_polar_vertices(2, regular_polygon_vertices(512));
    const BridgeResult b0 = body_bridge_check(disc, 0.0);
    CHECK(b0.lhs == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(b0.rhs == doctest::Approx(1.0).epsilon(1e-6));
    const BridgeResult b2 = body_bridge_check(disc, -2.0);
    CHECK(b2.lhs == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(b2.rhs == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(std::abs(b2.lhs - b2.rhs) < 1e-3);

    // regular 12-gon: the identity itself at q in {0,-1}
    const MaxAffine twelve = gauge_from_polar_vertices(2, regular_polygon_vertices(12));
    for (double q : {0.0, -1.0}) {
        const BridgeResult b = body_bridge_check(twelve, q);
        CHECK(std::abs(b.lhs - b.rhs) < 1e-3);
    }

    // segment [-1,1] in 1D at q = 0: both sides 1
    const MaxAffine seg = gauge_from_polar_vertices(1, {{1.0}, {-1.0}});
    const BridgeResult bs = body_bridge_check(seg, 0.0);
    CHECK(bs.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bs.rhs == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("valuation identity, exact 1D path") {
    const auto f = std::make_shared<MaxAffine>(
        MaxAffine(1, {{{-1.0}, 0.0}, {{2.0}, 0.0}}));
    const auto g = std::make_shared<MaxAffine>(
        MaxAffine(1, {{{-2.0}, 0.0}, {{1.0}, 0.0}}));
    const ValuationReport rep = valuation_check(f, g, 0.0, kScheme);
    CHECK(rep.exact_path);
    CHECK(rep.max_discrepancy <= 1e-12);
    CHECK(rep.pass);

    // f = g: both sides are 2 C(f)
    const ValuationReport same = valuation_check(f, f, -1.0, kScheme);
    CHECK(same.pass);

    // |x| and |x|+1 share the gradient field: equality is exact
    const auto a0 = std::make_shared<MaxAffine>(abs_ma());
    const auto a1 = std::make_shared<MaxAffine>(
        MaxAffine(1, {{{-1.0}, -1.0}, {{1.0}, -1.0}}));
    const ValuationReport shifted = valuation_check(a0, a1, 0.0, kScheme);
    CHECK(shifted.exact_path);
    CHECK(shifted.max_discrepancy <= 1e-12);

    // min not convex: swapped slopes
    const auto bad1 = std::make_shared<MaxAffine>(
        MaxAffine(1, {{{-2.0}, 0.0}, {{2.0}, 0.0}}));
    const auto bad2 = std::make_shared<MaxAffine>(
        MaxAffine(1, {{{-1.0}, -0.5}, {{1.0}, -0.5}}));
    CHECK_THROWS_AS((void)valuation_check(bad1, bad2, 0.0, kScheme), FdmError);
}

TEST_CASE("valuation identity, dictionary path on grids") {
    const auto qa = std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0));
    const auto qb = std::make_shared<Quadratic>(Quadratic::isotropic(1, 2.0));
    const auto ga = std::make_shared<GridFunction>(
        GridFunction::sample(*qa, {-16.0}, {16.0}, {641}));
    const auto gb = std::make_shared<GridFunction>(
        GridFunction::sample(*qb, {-16.0}, {16.0}, {641}));
    const ValuationReport rep = valuation_check(ga, gb, 0.0, kScheme);
    CHECK(!rep.exact_path);
    CHECK(rep.pass);
}

TEST_CASE("hyperplane support test") {
    DiscreteMeasure line;
    line.dim = 2;
    line.atoms = {{{1.0, 0.0}, 1.0}, {{-1.0, 0.0}, 1.0}};
    CHECK(hyperplane_support_test(line).degenerate);

    DiscreteMeasure tri;
    tri.dim = 2;
    tri.atoms = {{{1.0, 0.0}, 1.0}, {{0.0, 1.0}, 1.0}, {{-1.0, -1.0}, 1.0}};
    const SupportTest st = hyperplane_support_test(tri);
    CHECK(!st.degenerate);
    CHECK(st.sigma == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-9));

    const DiscreteMeasure c0 = dual_curvature_semidiscrete(abs_ma(), 0.0, kScheme);
    CHECK(!hyperplane_support_test(c0).degenerate);
}

TEST_CASE("tv distance on matched atoms") {
    DiscreteMeasure a, b;
    a.dim = b.dim = 1;
    a.atoms = {{{-1.0}, 0.5}, {{1.0}, 0.5}};
    b.atoms = {{{1.0}, 0.3}, {{-1.0}, 0.5}};
    CHECK(tv_distance(a, b) == doctest::Approx(0.1));
    DiscreteMeasure c;
    c.dim = 1;
    c.atoms = {{{2.0}, 1.0}};
    CHECK(tv_distance(a, c) == doctest::Approx(1.0));
}
