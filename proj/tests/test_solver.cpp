#include <doctest.h>

#include <cmath>

#include "core/rng.hpp"
#include "core/solver.hpp"

using namespace fdm;

namespace {

DiscreteMeasure two_atoms() {
    DiscreteMeasure mu;
    mu.dim = 1;
    mu.atoms = {{{-1.0}, 0.5}, {{1.0}, 0.5}};
    return mu;
}

DiscreteMeasure three_atoms_2d() {
    DiscreteMeasure mu;
    mu.dim = 2;
    const double deg = M_PI / 180.0;
    for (double angle : {90.0, 210.0, 330.0})
        mu.atoms.push_back({{std::cos(angle * deg), std::sin(angle * deg)}, 1.0 / 3.0});
    return mu;
}

DiscreteMeasure four_atoms_asym() {
    DiscreteMeasure mu;
    mu.dim = 1;
    mu.atoms = {{{-1.5}, 0.35}, {{-0.5}, 0.15}, {{0.8}, 0.3}, {{2.0}, 0.2}};
    return mu;
}

SolverOptions default_opts(double q) {
    SolverOptions o;
    o.q = q;
    o.tol = 1e-10;
    return o;
}

const double kWbarAbs = std::sqrt(2.0 / M_PI);  // E|y|

}  // namespace

TEST_CASE("measure validation") {
    CHECK_NOTHROW(validate_measure(two_atoms()));

    DiscreteMeasure line;
    line.dim = 2;
    line.atoms = {{{1.0, 0.0}, 1.0}, {{-1.0, 0.0}, 1.0}};
    CHECK_THROWS_WITH_AS(validate_measure(line),
                         doctest::Contains("SupportDegenerate"), FdmError);

    DiscreteMeasure zero_weight = two_atoms();
    zero_weight.atoms[0].weight = 0.0;
    CHECK_THROWS_AS(validate_measure(zero_weight), FdmError);

    DiscreteMeasure empty;
    empty.dim = 1;
    CHECK_THROWS_WITH_AS(validate_measure(empty), doctest::Contains("EmptyMeasure"), FdmError);
}

TEST_CASE("objective closed forms on the symmetric two-atom instance") {
    const DiscreteMeasure mu = two_atoms();
    const SolverOptions opts = default_opts(0.0);
    // v = (0,0): h = |y|, Wbar = E|y|, f(+-1) = 0
    const double at0 = solver_objective(mu, 0.0, {0.0, 0.0}, opts);
    CHECK(at0 == doctest::Approx(-std::exp(-kWbarAbs)).epsilon(1e-10));
    // v = (1,1): h = |y| - 1 normalizes to |y|; f(+-1) = 1
    const double at1 = solver_objective(mu, 0.0, {1.0, 1.0}, opts);
    CHECK(at1 == doctest::Approx(1.0 - std::exp(-kWbarAbs)).epsilon(1e-10));
    CHECK(at1 > at0);

    // atoms not surrounding the origin: unbounded below
    DiscreteMeasure oneside;
    oneside.dim = 1;
    oneside.atoms = {{{1.0}, 0.5}, {{2.0}, 0.5}};
    CHECK_THROWS_WITH_AS((void)solver_objective(oneside, 0.0, {0.0, 0.0}, opts),
                         doctest::Contains("UnboundedBelow"), FdmError);
}

TEST_CASE("objective gradient closed form at the symmetric point") {
    const DiscreteMeasure mu = two_atoms();
    const SolverOptions opts = default_opts(0.0);
    const Vec g = solver_objective_gradient(mu, 0.0, {0.0, 0.0}, opts);
    const double expect = 0.5 - std::exp(-kWbarAbs) * 0.5;
    CHECK(g[0] == doctest::Approx(expect).epsilon(1e-10));
    CHECK(g[1] == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("analytic gradient matches central differences of the raw objective") {
    // The analytic formula is the gradient of the raw objective evaluated at
    // feasible points (inf h = 0), so base points are normalized first.
    const auto check_fd = [](const DiscreteMeasure& mu, double q, Vec v_any) {
        SolverOptions opts = default_opts(q);
        const Vec v = solver_normalize(mu, v_any);
        const Vec g = solver_objective_gradient(mu, q, v, opts);
        const double h = 1e-5;
        for (size_t i = 0; i < v.size(); ++i) {
            Vec vp = v, vm = v;
            vp[i] += h;
            vm[i] -= h;
            const double fp = solver_objective(mu, q, vp, opts, /*normalize_shift=*/false);
            const double fm = solver_objective(mu, q, vm, opts, /*normalize_shift=*/false);
            const double fd = (fp - fm) / (2.0 * h);
            CHECK(std::abs(g[i] - fd) < 1e-5);
        }
    };
    // symmetric instance at the optimum and at generic feasible points
    check_fd(two_atoms(), 0.0, {0.0, 0.0});
    check_fd(two_atoms(), -1.0, {0.0, 0.0});

    DiscreteMeasure three;
    three.dim = 1;
    three.atoms = {{{-1.0}, 0.4}, {{0.3}, 0.25}, {{1.2}, 0.35}};
    check_fd(three, 0.0, {0.2, 0.0, 0.15});
    check_fd(three, -1.0, {0.2, 0.0, 0.15});

    // 2D instance
    DiscreteMeasure mu2 = three_atoms_2d();
    check_fd(mu2, 0.0, {0.0, 0.0, 0.0});
    check_fd(mu2, -1.0, {0.05, 0.02, 0.0});
}

TEST_CASE("solve: symmetric two-atom instance, q = 0") {
    const DiscreteMeasure mu = two_atoms();
    const SolveResult res = solve_minkowski(mu, default_opts(0.0));
    CHECK(res.converged);
    CHECK(std::abs(res.v[0]) < 1e-8);
    CHECK(std::abs(res.v[1]) < 1e-8);
    CHECK(res.tau == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.residual_tv <= 1e-6);
    // phi0_star is |y|
    REQUIRE(res.phi0_star);
    const Vec p{0.7};
    CHECK(res.phi0_star->value(p).value() == doctest::Approx(0.7).epsilon(1e-8));
}

TEST_CASE("solve: symmetric two-atom instance, q = -1") {
    const DiscreteMeasure mu = two_atoms();
    const SolveResult res = solve_minkowski(mu, default_opts(-1.0));
    CHECK(res.converged);
    CHECK(std::abs(res.v[0]) < 1e-8);
    CHECK(std::abs(res.v[1]) < 1e-8);
    // tau = |mu| / W_2(|y|) = 1/E|y| = sqrt(pi/2)
    CHECK(res.tau == doctest::Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-9));
    // recovered masses tau/sqrt(2 pi) = 1/2 each
    REQUIRE(res.recovered.atoms.size() == 2);
    CHECK(res.recovered.atoms[0].weight == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.residual_tv <= 1e-6);
}

TEST_CASE("solve: three symmetric atoms in 2D, q = 0") {
    const DiscreteMeasure mu = three_atoms_2d();
    const SolveResult res = solve_minkowski(mu, default_opts(0.0));
    CHECK(res.converged);
    REQUIRE(res.recovered.atoms.size() == 3);
    for (const auto& a : res.recovered.atoms)
        CHECK(a.weight == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(res.residual_tv <= 1e-3);
}

TEST_CASE("solve from a random start returns to the symmetric optimum") {
    SolverOptions opts = default_opts(0.0);
    opts.init = SolverOptions::Init::random;
    opts.seed = 5;
    const SolveResult res = solve_minkowski(two_atoms(), opts);
    CHECK(res.converged);
    CHECK(std::abs(res.v[0]) < 1e-7);
    CHECK(std::abs(res.v[1]) < 1e-7);
    // descent: the trace is non-increasing
    for (size_t i = 0; i + 1 < res.trace.size(); ++i)
        CHECK(res.trace[i + 1].objective <= res.trace[i].objective + 1e-15);
}

TEST_CASE("shift covariance of the normalized state") {
    const DiscreteMeasure mu = four_atoms_asym();
    const SolverOptions opts = default_opts(-1.0);
    const Vec v = {0.3, 0.1, 0.05, 0.4};
    Vec shifted = v;
    for (auto& c : shifted) c += 0.37;
    CHECK(solver_objective(mu, -1.0, v, opts) ==
          doctest::Approx(solver_objective(mu, -1.0, shifted, opts) - 0.37).epsilon(1e-12));
    const Vec g1 = solver_objective_gradient(mu, -1.0, v, opts);
    const Vec g2 = solver_objective_gradient(mu, -1.0, shifted, opts);
    for (size_t i = 0; i < g1.size(); ++i)
        CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-11));
}

TEST_CASE("uniqueness: independent random initializations agree") {
    const DiscreteMeasure mu = four_atoms_asym();
    std::vector<Vec> solutions;
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        SolverOptions opts = default_opts(-1.0);
        opts.init = SolverOptions::Init::random;
        opts.seed = seed;
        const SolveResult res = solve_minkowski(mu, opts);
        CHECK(res.converged);
        solutions.push_back(res.v);
    }
    for (size_t i = 1; i < solutions.size(); ++i) {
        double dev = 0.0;
        for (size_t k = 0; k < solutions[0].size(); ++k)
            dev = std::max(dev, std::abs(solutions[i][k] - solutions[0][k]));
        CHECK(dev <= 1e-4);
    }
}

TEST_CASE("solver rejects q > 0") {
    SolverOptions opts = default_opts(0.5);
    CHECK_THROWS_AS((void)solve_minkowski(two_atoms(), opts), FdmError);
}

TEST_CASE("verification report") {
    const DiscreteMeasure mu = two_atoms();
    const SolveResult res = solve_minkowski(mu, default_opts(0.0));
    const VerifyReport rep = verify_solution(mu, 0.0, res, Scheme::parse("mc:100000", 99));
    CHECK(rep.tv_normalized <= std::max(3.0 * rep.stderr_est, 1e-4));
    CHECK(std::abs(rep.inf_h) <= 1e-10);
    // tau identity: lhs = 1/W_1(|y|) = 1, rhs = e^{-E|y|}; the report prints
    // both sides, and on this instance they genuinely differ
    CHECK(rep.tau_identity_lhs == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(rep.tau_identity_rhs == doctest::Approx(std::exp(-kWbarAbs)).epsilon(1e-3));
    CHECK(rep.tau_identity_residual > 0.5);
}

TEST_CASE("redundant piece gets pushed back toward activity") {
    // third atom far above the hull: empty cell, gradient w_i/|mu| > 0
    DiscreteMeasure mu;
    mu.dim = 1;
    mu.atoms = {{{-1.0}, 0.4}, {{1.0}, 0.4}, {{0.2}, 0.2}};
    const SolverOptions opts = default_opts(0.0);
    const Vec v = {0.0, 0.0, 5.0};  // (0.2, 5) is way above the hull
    const Vec g = solver_objective_gradient(mu, 0.0, v, opts);
    CHECK(g[2] == doctest::Approx(0.2).epsilon(1e-12));  // w_i/|mu|, mass term 0
    // the full solve activates all three pieces
    const SolveResult res = solve_minkowski(mu, opts);
    CHECK(res.converged);
    CHECK(res.recovered.atoms.size() == 3);
}
