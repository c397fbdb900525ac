#include <doctest.h>

#include <cmath>

#include "core/convex_ops.hpp"
#include "core/json_io.hpp"
#include "core/rng.hpp"

using namespace fdm;

namespace {

FunctionPtr make_abs() {
    return std::make_shared<MaxAffine>(
        1, std::vector<MaxAffine::Piece>{{{-1.0}, 0.0}, {{1.0}, 0.0}});
}

FunctionPtr quad(double coeff) {
    return std::make_shared<Quadratic>(Quadratic::isotropic(1, coeff));
}

double eval1(const ConvexFunction& f, double x) {
    const Vec p{x};
    return f.value(p).finite();
}

// Random max-affine with small rational data, so conjugation arithmetic is
// exact and f** = f can be checked with equality.
MaxAffine random_max_affine(int dim, int pieces, CounterRng& rng) {
    std::vector<MaxAffine::Piece> ps;
    for (int i = 0; i < pieces; ++i) {
        Vec a(dim);
        for (int k = 0; k < dim; ++k)
            a[k] = static_cast<double>(static_cast<int>(rng.next_u64() % 17) - 8) / 4.0;
        const double c = static_cast<double>(static_cast<int>(rng.next_u64() % 33) - 16) / 8.0;
        ps.push_back({a, c});
    }
    return MaxAffine(dim, std::move(ps));
}

}  // namespace

TEST_CASE("max-affine evaluation and dedup") {
    const auto f = make_abs();
    CHECK(eval1(*f, 2.0) == 2.0);
    CHECK(eval1(*f, -3.5) == 3.5);
    // duplicate slopes merge keeping the smaller intercept
    const MaxAffine g(1, {{{1.0}, 0.0}, {{1.0}, 1.0}, {{-1.0}, 0.5}});
    CHECK(g.pieces().size() == 2);
    CHECK(g.pieces()[0].intercept == 0.0);
}

TEST_CASE("point hull evaluation: interpolation and +inf outside") {
    const PointHull f(1, {{{0.0}, 0.0}, {{2.0}, 2.0}});
    const Vec p1{1.0};
    CHECK(f.value(p1).finite() == doctest::Approx(1.0));
    const PointHull g(1, {{{-1.0}, 0.0}, {{1.0}, 0.0}});
    const Vec p3{3.0};
    CHECK(!g.value(p3).is_finite());
    // interior point above the hull contributes nothing
    const PointHull h(1, {{{-1.0}, 0.0}, {{0.0}, 5.0}, {{1.0}, 0.0}});
    const Vec p0{0.0};
    CHECK(h.value(p0).finite() == doctest::Approx(0.0));
}

TEST_CASE("point hull LP path matches the 1D fast path") {
    CounterRng rng(11, 0);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<PointHull::Support> pts;
        const int m = 3 + static_cast<int>(rng.next_u64() % 6);
        for (int i = 0; i < m; ++i)
            pts.push_back({{-2.0 + 4.0 * rng.next_uniform()}, -1.0 + 2.0 * rng.next_uniform()});
        const PointHull ph(1, pts);
        // 2D embedding of the same data, y-coordinate forced to 0
        std::vector<PointHull::Support> pts2;
        for (const auto& p : pts) pts2.push_back({{p.location[0], 0.0}, p.value});
        const PointHull ph2(2, pts2);
        for (double x = -1.9; x < 2.0; x += 0.37) {
            const Vec a{x}, b{x, 0.0};
            const ExtReal va = ph.value(a), vb = ph2.value(b);
            CHECK(va.is_finite() == vb.is_finite());
            if (va.is_finite()) CHECK(va.value() == doctest::Approx(vb.value()).epsilon(1e-9));
        }
    }
}

TEST_CASE("conjugation is an exact data swap and an involution") {
    const auto f = make_abs();
    const auto fstar = conjugate_of(f);
    const auto ph = std::dynamic_pointer_cast<const PointHull>(fstar);
    REQUIRE(ph);
    // conjugate of |x|: 0 on [-1,1], +inf outside
    const Vec inside{0.3}, outside{1.5};
    CHECK(ph->value(inside).finite() == doctest::Approx(0.0));
    CHECK(!ph->value(outside).is_finite());

    // involution on an l.s.c. convex point hull at 21 grid points
    const auto g = std::make_shared<PointHull>(
        PointHull(1, {{{-1.0}, 0.0}, {{1.0}, 0.0}}));
    const auto gss = conjugate_of(conjugate_of(g));
    for (int i = 0; i <= 20; ++i) {
        const Vec x{-2.0 + 4.0 * i / 20.0};
        const ExtReal a = g->value(x), b = gss->value(x);
        CHECK(a.is_finite() == b.is_finite());
        if (a.is_finite()) CHECK(a.value() == doctest::Approx(b.value()).epsilon(1e-12));
    }
}

TEST_CASE("double conjugation reproduces random max-affine data exactly") {
    CounterRng rng(5, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 1 + static_cast<int>(rng.next_u64() % 2);
        const MaxAffine f = random_max_affine(dim, 2 + static_cast<int>(rng.next_u64() % 11), rng);
        const auto fp = std::make_shared<MaxAffine>(f);
        const auto fss = std::dynamic_pointer_cast<const MaxAffine>(conjugate_of(conjugate_of(fp)));
        REQUIRE(fss);
        REQUIRE(fss->pieces().size() == f.pieces().size());
        for (size_t i = 0; i < f.pieces().size(); ++i) {
            CHECK(fss->pieces()[i].slope == f.pieces()[i].slope);
            CHECK(fss->pieces()[i].intercept == f.pieces()[i].intercept);
        }
        // and as functions, at rational points
        Vec x(dim);
        for (int probe = 0; probe < 5; ++probe) {
            for (int k = 0; k < dim; ++k)
                x[k] = static_cast<double>(static_cast<int>(rng.next_u64() % 9) - 4) / 2.0;
            CHECK(fss->value(x).value() == f.value(x).value());
        }
    }
}

TEST_CASE("grid conjugate equals the brute-force discrete sup") {
    CounterRng rng(9, 0);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 9 + static_cast<int>(rng.next_u64() % 16);
        Vec values(n);
        for (auto& v : values) v = -1.0 + 2.0 * rng.next_uniform();
        if (trial % 2 == 0) values[rng.next_u64() % n] = std::numeric_limits<double>::infinity();
        const GridFunction g(1, {-2.0}, {2.0}, {n}, values);
        const int m = 7 + static_cast<int>(rng.next_u64() % 10);
        const GridFunction conj = grid_conjugate(g, {-3.0}, {3.0}, {m});
        for (int s = 0; s < m; ++s) {
            const double sv = -3.0 + 6.0 * s / (m - 1);
            double best = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j) {
                if (!std::isfinite(values[j])) continue;
                best = std::max(best, sv * g.node_coord(0, j) - values[j]);
            }
            CHECK(conj.values()[s] == best);  // same program computed two ways
        }
    }
}

TEST_CASE("grid conjugate of x^2/2 approximates y^2/2") {
    const auto q = quad(1.0);
    const GridFunction g = GridFunction::sample(*q, {-6.0}, {6.0}, {481});
    const GridFunction conj = grid_conjugate(g, {-6.0}, {6.0}, {481});
    double worst = 0.0;
    for (int i = 0; i <= 120; ++i) {
        const double y = -3.0 + 6.0 * i / 120.0;
        const Vec p{y};
        worst = std::max(worst, std::abs(conj.value(p).finite() - 0.5 * y * y));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("2D grid conjugate matches the brute-force sup") {
    CounterRng rng(21, 0);
    Vec values(13 * 11);
    for (auto& v : values) v = -1.0 + 2.0 * rng.next_uniform();
    const GridFunction g(2, {-1.0, -2.0}, {2.0, 1.0}, {13, 11}, values);
    const GridFunction conj = grid_conjugate(g, {-2.0, -2.0}, {2.0, 2.0}, {9, 8});
    for (int s0 = 0; s0 < 9; ++s0)
        for (int s1 = 0; s1 < 8; ++s1) {
            const double sv0 = -2.0 + 4.0 * s0 / 8.0;
            const double sv1 = -2.0 + 4.0 * s1 / 7.0;
            double best = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < 13; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double x0 = g.node_coord(0, i);
                    const double x1 = g.node_coord(1, j);
                    best = std::max(best, sv0 * x0 + sv1 * x1 - values[i * 11 + j]);
                }
            CHECK(conj.values()[s0 * 8 + s1] == doctest::Approx(best).epsilon(1e-13));
        }
}

TEST_CASE("gradients: active piece, ties, central differences") {
    const auto f = make_abs();
    const Vec xp{0.5}, x0{0.0};
    const GradientResult g1 = f->gradient(xp);
    CHECK(g1.g[0] == 1.0);
    CHECK(g1.is_smooth);
    const GradientResult g0 = f->gradient(x0);
    CHECK(g0.g[0] == -1.0);  // lowest-index tie break, piece order {(-1,0),(1,0)}
    CHECK(!g0.is_smooth);

    const GridFunction grid = GridFunction::sample(*quad(1.0), {-3.0}, {3.0}, {241});
    const Vec x1{1.0};
    CHECK(grid.gradient(x1).g[0] == doctest::Approx(1.0).epsilon(1e-4));
    const Vec near_edge{2.999};
    CHECK_THROWS_AS((void)grid.gradient(near_edge), FdmError);
}

TEST_CASE("fenchel-young inequality with equality at gradients") {
    CounterRng rng(31, 0);
    for (int trial = 0; trial < 40; ++trial) {
        const MaxAffine f = random_max_affine(1, 3 + static_cast<int>(rng.next_u64() % 8), rng);
        const auto fp = std::make_shared<MaxAffine>(f);
        const auto fstar = conjugate_of(fp);
        for (int probe = 0; probe < 6; ++probe) {
            const Vec x{-2.0 + 4.0 * rng.next_uniform()};
            const Vec y{-2.0 + 4.0 * rng.next_uniform()};
            const ExtReal fs = fstar->value(y);
            if (fs.is_finite()) {
                CHECK(f.value(x).value() + fs.value() >= x[0] * y[0] - 1e-12);
            }
            const GradientResult g = f.gradient(x);
            if (g.is_smooth) {
                const double lhs = f.value(x).value() + fstar->value(g.g).finite();
                CHECK(lhs == doctest::Approx(x[0] * g.g[0]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("huber envelope: |x| box (x^2/2)") {
    const auto h = inf_convolution(make_abs(), quad(1.0));
    CHECK(eval1(*h, 2.0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(eval1(*h, 0.5) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(eval1(*h, -2.0) == doctest::Approx(1.5).epsilon(1e-12));
    // brute force oracle: inf over a 10^4-point grid (resolution ~1e-3)
    for (double x : {0.3, 0.9, 1.7, -1.1}) {
        double brute = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 10000; ++i) {
            const double y = -5.0 + 10.0 * i / 9999.0;
            brute = std::min(brute, std::abs(x - y) + 0.5 * y * y);
        }
        CHECK(std::abs(eval1(*h, x) - brute) < 1e-3);
        CHECK(eval1(*h, x) <= brute + 1e-15);  // grid min overestimates the true inf
    }
    // gradient of the envelope is the argmax of the concave program
    const Vec x2{2.0};
    CHECK(h->gradient(x2).g[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("self inf-convolution is right scalar scaling") {
    // (x^2/2) box ((x^2/2) t) = (x^2/2)(1+t)
    const auto f = quad(1.0);
    const auto combo = inf_convolution(f, right_scalar_mult(f, 1.0));
    CHECK(eval1(*combo, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    const auto scaled = right_scalar_mult(f, 2.0);
    for (double x : {-1.5, 0.2, 2.7})
        CHECK(eval1(*combo, x) == doctest::Approx(eval1(*scaled, x)).epsilon(1e-12));
    // same identity through max-affine representations
    const auto a = make_abs();
    const auto combo2 = inf_convolution(a, right_scalar_mult(a, 0.5));
    for (double x : {-2.0, -0.3, 0.0, 1.1})
        CHECK(eval1(*combo2, x) == doctest::Approx(eval1(*a, x)).epsilon(1e-12));
}

TEST_CASE("inf-convolution with the zero function gives inf f") {
    const auto f = std::make_shared<MaxAffine>(
        1, std::vector<MaxAffine::Piece>{{{-1.0}, 1.0}, {{1.0}, 1.0}});  // |x| - 1
    const auto zero = std::make_shared<MaxAffine>(
        1, std::vector<MaxAffine::Piece>{{{0.0}, 0.0}});
    const auto combo = inf_convolution(f, zero);
    for (double x : {-3.0, 0.0, 5.0})
        CHECK(eval1(*combo, x) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("LP path for 2D max-affine inf-convolution") {
    // cross gauge box itself: (max(|x1|,|x2|)) box (gauge t) = gauge (1+t)
    const MaxAffine gauge = gauge_from_polar_vertices(
        2, {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}});
    const auto g = std::make_shared<MaxAffine>(gauge);
    const auto combo = inf_convolution(g, right_scalar_mult(g, 1.0));
    for (const Vec& x : {Vec{1.0, 2.0}, Vec{-3.0, 0.5}, Vec{0.0, 0.0}}) {
        const ExtReal direct = g->value(x);
        CHECK(combo->value(x).finite() == doctest::Approx(direct.value()).epsilon(1e-9));
    }
}

TEST_CASE("prop 2.1: conjugate of inf-convolution is the sum of conjugates") {
    const auto f = make_abs();
    const auto g = quad(1.0);
    const auto combo = std::dynamic_pointer_cast<const InfConvolution>(inf_convolution(f, g));
    REQUIRE(combo);
    const auto conj = conjugate_of(combo);
    const auto fstar = conjugate_of(f);
    const auto gstar = conjugate_of(g);
    for (double y : {-0.9, -0.2, 0.4, 0.99}) {
        const Vec p{y};
        const double expect = fstar->value(p).finite() + gstar->value(p).finite();
        CHECK(conj->value(p).finite() == doctest::Approx(expect).epsilon(1e-12));
    }
    // independent numeric route: sample the closure, grid-Legendre it
    const GridFunction sampled = GridFunction::sample(*combo, {-8.0}, {8.0}, {801});
    const GridFunction num_conj = grid_conjugate(sampled, {-0.95}, {0.95}, {39});
    for (int i = 0; i < 39; ++i) {
        const double y = -0.95 + 1.9 * i / 38.0;
        const Vec p{y};
        const double expect = fstar->value(p).finite() + gstar->value(p).finite();
        CHECK(num_conj.values()[i] == doctest::Approx(expect).epsilon(1e-4));
    }
}

TEST_CASE("right scalar multiplication") {
    const auto a = make_abs();
    const auto a5 = right_scalar_mult(a, 5.0);
    for (double x : {-3.0, 0.0, 2.0})
        CHECK(eval1(*a5, x) == eval1(*a, x));  // 1-homogeneous gauge unchanged

    const auto q2 = right_scalar_mult(quad(1.0), 2.0);
    CHECK(eval1(*q2, 2.0) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS((void)right_scalar_mult(a, 0.0), FdmError);

    // (f t)* = t f* pointwise. Note the right side is the plain scalar
    // multiple of the conjugate, not its right scalar multiplication.
    CounterRng rng(77, 0);
    const MaxAffine f = random_max_affine(1, 6, rng);
    const auto fp = std::make_shared<MaxAffine>(f);
    const double t = 1.7;
    const auto lhs = conjugate_of(right_scalar_mult(fp, t));
    const auto conj = std::dynamic_pointer_cast<const PointHull>(conjugate_of(fp));
    std::vector<PointHull::Support> scaled = conj->points();
    for (auto& p : scaled) p.value *= t;
    const PointHull rhs(1, std::move(scaled));
    for (int probe = 0; probe < 10; ++probe) {
        const Vec y{-2.0 + 4.0 * rng.next_uniform()};
        const ExtReal a1 = lhs->value(y), b1 = rhs.value(y);
        CHECK(a1.is_finite() == b1.is_finite());
        if (a1.is_finite()) CHECK(a1.value() == doctest::Approx(b1.value()).epsilon(1e-11));
    }
}

TEST_CASE("gauges from polar vertices") {
    const MaxAffine g1 = gauge_from_polar_vertices(1, {{-1.0}, {1.0}});
    const Vec m3{-3.0};
    CHECK(g1.value(m3).value() == 3.0);

    const MaxAffine cross = gauge_from_polar_vertices(
        2, {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}});
    const Vec p{1.0, 2.0};
    CHECK(cross.value(p).value() == 2.0);  // max(|x1|, |x2|)

    // gauge = 1 on the boundary: bisection along fixed directions
    for (const Vec& dir : {Vec{1.0, 0.3}, Vec{-0.5, 1.0}, Vec{0.2, -0.9}}) {
        double lo = 0.0, hi = 10.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const Vec x{mid * dir[0], mid * dir[1]};
            (cross.value(x).value() < 1.0 ? lo : hi) = mid;
        }
        const Vec x{hi * dir[0], hi * dir[1]};
        CHECK(cross.value(x).value() == doctest::Approx(1.0).epsilon(1e-12));
    }

    // 1-homogeneity, exactly for max-affine gauges
    for (double lam : {0.25, 2.0, 7.5}) {
        const Vec x{0.7, -1.3}, lx{lam * 0.7, lam * -1.3};
        CHECK(cross.value(lx).value() == lam * cross.value(x).value());
    }

    CHECK_THROWS_AS((void)gauge_from_polar_vertices(2, {{1.0, 0.0}, {0.0, 1.0}}), FdmError);
    CHECK_THROWS_AS((void)gauge_from_polar_vertices(2, {{1.0, 0.0}, {-1.0, 0.0}}), FdmError);
}

TEST_CASE("normalize at origin") {
    const MaxAffine h(1, {{{-1.0}, 1.0}, {{1.0}, 1.0}});  // max(-y-1, y-1)
    const NormalizeResult r = normalize_at_origin(h);
    CHECK(r.shift == doctest::Approx(-1.0).epsilon(1e-12));
    const Vec zero{0.0};
    CHECK(r.normalized.value(zero).value() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.argmin[0] == doctest::Approx(0.0).epsilon(1e-9));

    const MaxAffine habs(1, {{{-1.0}, 0.0}, {{1.0}, 0.0}});
    const NormalizeResult r2 = normalize_at_origin(habs);
    CHECK(r2.shift == doctest::Approx(0.0).epsilon(1e-12));

    const MaxAffine bad(1, {{{1.0}, 0.0}, {{2.0}, 0.0}});  // 0 outside {1,2}
    CHECK_THROWS_AS((void)normalize_at_origin(bad), FdmError);
}

TEST_CASE("grid convexity check") {
    const GridFunction ok = GridFunction::sample(*quad(1.0), {-2.0}, {2.0}, {41});
    CHECK(check_convexity_grid(ok).pass);

    Vec concave(41);
    for (int i = 0; i < 41; ++i) {
        const double x = -2.0 + 4.0 * i / 40.0;
        concave[i] = -x * x;
    }
    const GridFunction bad(1, {-2.0}, {2.0}, {41}, concave);
    const ConvexityReport rep = check_convexity_grid(bad);
    CHECK(!rep.pass);
    CHECK(rep.worst_violation > 0.0);

    // admissibility witness: (y^2/2) - 0.5*(y^2/4) = 3y^2/8 is convex
    Vec mix(41);
    for (int i = 0; i < 41; ++i) {
        const double y = -2.0 + 4.0 * i / 40.0;
        mix[i] = 0.375 * y * y;
    }
    CHECK(check_convexity_grid(GridFunction(1, {-2.0}, {2.0}, {41}, mix)).pass);

    // 2D with diagonal directions
    const GridFunction ok2 =
        GridFunction::sample(*std::make_shared<Quadratic>(Quadratic::isotropic(2, 1.0)),
                             {-2.0, -2.0}, {2.0, 2.0}, {21, 21});
    CHECK(check_convexity_grid(ok2).pass);
}

TEST_CASE("1D envelope breakpoints and redundancy") {
    const MaxAffine h(1, {{{-1.0}, 0.0}, {{1.0}, 0.0}, {{0.0}, 2.0}});  // middle piece redundant
    const Envelope1D env = upper_envelope_1d(h);
    REQUIRE(env.active_piece.size() == 2);
    CHECK(env.breakpoints[0] == doctest::Approx(0.0));
    CHECK(env.active_piece[0] == 0);
    CHECK(env.active_piece[1] == 1);
}
