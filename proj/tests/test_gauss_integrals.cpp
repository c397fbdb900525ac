#include <doctest.h>

#include <cmath>

#include "core/gauss_integrals.hpp"

using namespace fdm;

namespace {

const Scheme kHermite = Scheme::parse("hermite:64", 0);
const Scheme kMc = Scheme::parse("mc:200000", 11);

FunctionPtr quad_half(int dim = 1) {
    return std::make_shared<Quadratic>(Quadratic::isotropic(dim, 1.0));
}
FunctionPtr quad() { return std::make_shared<Quadratic>(Quadratic::isotropic(1, 2.0)); }
FunctionPtr abs_fn() {
    return std::make_shared<MaxAffine>(
        1, std::vector<MaxAffine::Piece>{{{-1.0}, 0.0}, {{1.0}, 0.0}});
}

}  // namespace

TEST_CASE("dual quermassintegral closed forms") {
    // E x^2 / 2 = 0.5 and E x^4 / 4 = 0.75
    CHECK(dual_quermassintegral(quad_half(), -1.0, kHermite).value ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dual_quermassintegral(quad_half(), -2.0, kHermite).value ==
          doctest::Approx(0.75).epsilon(1e-12));
    // q = 0 is exactly 1 for any f
    const IntegralResult one = dual_quermassintegral(abs_fn(), 0.0, kHermite);
    CHECK(one.value == 1.0);
    CHECK(one.stderr_est == 0.0);
    // Monte Carlo agrees within 3 stderr
    const IntegralResult mc = dual_quermassintegral(quad_half(), -1.0, kMc);
    CHECK(std::abs(mc.value - 0.5) < 3.0 * mc.stderr_est);
}

TEST_CASE("normalized quermassintegral") {
    CHECK(normalized_quermassintegral(quad_half(), -1.0, kHermite).value ==
          doctest::Approx(2.0).epsilon(1e-12));
    // constant k: value 1/k for q != 0 and for the q = 0 geometric mean
    const auto konst = std::make_shared<MaxAffine>(
        1, std::vector<MaxAffine::Piece>{{{0.0}, -2.0}});
    CHECK(normalized_quermassintegral(konst, -1.5, kHermite).value ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(normalized_quermassintegral(konst, 0.0, kHermite).value ==
          doctest::Approx(0.5).epsilon(1e-12));
    // grid carrier of e^x on [-5,5]: geometric mean exp(-E x) = 1
    Vec values(2001);
    for (int i = 0; i < 2001; ++i) values[i] = std::exp(-5.0 + 10.0 * i / 2000.0);
    const auto gx = std::make_shared<GridFunction>(
        GridFunction(1, {-5.0}, {5.0}, {2001}, values));
    const Scheme trimmed = Scheme::parse("qmc:65536", 5);
    CHECK(normalized_quermassintegral(gx, 0.0, trimmed).value ==
          doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("weighted second moment") {
    // integral x^2 (x^2/2) dgamma = E x^4 / 2 = 1.5
    CHECK(weighted_second_moment(quad_half(), -1.0, kHermite).value ==
          doctest::Approx(1.5).epsilon(1e-12));
    // f == 1 in dim 2: E |x|^2 = 2
    const auto one2 = std::make_shared<MaxAffine>(
        2, std::vector<MaxAffine::Piece>{{{0.0, 0.0}, -1.0}});
    CHECK(weighted_second_moment(one2, -3.0, kHermite).value ==
          doctest::Approx(2.0).epsilon(1e-12));
    // q = 0: plain second moment
    CHECK(weighted_second_moment(abs_fn(), 0.0, kHermite).value ==
          doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("self-mixed identity closed forms") {
    // [(n-q) W - integral |x|^2 f^{-q}]/q
    CHECK(self_mixed(quad_half(), -1.0, kHermite).value ==
          doctest::Approx(0.5).epsilon(1e-10));
    // q=-2: [3*0.75 - E x^6/4]/(-2) = [2.25 - 3.75]/(-2) = 0.75
    CHECK(self_mixed(quad_half(), -2.0, kHermite).value ==
          doctest::Approx(0.75).epsilon(1e-10));
    CHECK_THROWS_AS((void)self_mixed(quad_half(), 0.0, kHermite), FdmError);
}

TEST_CASE("self-mixed vs finite differences of the scaling flow") {
    // phi box (phi t) = phi (1+t), so (1/q) d/dt W(phi(1+t)) at 0+ is the
    // self-mixed value; right_scalar_mult gives the flow exactly. Integer q
    // keeps the hermite rule exact (polynomial integrands).
    for (double q : {-1.0, -2.0}) {
        const FunctionPtr f = quad_half();
        const double base = dual_quermassintegral(f, q, kHermite).value;
        Vec quotients;
        for (double t : {1e-3, 5e-4}) {
            const double wt =
                dual_quermassintegral(right_scalar_mult(f, 1.0 + t), q, kHermite).value;
            quotients.push_back((wt - base) / t);
        }
        const double deriv = 2.0 * quotients[1] - quotients[0];  // Richardson
        const double expect = self_mixed(f, q, kHermite).value;
        CHECK(deriv / q == doctest::Approx(expect).epsilon(1e-5));
    }
    // fractional q: the integrand (x^2/2)^{1/2} has a kink, so use common
    // random numbers and a statistical tolerance
    {
        const double q = -0.5;
        const Scheme mc = Scheme::parse("mc:400000", 3);
        const FunctionPtr f = quad_half();
        const double base = dual_quermassintegral(f, q, mc).value;
        const double t = 1e-3;
        const double wt = dual_quermassintegral(right_scalar_mult(f, 1.0 + t), q, mc).value;
        const double deriv = (wt - base) / t;
        const IntegralResult expect = self_mixed(f, q, mc);
        // analytic: E|x|/sqrt(2) terms give 0.5642
        CHECK(std::abs(deriv / q - expect.value) <
              std::max(6.0 * expect.stderr_est, 5e-3));
        CHECK(std::abs(expect.value - 0.5641895835477563) < 3.0 * expect.stderr_est + 1e-6);
    }
}

TEST_CASE("mixed integral closed forms") {
    // W_{n+1-q}(f,g) = integral g*(grad f) f^{-q} dgamma
    CHECK(mixed_integral(quad_half(), quad_half(), -1.0, kHermite).value ==
          doctest::Approx(0.75).epsilon(1e-12));
    CHECK(mixed_integral(quad_half(), quad(), 0.0, kHermite).value ==
          doctest::Approx(0.25).epsilon(1e-12));
    // f = g = |x|: conjugate vanishes on [-1,1], gradient = +-1
    CHECK(mixed_integral(abs_fn(), abs_fn(), 0.0, kHermite).value == 0.0);
    // grad f leaving dom g* raises ConjugateUnbounded
    CHECK_THROWS_AS((void)mixed_integral(quad_half(), abs_fn(), 0.0, kHermite), FdmError);
}

TEST_CASE("mixed fd matches the closed forms and the integral route") {
    // q = 0 on (x^2/2, x^2): analytic value 0.25
    const IntegralResult fd0 = mixed_fd(quad_half(), quad(), 0.0, kHermite);
    CHECK(fd0.value == doctest::Approx(0.25).epsilon(1e-5));
    // q = -1: integral route gives 0.375
    const IntegralResult fd1 = mixed_fd(quad_half(), quad(), -1.0, kHermite);
    const IntegralResult mi1 = mixed_integral(quad_half(), quad(), -1.0, kHermite);
    CHECK(mi1.value == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(std::abs(fd1.value - mi1.value) <
          std::max(3.0 * (fd1.stderr_est + mi1.stderr_est), 2e-3));
    // max-affine pair through the exact closure path
    const IntegralResult fda = mixed_fd(abs_fn(), abs_fn(), -1.0, kHermite);
    const IntegralResult mia = mixed_integral(abs_fn(), abs_fn(), -1.0, kHermite);
    CHECK(std::abs(fda.value - mia.value) <
          std::max(3.0 * (fda.stderr_est + mia.stderr_est), 2e-3));
}

TEST_CASE("bm flow derivative matches the derivative lemma") {
    // d/dt W_{n+1-q}([f(1-t)][] [g t]) at 0+ equals
    // (q-1)[W(f,g) - W(f,f)]; closed form 1/(2-t) gives 0.25 at q=0.
    const IntegralResult d0 = bm_flow_derivative_fd(quad_half(), quad(), 0.0, kHermite);
    CHECK(d0.value == doctest::Approx(0.25).epsilon(1e-5));
    for (double q : {0.0, -1.0}) {
        const IntegralResult lhs = bm_flow_derivative_fd(quad_half(), quad(), q, kHermite);
        const double rhs = (q - 1.0) * (mixed_integral(quad_half(), quad(), q, kHermite).value -
                                        mixed_integral(quad_half(), quad_half(), q, kHermite).value);
        CHECK(std::abs(lhs.value - rhs) < std::max(3.0 * lhs.stderr_est, 2e-3));
    }
}

TEST_CASE("power mean is monotone in -q") {
    const auto f = std::make_shared<Quadratic>(Quadratic::isotropic(1, 1.0, {}, 0.1));
    const double v1 = power_mean(f, -1.0, kHermite).value;
    const double v2 = power_mean(f, -2.0, kHermite).value;
    CHECK(v2 > v1);
    // closed forms: (E f)^1 = 0.6; (E f^2)^{1/2} = sqrt(0.86)
    CHECK(v1 == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(v2 == doctest::Approx(std::sqrt(0.86)).epsilon(1e-12));
}

TEST_CASE("divergence and error policy") {
    // q > 0 with f vanishing on a region of positive measure: Diverged
    const auto flat = std::make_shared<MaxAffine>(
        1, std::vector<MaxAffine::Piece>{{{0.0}, 0.0}, {{1.0}, 1.0}, {{-1.0}, 1.0}});
    CHECK_THROWS_AS((void)dual_quermassintegral(flat, 0.5, kHermite), FdmError);
    // fractional power of a negative base
    const auto dips = std::make_shared<MaxAffine>(
        1, std::vector<MaxAffine::Piece>{{{-1.0}, 1.0}, {{1.0}, 1.0}});  // |x| - 1
    CHECK_THROWS_AS((void)dual_quermassintegral(dips, -0.5, kHermite), FdmError);
    // integer powers of a signed function are fine (E|x| - 1, kink => mc)
    const Scheme mc = Scheme::parse("mc:400000", 17);
    const IntegralResult r = dual_quermassintegral(dips, -1.0, mc);
    CHECK(std::abs(r.value - (std::sqrt(2.0 / M_PI) - 1.0)) < 3.0 * r.stderr_est);
}
