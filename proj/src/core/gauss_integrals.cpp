#include "core/gauss_integrals.hpp"

#include <cmath>

namespace fdm {

namespace {

// f^{-q} with the divergence policy: 0^{-q} for q > 0 is a genuine +inf of
// the integrand.
double integrand_power(const ConvexFunction& f, std::span<const double> x, double q) {
    const ExtReal base = f.value(x);
    const ExtReal v = pow_ext(base, -q);
    if (!v.is_finite()) {
        if (q > 0) fail(Errc::diverged, "f vanishes on a sampled region with q > 0");
        fail(Errc::diverged, "integrand is +inf at a node");
    }
    return v.value();
}

}  // namespace

IntegralResult dual_quermassintegral(const FunctionPtr& f, double q, const Scheme& scheme) {
    if (q == 0.0) return IntegralResult{1.0, 0.0, scheme};
    return gauss_expectation(f->dim(), scheme, [&](std::span<const double> x) {
        return integrand_power(*f, x, q);
    });
}

IntegralResult normalized_quermassintegral(const FunctionPtr& f, double q, const Scheme& scheme) {
    if (q == 0.0) {
        IntegralResult r = gauss_expectation(f->dim(), scheme, [&](std::span<const double> x) {
            const ExtReal v = f->value(x);
            if (!v.is_finite() || v.value() <= 0.0)
                fail(Errc::log_of_zero, "log of a non-positive value at a node");
            return std::log(v.value());
        });
        const double value = std::exp(-r.value);
        return IntegralResult{value, value * r.stderr_est, scheme};
    }
    IntegralResult r = dual_quermassintegral(f, q, scheme);
    const double value = std::pow(r.value, 1.0 / q);
    // first-order error propagation through x^{1/q}
    const double deriv = std::abs(value / (q * r.value));
    return IntegralResult{value, deriv * r.stderr_est, scheme};
}

IntegralResult weighted_second_moment(const FunctionPtr& f, double q, const Scheme& scheme) {
    return gauss_expectation(f->dim(), scheme, [&](std::span<const double> x) {
        return dot(x, x) * integrand_power(*f, x, q);
    });
}

IntegralResult self_mixed(const FunctionPtr& f, double q, const Scheme& scheme) {
    if (q == 0.0) fail(Errc::zero_q, "self-mixed identity needs q != 0");
    const int n = f->dim();
    const IntegralResult w = dual_quermassintegral(f, q, scheme);
    const IntegralResult m = weighted_second_moment(f, q, scheme);
    IntegralResult r;
    r.scheme = scheme;
    r.value = ((n - q) * w.value - m.value) / q;
    r.stderr_est = std::sqrt(std::pow((n - q) * w.stderr_est, 2) + m.stderr_est * m.stderr_est) /
                   std::abs(q);
    return r;
}

IntegralResult mixed_integral(const FunctionPtr& f, const FunctionPtr& g, double q,
                              const Scheme& scheme) {
    if (q > 0.0) fail(Errc::invalid_argument, "mixed integral formula needs q <= 0");
    if (f->dim() != g->dim()) fail(Errc::dimension_mismatch, "mixed integral dim mismatch");
    const FunctionPtr gstar = conjugate_of(g);
    return gauss_expectation(f->dim(), scheme, [&](std::span<const double> x) {
        const GradientResult grad = f->gradient(x);
        const ExtReal gs = gstar->value(grad.g);
        if (!gs.is_finite())
            fail(Errc::conjugate_unbounded, "grad f leaves dom g* at a quadrature node");
        const ExtReal w = pow_ext(f->value(x), -q);
        if (!w.is_finite()) fail(Errc::diverged, "weight f^{-q} is +inf at a node");
        return gs.value() * w.value();
    });
}

namespace {

// Difference quotients of t -> value(t) at 0+, over the schedule, with one
// Richardson pass assuming value(t) = v0 + c1 t + O(t^2).
IntegralResult one_sided_derivative(const std::function<IntegralResult(double)>& at,
                                    const FdSchedule& schedule, const Scheme& scheme) {
    const Vec& ts = schedule.steps;
    if (ts.size() < 2) fail(Errc::invalid_argument, "FD schedule needs >= 2 steps");
    const IntegralResult base = at(0.0);
    Vec quotients(ts.size());
    double qerr = base.stderr_est;
    for (size_t i = 0; i < ts.size(); ++i) {
        const IntegralResult vi = at(ts[i]);
        quotients[i] = (vi.value - base.value) / ts[i];
        qerr = std::max(qerr, vi.stderr_est);
    }
    // Richardson over consecutive steps (assumes roughly halving schedule).
    Vec extrap;
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        const double r = ts[i] / ts[i + 1];
        extrap.push_back((r * quotients[i + 1] - quotients[i]) / (r - 1.0));
    }
    double resid = 0.0;
    for (size_t i = 0; i + 1 < extrap.size(); ++i)
        resid = std::max(resid, std::abs(extrap[i + 1] - extrap[i]));
    // Cauchy check on the raw quotients: differences should shrink.
    if (quotients.size() >= 3) {
        const double d1 = std::abs(quotients[1] - quotients[0]);
        const double d2 = std::abs(quotients[2] - quotients[1]);
        const double scale = std::max({1.0, std::abs(quotients[0]), 10.0 * qerr});
        if (d2 > 2.0 * d1 + 1e-6 * scale + 10.0 * qerr)
            fail(Errc::non_convergent, "difference quotients are not Cauchy across the schedule");
    }
    IntegralResult r;
    r.scheme = scheme;
    r.value = extrap.back();
    r.stderr_est = std::max(resid, qerr / ts.back());
    return r;
}

}  // namespace

IntegralResult mixed_fd(const FunctionPtr& f, const FunctionPtr& g, double q, const Scheme& scheme,
                        const FdSchedule& schedule) {
    if (f->dim() != g->dim()) fail(Errc::dimension_mismatch, "mixed fd dim mismatch");
    // Index n+1-q means the quermassintegral with exponent 1-q and the
    // definition prefactor 1/(q-1).
    const double qq = q - 1.0;
    const auto at = [&](double t) -> IntegralResult {
        if (t == 0.0) return dual_quermassintegral(f, qq, scheme);
        const FunctionPtr combo = inf_convolution(f, right_scalar_mult(g, t));
        return dual_quermassintegral(combo, qq, scheme);
    };
    IntegralResult r = one_sided_derivative(at, schedule, scheme);
    r.value /= qq;
    r.stderr_est /= std::abs(qq);
    return r;
}

IntegralResult bm_flow_derivative_fd(const FunctionPtr& f, const FunctionPtr& g, double q,
                                     const Scheme& scheme, const FdSchedule& schedule) {
    const double qq = q - 1.0;
    const auto at = [&](double t) -> IntegralResult {
        if (t == 0.0) return dual_quermassintegral(f, qq, scheme);
        const FunctionPtr combo =
            inf_convolution(right_scalar_mult(f, 1.0 - t), right_scalar_mult(g, t));
        return dual_quermassintegral(combo, qq, scheme);
    };
    return one_sided_derivative(at, schedule, scheme);
}

IntegralResult power_mean(const FunctionPtr& f, double q, const Scheme& scheme) {
    if (q == 0.0) {
        // geometric mean: exp(integral log f)
        IntegralResult r = gauss_expectation(f->dim(), scheme, [&](std::span<const double> x) {
            const ExtReal v = f->value(x);
            if (!v.is_finite() || v.value() <= 0.0)
                fail(Errc::log_of_zero, "log of a non-positive value at a node");
            return std::log(v.value());
        });
        const double value = std::exp(r.value);
        return IntegralResult{value, value * r.stderr_est, scheme};
    }
    IntegralResult r = dual_quermassintegral(f, q, scheme);
    const double value = std::pow(r.value, -1.0 / q);
    const double deriv = std::abs(value / (q * r.value));
    return IntegralResult{value, deriv * r.stderr_est, scheme};
}

}  // namespace fdm
