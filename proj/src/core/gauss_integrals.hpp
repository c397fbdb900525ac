#ifndef FDM_CORE_GAUSS_INTEGRALS_HPP
#define FDM_CORE_GAUSS_INTEGRALS_HPP

#include "core/convex_ops.hpp"
#include "core/quadrature.hpp"

namespace fdm {

// W(f, q) = integral of f^{-q} over the standard Gaussian. q = 0 returns 1
// exactly (gamma_n is a probability measure).
IntegralResult dual_quermassintegral(const FunctionPtr& f, double q, const Scheme& scheme);

// Normalized version: (integral f^{-q})^{1/q} for q != 0;
// exp(-integral log f) for q = 0.
IntegralResult normalized_quermassintegral(const FunctionPtr& f, double q, const Scheme& scheme);

// integral |x|^2 f(x)^{-q} dgamma.
IntegralResult weighted_second_moment(const FunctionPtr& f, double q, const Scheme& scheme);

// Self-mixed value via the identity
//   q W(f,f) = (n-q) W(f) - integral |x|^2 f^{-q} dgamma,  q != 0.
IntegralResult self_mixed(const FunctionPtr& f, double q, const Scheme& scheme);

// Mixed quermassintegral at index n+1-q by the integral formula:
//   integral g*(grad f(y)) f(y)^{-q} dgamma(y),  q <= 0.
// Non-smooth points of f use the lowest-index tie-break.
IntegralResult mixed_integral(const FunctionPtr& f, const FunctionPtr& g, double q,
                              const Scheme& scheme);

struct FdSchedule {
    Vec steps = {1e-2, 5e-3, 2.5e-3};  // one-sided, t -> 0+
};

// Same quantity via the limit definition: one-sided difference quotients of
// t -> integral (f [](g t))^{1-q} dgamma with one Richardson pass, divided by
// (q-1). The extrapolation residual is reported as the stderr surrogate.
IntegralResult mixed_fd(const FunctionPtr& f, const FunctionPtr& g, double q, const Scheme& scheme,
                        const FdSchedule& schedule = {});

// Derivative of t -> W_{n+1-q}([f(1-t)] [] [g t]) at t = 0+, same finite
// difference machinery. Equals (q-1)[mixed(f,g) - mixed(f,f)].
IntegralResult bm_flow_derivative_fd(const FunctionPtr& f, const FunctionPtr& g, double q,
                                     const Scheme& scheme, const FdSchedule& schedule = {});

// Jensen map value(q) = (integral f^{-q})^{-1/q}, the power mean that is
// monotone increasing in -q.
IntegralResult power_mean(const FunctionPtr& f, double q, const Scheme& scheme);

}  // namespace fdm

#endif
