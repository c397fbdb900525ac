#ifndef FDM_CORE_SOLVER_HPP
#define FDM_CORE_SOLVER_HPP

#include "core/dual_curvature.hpp"

namespace fdm {

struct SolverOptions {
    double q = 0.0;  // problem parameter, must be <= 0
    int max_iterations = 500;
    double tol = 1e-9;                  // projected-gradient sup-norm
    double backtrack_factor = 0.5;
    double sufficient_decrease = 1e-4;  // Armijo constant
    Scheme scheme = Scheme{};           // used for dim >= 3 and for verification
    std::uint64_t seed = 0;
    enum class Init { zeros, random } init = Init::zeros;
    double init_scale = 0.1;

    void validate() const {
        if (q > 0.0) fail(Errc::invalid_argument, "the solver handles q <= 0 only");
        if (!(tol > 0.0)) fail(Errc::invalid_argument, "tol must be positive");
        if (max_iterations < 1) fail(Errc::invalid_argument, "max_iterations must be >= 1");
    }
};

struct TracePoint {
    double objective;
    double grad_norm;  // projected-gradient sup-norm
};

struct SolveResult {
    Vec v;                      // normalized values at the atoms (inf h = 0)
    std::vector<PointHull::Support> phi0;     // the minimizer f as (x_i, v_i)
    std::optional<MaxAffine> phi0_star;       // h = f*, normalized
    double tau = 0.0;           // |mu| / W_{n-q}(h)
    std::vector<TracePoint> trace;
    DiscreteMeasure recovered;  // tau * C_q(h, .)
    double residual_tv = 0.0;   // TV(mu/|mu|, recovered/|recovered|)
    int iterations = 0;
    bool converged = false;
};

// Throws EmptyMeasure / SupportDegenerate.
void validate_measure(const DiscreteMeasure& mu);

// The feasible representative of v: shifted so inf_y h_v(y) = 0. Throws
// UnboundedBelow when 0 is outside conv(atoms).
Vec solver_normalize(const DiscreteMeasure& mu, const Vec& v);

// Psi(v) = |mu|^{-1} sum_i w_i f_v(x_i) - exp(-W(h_v)), where f_v is the
// lower envelope of (x_i, v_i), h_v its conjugate max-affine, and
// W(h) = (integral h^{1-q} dgamma)^{1/(1-q)}. With normalize_shift the W term
// is evaluated on h_v - inf h_v (the feasible representative); without it the
// raw h_v is used, which is the function the analytic gradient
// differentiates.
double solver_objective(const DiscreteMeasure& mu, double q, const Vec& v,
                        const SolverOptions& opts, bool normalize_shift = true);

// dPsi/dv_i = w_i/|mu| - e^{-W} W^q m_i with m_i the Gaussian cell mass of
// piece i under h^{-q}, evaluated on the normalized h.
Vec solver_objective_gradient(const DiscreteMeasure& mu, double q, const Vec& v,
                              const SolverOptions& opts);

SolveResult solve_minkowski(const DiscreteMeasure& mu, const SolverOptions& opts);

struct VerifyReport {
    double tv_normalized = 0.0;       // independent-scheme recovered vs mu
    double tau_identity_lhs = 0.0;    // 1 / W_{n-q}(h)
    double tau_identity_rhs = 0.0;    // Wbar^q e^{-Wbar}
    double tau_identity_residual = 0.0;
    double inf_h = 0.0;               // normalization residual
    double stderr_est = 0.0;
};

VerifyReport verify_solution(const DiscreteMeasure& mu, double q, const SolveResult& result,
                             const Scheme& scheme);

}  // namespace fdm

#endif
