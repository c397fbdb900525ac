#ifndef FDM_CORE_QUADRATURE_HPP
#define FDM_CORE_QUADRATURE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace fdm {

// Gaussian-weighted quadrature scheme. hermite is tensorized Gauss-Hermite
// (deterministic, dim <= 3), mc plain Monte Carlo, qmc scrambled Halton with
// randomized replicates for an error estimate.
struct Scheme {
    enum class Kind { hermite, monte_carlo, quasi_mc };
    Kind kind = Kind::hermite;
    int n = 64;              // nodes per axis (hermite) or total samples (mc/qmc)
    std::uint64_t seed = 0;  // recorded for reproducibility

    static Scheme parse(const std::string& text, std::uint64_t seed);
    std::string to_string() const;
};

struct IntegralResult {
    double value = 0.0;
    double stderr_est = 0.0;  // 0 for deterministic schemes
    Scheme scheme;
};

// Nodes x_i and weights w_i of the n-point Gauss rule for weight e^{-x^2}.
void gauss_hermite(int n, Vec& nodes, Vec& weights);

// Nodes and weights on [-1, 1].
void gauss_legendre(int n, Vec& nodes, Vec& weights);

// E_{gamma_n}[f], f evaluated at points of R^dim. Evaluations run in parallel
// over pre-assigned slots; the reduction is a fixed pairwise tree.
IntegralResult gauss_expectation(int dim, const Scheme& scheme,
                                 const std::function<double(std::span<const double>)>& f);

// Integral of f over [a, b] with panelized Gauss-Legendre (no weight folded in).
double integrate_interval(double a, double b, int points_per_panel, double max_panel_width,
                          const std::function<double(double)>& f);

}  // namespace fdm

#endif
