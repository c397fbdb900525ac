#ifndef FDM_CORE_DUAL_CURVATURE_HPP
#define FDM_CORE_DUAL_CURVATURE_HPP

#include <cstdint>

#include "core/cells.hpp"

namespace fdm {

// Finite atomic measure with strictly positive weights and pairwise distinct
// atom locations.
struct DiscreteMeasure {
    struct Atom {
        Vec location;
        double weight;
    };
    int dim = 1;
    std::vector<Atom> atoms;

    void validate() const;
    double total_mass() const;
};

// Weighted sample cloud: the Monte-Carlo image of (grad f)_# (f^{-q} gamma_n).
struct EmpiricalMeasure {
    struct Sample {
        Vec location;
        double weight;
    };
    int dim = 1;
    std::vector<Sample> samples;
    std::uint64_t seed = 0;
    long long count = 0;

    double total_weight() const;
};

// Atomic dual curvature measure of a max-affine h for q <= 0: atoms at the
// piece slopes, weight_i = integral_{cell_i} h^{-q} dgamma. Empty cells are
// dropped.
DiscreteMeasure dual_curvature_semidiscrete(const MaxAffine& h, double q, const Scheme& scheme);

EmpiricalMeasure dual_curvature_empirical(const FunctionPtr& f, double q, long long n,
                                          std::uint64_t seed);

// Collapse empirical samples whose locations coincide (within tol) into a
// discrete measure; exact-slope images of max-affine gradients cluster
// perfectly.
DiscreteMeasure cluster_empirical(const EmpiricalMeasure& e, double tol = 1e-9);

// Total variation on matched atoms: unmatched mass counts fully.
double tv_distance(const DiscreteMeasure& a, const DiscreteMeasure& b, double match_tol = 1e-9);
DiscreteMeasure normalized(const DiscreteMeasure& m);

struct BridgeResult {
    double lhs;  // Gaussian functional of the gauge
    double rhs;  // n (2pi)^{-n/2} 2^{(n-q)/2-1} Gamma((n-q)/2) * W_{n-q}(K)
    double body_quermass;
};

// Both sides of the body bridge identity for the polytope K described by its
// gauge (a max-affine function); q < n. dim 1 and 2.
BridgeResult body_bridge_check(const MaxAffine& gauge, double q);

struct SupportTest {
    double sigma;  // sqrt of the smallest eigenvalue of the mass-weighted second moment
    bool degenerate;
};

// Uncentered: the existence theory excludes support in a lower-dimensional
// subspace through the origin.
SupportTest hyperplane_support_test(const DiscreteMeasure& m, double tol = 1e-8);
SupportTest hyperplane_support_test(const EmpiricalMeasure& m, double tol = 1e-8);

struct ValuationReport {
    bool exact_path = false;      // 1D max-affine pair: atom multiset comparison
    double max_discrepancy = 0.0; // TV (exact path) or worst dictionary gap
    double stderr_est = 0.0;
    bool pass = false;
};

// C(f,.) + C(g,.) vs C(min,.) + C(max,.), defined when min{f,g} is convex.
ValuationReport valuation_check(const FunctionPtr& f, const FunctionPtr& g, double q,
                                const Scheme& scheme);

// Pointwise min of two 1D max-affine functions; sets *is_convex, and returns
// a usable MaxAffine only when convex.
MaxAffine min_of_max_affine_1d(const MaxAffine& f, const MaxAffine& g, bool* is_convex);
MaxAffine max_of_max_affine(const MaxAffine& f, const MaxAffine& g);

}  // namespace fdm

#endif
