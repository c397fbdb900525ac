#ifndef FDM_CORE_CONVEX_OPS_HPP
#define FDM_CORE_CONVEX_OPS_HPP

#include <optional>
#include <utility>

#include "core/functions.hpp"

namespace fdm {

// Sum of convex functions; +inf absorbs. Internal: appears as the conjugate
// of an inf-convolution (Prop. (phi [] psi)* = phi* + psi*).
class SumFunction : public ConvexFunction {
public:
    explicit SumFunction(std::vector<FunctionPtr> parts);
    int dim() const override { return dim_; }
    ExtReal value(std::span<const double> x) const override;
    GradientResult gradient(std::span<const double> x) const override;
    const std::vector<FunctionPtr>& parts() const { return parts_; }

private:
    int dim_;
    std::vector<FunctionPtr> parts_;
};

struct SearchBox {
    Vec lo, hi;
};

// Evaluable inf-convolution: value(x) = sup_y (<x,y> - f*(y) - g*(y)).
// Exact in 1D (piecewise linear/quadratic segment scan) and for pairs of
// max-affine inputs in any dimension (LP); otherwise concave coordinate
// search with golden-section refinement over a search box.
class InfConvolution : public ConvexFunction {
public:
    InfConvolution(FunctionPtr f, FunctionPtr g, std::optional<SearchBox> box);

    int dim() const override { return dim_; }
    ExtReal value(std::span<const double> x) const override;
    GradientResult gradient(std::span<const double> x) const override;

    FunctionPtr left() const { return f_; }
    FunctionPtr right() const { return g_; }
    // f* + g*, exact.
    FunctionPtr conjugate_sum() const { return conj_sum_; }

private:
    ExtReal maximize(std::span<const double> x, Vec* argmax) const;
    ExtReal maximize_exact_1d(double x, double* argmax) const;
    ExtReal maximize_lp(std::span<const double> x, Vec* argmax) const;
    ExtReal maximize_search(std::span<const double> x, Vec* argmax) const;

    int dim_;
    FunctionPtr f_, g_;
    std::vector<FunctionPtr> conj_parts_;  // flattened summands of f* + g*
    FunctionPtr conj_sum_;
    std::optional<SearchBox> box_;
    bool exact_1d_ = false;
    bool lp_path_ = false;
};

// Exact conjugate dispatch: MaxAffine <-> PointHull data swap, closed-form
// Quadratic, sum rule for inf-convolutions. Grid inputs use grid_conjugate
// with a slope-range dual box.
FunctionPtr conjugate_of(const FunctionPtr& f);

// Discrete Legendre transform onto an explicit dual grid, computed by the
// per-axis lower-envelope (monotone argmax) sweep. Equals the brute-force
// discrete sup over the grid exactly.
GridFunction grid_conjugate(const GridFunction& f, Vec dual_lo, Vec dual_hi,
                            std::vector<int> dual_shape);

FunctionPtr inf_convolution(const FunctionPtr& f, const FunctionPtr& g,
                            std::optional<SearchBox> box = std::nullopt);

FunctionPtr right_scalar_mult(const FunctionPtr& f, double t);

// Gauge of the polytope K whose polar has vertex set U: max_u <u, x>.
MaxAffine gauge_from_polar_vertices(int dim, const std::vector<Vec>& polar_vertices);

// Vertices of the regular m-gon on the unit circle (polar description of the
// m-gon approximation of the unit disc).
std::vector<Vec> regular_polygon_vertices(int m);

struct NormalizeResult {
    MaxAffine normalized;  // h - shift, with inf = 0
    double shift;          // inf h
    Vec argmin;            // a point attaining the infimum
};

// Shift h so that inf h = 0. The infimum comes from the envelope LP at the
// origin (inf h = -h*(0)); UnboundedBelow when 0 is outside conv{slopes}.
NormalizeResult normalize_at_origin(const MaxAffine& h);

struct ConvexityReport {
    double worst_violation = 0.0;
    bool pass = true;
    std::vector<int> worst_index;      // grid index of the worst midpoint
    std::vector<int> worst_direction;  // direction of the violating segment
};

// Midpoint convexity along every axis-aligned and diagonal grid direction.
ConvexityReport check_convexity_grid(const GridFunction& g, double tol = 1e-8);

// Sorted breakpoints of a 1D max-affine upper envelope together with the
// active piece on each interval (used by cells and the exact 1D paths).
struct Envelope1D {
    Vec breakpoints;                // size k
    std::vector<int> active_piece;  // size k+1, piece index per interval
};
Envelope1D upper_envelope_1d(const MaxAffine& h);

}  // namespace fdm

#endif
