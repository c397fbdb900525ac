#ifndef FDM_CORE_FUNCTIONS_HPP
#define FDM_CORE_FUNCTIONS_HPP

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "core/common.hpp"

namespace fdm {

struct GradientResult {
    Vec g;
    bool is_smooth = true;  // false when >= 2 max-affine pieces tie at x
};

// Convex function as a value R^dim -> R ∪ {+inf}. All concrete types are
// immutable after construction and safe to share across threads.
class ConvexFunction {
public:
    virtual ~ConvexFunction() = default;
    virtual int dim() const = 0;
    virtual ExtReal value(std::span<const double> x) const = 0;
    virtual GradientResult gradient(std::span<const double> x) const = 0;

protected:
    void check_dim(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dim())
            fail(Errc::dimension_mismatch, "point has wrong dimension");
    }
};

using FunctionPtr = std::shared_ptr<const ConvexFunction>;

// f(x) = max_i (<a_i, x> - c_i). Pieces with identical slope vectors are
// merged at construction keeping the smaller intercept.
class MaxAffine : public ConvexFunction {
public:
    struct Piece {
        Vec slope;
        double intercept;
    };

    MaxAffine(int dim, std::vector<Piece> pieces);

    int dim() const override { return dim_; }
    ExtReal value(std::span<const double> x) const override;
    GradientResult gradient(std::span<const double> x) const override;

    const std::vector<Piece>& pieces() const { return pieces_; }
    // Lowest-index maximizing piece; ties within tie_tol set *tied.
    int active_index(std::span<const double> x, bool* tied = nullptr,
                     double tie_tol = 1e-12) const;

private:
    int dim_;
    std::vector<Piece> pieces_;
};

// Lower convex envelope of points (x_i, v_i); +inf outside conv{x_i}.
// Evaluation solves the simplex-weight program: exact in 1D via the hull,
// by LP otherwise.
class PointHull : public ConvexFunction {
public:
    struct Support {
        Vec location;
        double value;
    };

    PointHull(int dim, std::vector<Support> points);

    int dim() const override { return dim_; }
    ExtReal value(std::span<const double> x) const override;
    // Subgradient on the hull interior; OutOfDomain outside.
    GradientResult gradient(std::span<const double> x) const override;

    const std::vector<Support>& points() const { return points_; }

    // Hull-envelope value together with the simplex weights lambda realizing
    // it (zero for unused points). +inf => infeasible location.
    ExtReal value_with_weights(std::span<const double> x, Vec* lambda) const;

private:
    void build_envelope_1d() const;
    int dim_;
    std::vector<Support> points_;
    // 1D fast path: hull breakpoints sorted by location.
    mutable bool envelope_ready_ = false;
    mutable std::vector<int> hull_order_;  // indices of hull vertices, ascending x
};

// Samples of a convex function on a box grid, row-major, +inf allowed.
class GridFunction : public ConvexFunction {
public:
    GridFunction(int dim, Vec lo, Vec hi, std::vector<int> shape, Vec values);

    int dim() const override { return dim_; }
    // Multilinear interpolation; +inf if any participating corner is +inf;
    // OutOfDomain outside the box.
    ExtReal value(std::span<const double> x) const override;
    // Central differences with step = grid spacing; requires one cell of
    // clearance from the boundary.
    GradientResult gradient(std::span<const double> x) const override;

    const Vec& lo() const { return lo_; }
    const Vec& hi() const { return hi_; }
    const std::vector<int>& shape() const { return shape_; }
    const Vec& values() const { return values_; }
    double spacing(int axis) const { return (hi_[axis] - lo_[axis]) / (shape_[axis] - 1); }
    double node_coord(int axis, int idx) const { return lo_[axis] + spacing(axis) * idx; }
    size_t flat_index(std::span<const int> idx) const;

    static GridFunction sample(const ConvexFunction& f, Vec lo, Vec hi, std::vector<int> shape);

private:
    int dim_;
    Vec lo_, hi_;
    std::vector<int> shape_;
    Vec values_;
};

// f(x) = x'Ax/2 + <b,x> + c with A symmetric positive definite. Closed under
// conjugation, right scalar multiplication and infimal convolution, which is
// what makes the closed-form test battery exact.
class Quadratic : public ConvexFunction {
public:
    Quadratic(int dim, std::vector<Vec> a, Vec b, double c);
    static Quadratic isotropic(int dim, double coeff, Vec center = {}, double offset = 0.0);

    int dim() const override { return dim_; }
    ExtReal value(std::span<const double> x) const override;
    GradientResult gradient(std::span<const double> x) const override;

    Quadratic conjugate() const;
    Quadratic right_scalar_mult(double t) const;
    Quadratic inf_convolve(const Quadratic& other) const;

    const std::vector<Vec>& a() const { return a_; }
    const Vec& b() const { return b_; }
    double c() const { return c_; }

private:
    int dim_;
    std::vector<Vec> a_;       // row-major SPD matrix
    std::vector<Vec> a_inv_;   // cached inverse
    Vec b_;
    double c_;
};

// Cholesky-based SPD solve helpers shared by Quadratic and the support tests.
std::vector<Vec> spd_inverse(const std::vector<Vec>& a);
double smallest_eigenvalue_symmetric(const std::vector<Vec>& a);

}  // namespace fdm

#endif
