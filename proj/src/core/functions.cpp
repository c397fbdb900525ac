#include "core/functions.hpp"

#include <algorithm>
#include <cmath>

#include "core/linprog.hpp"

namespace fdm {

MaxAffine::MaxAffine(int dim, std::vector<Piece> pieces) : dim_(dim) {
    if (dim < 1) fail(Errc::invalid_argument, "MaxAffine needs dim >= 1");
    if (pieces.empty()) fail(Errc::invalid_argument, "MaxAffine needs at least one piece");
    for (const auto& p : pieces) {
        if (static_cast<int>(p.slope.size()) != dim)
            fail(Errc::dimension_mismatch, "piece slope has wrong length");
        for (double v : p.slope)
            if (!std::isfinite(v)) fail(Errc::invalid_argument, "non-finite slope");
        if (!std::isfinite(p.intercept)) fail(Errc::invalid_argument, "non-finite intercept");
    }
    // Merge identical slopes, keeping the smaller intercept (larger piece).
    for (auto& p : pieces) {
        bool merged = false;
        for (auto& q : pieces_) {
            if (q.slope == p.slope) {
                q.intercept = std::min(q.intercept, p.intercept);
                merged = true;
                break;
            }
        }
        if (!merged) pieces_.push_back(std::move(p));
    }
}

ExtReal MaxAffine::value(std::span<const double> x) const {
    check_dim(x);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) best = std::max(best, dot(p.slope, x) - p.intercept);
    return ExtReal(best);
}

int MaxAffine::active_index(std::span<const double> x, bool* tied, double tie_tol) const {
    check_dim(x);
    int arg = 0;
    double best = dot(pieces_[0].slope, x) - pieces_[0].intercept;
    for (int i = 1; i < static_cast<int>(pieces_.size()); ++i) {
        const double v = dot(pieces_[i].slope, x) - pieces_[i].intercept;
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    if (tied) {
        *tied = false;
        const double scale = std::max(1.0, std::abs(best));
        for (int i = 0; i < static_cast<int>(pieces_.size()); ++i) {
            if (i == arg) continue;
            const double v = dot(pieces_[i].slope, x) - pieces_[i].intercept;
            if (std::abs(v - best) <= tie_tol * scale) {
                *tied = true;
                break;
            }
        }
    }
    return arg;
}

GradientResult MaxAffine::gradient(std::span<const double> x) const {
    bool tied = false;
    const int i = active_index(x, &tied);
    return GradientResult{pieces_[i].slope, !tied};
}

PointHull::PointHull(int dim, std::vector<Support> points) : dim_(dim), points_(std::move(points)) {
    if (dim < 1) fail(Errc::invalid_argument, "PointHull needs dim >= 1");
    if (points_.empty()) fail(Errc::invalid_argument, "PointHull needs at least one point");
    for (const auto& p : points_) {
        if (static_cast<int>(p.location.size()) != dim)
            fail(Errc::dimension_mismatch, "point location has wrong length");
        if (!std::isfinite(p.value)) fail(Errc::invalid_argument, "non-finite point value");
    }
}

void PointHull::build_envelope_1d() const {
    if (envelope_ready_) return;
    std::vector<int> order(points_.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (points_[a].location[0] != points_[b].location[0])
            return points_[a].location[0] < points_[b].location[0];
        return points_[a].value < points_[b].value;
    });
    // Drop duplicate abscissae (keep the lower value), then Graham-style scan.
    std::vector<int> uniq;
    for (int idx : order) {
        if (!uniq.empty() && points_[idx].location[0] == points_[uniq.back()].location[0]) continue;
        uniq.push_back(idx);
    }
    hull_order_.clear();
    for (int idx : uniq) {
        const double x = points_[idx].location[0];
        const double v = points_[idx].value;
        while (hull_order_.size() >= 2) {
            const auto& p1 = points_[hull_order_[hull_order_.size() - 2]];
            const auto& p2 = points_[hull_order_[hull_order_.size() - 1]];
            const double cross = (p2.location[0] - p1.location[0]) * (v - p1.value) -
                                 (x - p1.location[0]) * (p2.value - p1.value);
            if (cross <= 0.0)
                hull_order_.pop_back();
            else
                break;
        }
        hull_order_.push_back(idx);
    }
    envelope_ready_ = true;
}

ExtReal PointHull::value_with_weights(std::span<const double> x, Vec* lambda) const {
    check_dim(x);
    if (lambda) lambda->assign(points_.size(), 0.0);

    if (dim_ == 1) {
        build_envelope_1d();
        const double t = x[0];
        const auto& first = points_[hull_order_.front()];
        const auto& last = points_[hull_order_.back()];
        const double eps = 1e-12 * std::max({1.0, std::abs(first.location[0]),
                                             std::abs(last.location[0])});
        if (t < first.location[0] - eps || t > last.location[0] + eps)
            return ExtReal::infinity();
        if (hull_order_.size() == 1 || t <= first.location[0]) {
            if (lambda) (*lambda)[hull_order_.front()] = 1.0;
            return ExtReal(first.value);
        }
        if (t >= last.location[0]) {
            if (lambda) (*lambda)[hull_order_.back()] = 1.0;
            return ExtReal(last.value);
        }
        // binary search for the segment containing t
        size_t lo = 0, hi = hull_order_.size() - 1;
        while (hi - lo > 1) {
            const size_t mid = (lo + hi) / 2;
            if (points_[hull_order_[mid]].location[0] <= t)
                lo = mid;
            else
                hi = mid;
        }
        const auto& pa = points_[hull_order_[lo]];
        const auto& pb = points_[hull_order_[hi]];
        const double w = (t - pa.location[0]) / (pb.location[0] - pa.location[0]);
        if (lambda) {
            (*lambda)[hull_order_[lo]] = 1.0 - w;
            (*lambda)[hull_order_[hi]] = w;
        }
        return ExtReal(pa.value + w * (pb.value - pa.value));
    }

    // LP: min sum(lambda_i v_i) s.t. sum(lambda_i x_i) = x, sum(lambda_i) = 1.
    const int m = static_cast<int>(points_.size());
    std::vector<Vec> rows(dim_ + 1, Vec(m, 0.0));
    Vec rhs(dim_ + 1, 0.0), cost(m, 0.0);
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < dim_; ++k) rows[k][j] = points_[j].location[k];
        rows[dim_][j] = 1.0;
        cost[j] = points_[j].value;
    }
    for (int k = 0; k < dim_; ++k) rhs[k] = x[k];
    rhs[dim_] = 1.0;
    const LpResult lp = solve_lp(rows, rhs, cost);
    if (lp.status != LpResult::Status::optimal) return ExtReal::infinity();
    if (lambda) *lambda = lp.x;
    return ExtReal(lp.objective);
}

ExtReal PointHull::value(std::span<const double> x) const { return value_with_weights(x, nullptr); }

GradientResult PointHull::gradient(std::span<const double> x) const {
    check_dim(x);
    if (dim_ != 1) fail(Errc::invalid_argument, "PointHull gradient implemented for dim 1 only");
    build_envelope_1d();
    const double t = x[0];
    const auto& first = points_[hull_order_.front()];
    const auto& last = points_[hull_order_.back()];
    if (t <= first.location[0] || t >= last.location[0])
        fail(Errc::out_of_domain, "gradient needs an interior point of the hull");
    size_t lo = 0, hi = hull_order_.size() - 1;
    while (hi - lo > 1) {
        const size_t mid = (lo + hi) / 2;
        if (points_[hull_order_[mid]].location[0] <= t)
            lo = mid;
        else
            hi = mid;
    }
    const auto& pa = points_[hull_order_[lo]];
    const auto& pb = points_[hull_order_[hi]];
    const double slope = (pb.value - pa.value) / (pb.location[0] - pa.location[0]);
    const bool at_vertex = std::abs(t - pa.location[0]) < 1e-12 || std::abs(t - pb.location[0]) < 1e-12;
    return GradientResult{Vec{slope}, !at_vertex};
}

GridFunction::GridFunction(int dim, Vec lo, Vec hi, std::vector<int> shape, Vec values)
    : dim_(dim), lo_(std::move(lo)), hi_(std::move(hi)), shape_(std::move(shape)),
      values_(std::move(values)) {
    if (dim < 1) fail(Errc::invalid_argument, "GridFunction needs dim >= 1");
    if (static_cast<int>(lo_.size()) != dim || static_cast<int>(hi_.size()) != dim ||
        static_cast<int>(shape_.size()) != dim)
        fail(Errc::dimension_mismatch, "box/shape arity mismatch");
    size_t total = 1;
    for (int k = 0; k < dim; ++k) {
        if (shape_[k] < 2) fail(Errc::invalid_argument, "need >= 2 samples per axis");
        if (!(hi_[k] > lo_[k])) fail(Errc::invalid_argument, "degenerate box");
        total *= static_cast<size_t>(shape_[k]);
    }
    if (values_.size() != total) fail(Errc::schema_error, "shape product != values length");
    for (double v : values_)
        if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
            fail(Errc::invalid_argument, "grid values must be finite or +inf");
}

size_t GridFunction::flat_index(std::span<const int> idx) const {
    size_t flat = 0;
    for (int k = 0; k < dim_; ++k) flat = flat * static_cast<size_t>(shape_[k]) + idx[k];
    return flat;
}

ExtReal GridFunction::value(std::span<const double> x) const {
    check_dim(x);
    std::vector<int> base(dim_);
    Vec frac(dim_);
    for (int k = 0; k < dim_; ++k) {
        const double h = spacing(k);
        const double t = (x[k] - lo_[k]) / h;
        if (t < -1e-9 || t > shape_[k] - 1 + 1e-9)
            fail(Errc::out_of_domain, "point outside grid box");
        int i = static_cast<int>(std::floor(t));
        i = std::clamp(i, 0, shape_[k] - 2);
        base[k] = i;
        frac[k] = std::clamp(t - i, 0.0, 1.0);
    }
    double acc = 0.0;
    std::vector<int> corner(dim_);
    const int corners = 1 << dim_;
    for (int mask = 0; mask < corners; ++mask) {
        double w = 1.0;
        for (int k = 0; k < dim_; ++k) {
            const bool up = mask & (1 << k);
            corner[k] = base[k] + (up ? 1 : 0);
            w *= up ? frac[k] : 1.0 - frac[k];
        }
        if (w == 0.0) continue;
        const double v = values_[flat_index(corner)];
        if (!std::isfinite(v)) return ExtReal::infinity();
        acc += w * v;
    }
    return ExtReal(acc);
}

GradientResult GridFunction::gradient(std::span<const double> x) const {
    check_dim(x);
    GradientResult r;
    r.g.resize(dim_);
    Vec xp(x.begin(), x.end());
    for (int k = 0; k < dim_; ++k) {
        const double h = spacing(k);
        if (x[k] - h < lo_[k] - 1e-12 || x[k] + h > hi_[k] + 1e-12)
            fail(Errc::out_of_domain, "gradient needs one cell of clearance from the boundary");
        xp[k] = x[k] + h;
        const ExtReal fp = value(xp);
        xp[k] = x[k] - h;
        const ExtReal fm = value(xp);
        xp[k] = x[k];
        if (!fp.is_finite() || !fm.is_finite())
            fail(Errc::out_of_domain, "gradient stencil hits +inf values");
        r.g[k] = (fp.value() - fm.value()) / (2.0 * h);
    }
    return r;
}

GridFunction GridFunction::sample(const ConvexFunction& f, Vec lo, Vec hi, std::vector<int> shape) {
    const int d = f.dim();
    size_t total = 1;
    for (int k = 0; k < d; ++k) total *= static_cast<size_t>(shape[k]);
    Vec values(total);
    std::vector<int> idx(d, 0);
    Vec pt(d);
    for (size_t flat = 0; flat < total; ++flat) {
        size_t rest = flat;
        for (int k = d - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(rest % shape[k]);
            rest /= shape[k];
        }
        for (int k = 0; k < d; ++k)
            pt[k] = lo[k] + (hi[k] - lo[k]) * idx[k] / (shape[k] - 1);
        const ExtReal v = f.value(pt);
        values[flat] = v.is_finite() ? v.value() : std::numeric_limits<double>::infinity();
    }
    return GridFunction(d, std::move(lo), std::move(hi), std::move(shape), std::move(values));
}

Quadratic::Quadratic(int dim, std::vector<Vec> a, Vec b, double c)
    : dim_(dim), a_(std::move(a)), b_(std::move(b)), c_(c) {
    if (dim < 1) fail(Errc::invalid_argument, "Quadratic needs dim >= 1");
    if (static_cast<int>(a_.size()) != dim || static_cast<int>(b_.size()) != dim)
        fail(Errc::dimension_mismatch, "Quadratic arity mismatch");
    a_inv_ = spd_inverse(a_);
}

Quadratic Quadratic::isotropic(int dim, double coeff, Vec center, double offset) {
    if (coeff <= 0.0) fail(Errc::invalid_argument, "isotropic quadratic needs coeff > 0");
    if (center.empty()) center.assign(dim, 0.0);
    // coeff*|x - center|^2/2 + offset
    std::vector<Vec> a(dim, Vec(dim, 0.0));
    Vec b(dim, 0.0);
    double c = offset;
    for (int k = 0; k < dim; ++k) {
        a[k][k] = coeff;
        b[k] = -coeff * center[k];
        c += 0.5 * coeff * center[k] * center[k];
    }
    return Quadratic(dim, std::move(a), std::move(b), c);
}

ExtReal Quadratic::value(std::span<const double> x) const {
    check_dim(x);
    double q = 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) q += x[i] * a_[i][j] * x[j];
    return ExtReal(0.5 * q + dot(b_, x) + c_);
}

GradientResult Quadratic::gradient(std::span<const double> x) const {
    check_dim(x);
    GradientResult r;
    r.g.assign(dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) r.g[i] += a_[i][j] * x[j];
        r.g[i] += b_[i];
    }
    return r;
}

Quadratic Quadratic::conjugate() const {
    // f*(y) = (y-b)'A^{-1}(y-b)/2 - c
    std::vector<Vec> a_star = a_inv_;
    Vec b_star(dim_, 0.0);
    double c_star = -c_;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) b_star[i] -= a_inv_[i][j] * b_[j];
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) c_star += 0.5 * b_[i] * a_inv_[i][j] * b_[j];
    return Quadratic(dim_, std::move(a_star), std::move(b_star), c_star);
}

Quadratic Quadratic::right_scalar_mult(double t) const {
    if (t <= 0.0) fail(Errc::non_positive_scale, "right scalar multiplication needs t > 0");
    // t f(x/t): A/t, b unchanged, c*t
    std::vector<Vec> a = a_;
    for (auto& row : a)
        for (auto& v : row) v /= t;
    return Quadratic(dim_, std::move(a), b_, c_ * t);
}

Quadratic Quadratic::inf_convolve(const Quadratic& other) const {
    if (other.dim_ != dim_) fail(Errc::dimension_mismatch, "inf-convolution dim mismatch");
    // (f [] g)* = f* + g*, and the sum of two quadratics is quadratic.
    const Quadratic fs = conjugate();
    const Quadratic gs = other.conjugate();
    std::vector<Vec> a(dim_, Vec(dim_, 0.0));
    Vec b(dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) a[i][j] = fs.a_[i][j] + gs.a_[i][j];
        b[i] = fs.b_[i] + gs.b_[i];
    }
    return Quadratic(dim_, std::move(a), std::move(b), fs.c_ + gs.c_).conjugate();
}

std::vector<Vec> spd_inverse(const std::vector<Vec>& a) {
    const int n = static_cast<int>(a.size());
    // Cholesky a = L L'
    std::vector<Vec> l(n, Vec(n, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            if (i == j) {
                if (s <= 0.0) fail(Errc::invalid_argument, "matrix is not positive definite");
                l[i][i] = std::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    std::vector<Vec> inv(n, Vec(n, 0.0));
    Vec col(n);
    for (int rhs = 0; rhs < n; ++rhs) {
        for (int i = 0; i < n; ++i) {
            double s = (i == rhs) ? 1.0 : 0.0;
            for (int k = 0; k < i; ++k) s -= l[i][k] * col[k];
            col[i] = s / l[i][i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = col[i];
            for (int k = i + 1; k < n; ++k) s -= l[k][i] * inv[k][rhs];
            inv[i][rhs] = s / l[i][i];
        }
    }
    return inv;
}

double smallest_eigenvalue_symmetric(const std::vector<Vec>& a_in) {
    // Cyclic Jacobi; dimensions here are <= 6.
    std::vector<Vec> a = a_in;
    const int n = static_cast<int>(a.size());
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-28) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    double lmin = a[0][0];
    for (int i = 1; i < n; ++i) lmin = std::min(lmin, a[i][i]);
    return lmin;
}

}  // namespace fdm
