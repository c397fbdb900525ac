#include "core/convex_ops.hpp"

#include <algorithm>
#include <cmath>

#include "core/linprog.hpp"

namespace fdm {

SumFunction::SumFunction(std::vector<FunctionPtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) fail(Errc::invalid_argument, "SumFunction needs parts");
    dim_ = parts_[0]->dim();
    for (const auto& p : parts_)
        if (p->dim() != dim_) fail(Errc::dimension_mismatch, "summand dims differ");
}

ExtReal SumFunction::value(std::span<const double> x) const {
    double acc = 0.0;
    for (const auto& p : parts_) {
        const ExtReal v = p->value(x);
        if (!v.is_finite()) return ExtReal::infinity();
        acc += v.value();
    }
    return ExtReal(acc);
}

GradientResult SumFunction::gradient(std::span<const double> x) const {
    GradientResult r;
    r.g.assign(dim_, 0.0);
    for (const auto& p : parts_) {
        const GradientResult gr = p->gradient(x);
        for (int k = 0; k < dim_; ++k) r.g[k] += gr.g[k];
        r.is_smooth = r.is_smooth && gr.is_smooth;
    }
    return r;
}

Envelope1D upper_envelope_1d(const MaxAffine& h) {
    if (h.dim() != 1) fail(Errc::dimension_mismatch, "1D envelope of a non-1D function");
    const auto& pieces = h.pieces();
    std::vector<int> order(pieces.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return pieces[a].slope[0] < pieces[b].slope[0];
    });

    Envelope1D env;
    std::vector<int> stack;
    Vec starts;  // starts[j] = where stack[j] becomes active
    for (int idx : order) {
        const double a2 = pieces[idx].slope[0];
        const double c2 = pieces[idx].intercept;
        while (!stack.empty()) {
            const double a1 = pieces[stack.back()].slope[0];
            const double c1 = pieces[stack.back()].intercept;
            // lines with equal slope cannot appear (slopes are deduplicated)
            const double cross = (c2 - c1) / (a2 - a1);
            if (!starts.empty() && cross <= starts.back()) {
                stack.pop_back();
                starts.pop_back();
            } else {
                stack.push_back(idx);
                starts.push_back(cross);
                break;
            }
        }
        if (stack.empty()) stack.push_back(idx);
    }
    env.active_piece = stack;
    env.breakpoints = starts;
    return env;
}

namespace {

// Default dual box for a grid conjugate: the slope range of the samples.
void default_dual_box(const GridFunction& f, Vec& lo, Vec& hi) {
    const int d = f.dim();
    lo.assign(d, 0.0);
    hi.assign(d, 0.0);
    const auto& shape = f.shape();
    const auto& values = f.values();
    std::vector<int> idx(d, 0);
    for (int k = 0; k < d; ++k) {
        double smin = std::numeric_limits<double>::infinity();
        double smax = -std::numeric_limits<double>::infinity();
        const double h = f.spacing(k);
        size_t total = 1;
        for (int j = 0; j < d; ++j) total *= static_cast<size_t>(shape[j]);
        size_t stride = 1;
        for (int j = k + 1; j < d; ++j) stride *= static_cast<size_t>(shape[j]);
        for (size_t flat = 0; flat + stride < total; ++flat) {
            const size_t pos_k = (flat / stride) % static_cast<size_t>(shape[k]);
            if (pos_k + 1 >= static_cast<size_t>(shape[k])) continue;
            const double v0 = values[flat], v1 = values[flat + stride];
            if (!std::isfinite(v0) || !std::isfinite(v1)) continue;
            const double s = (v1 - v0) / h;
            smin = std::min(smin, s);
            smax = std::max(smax, s);
        }
        if (!(smin < smax)) {
            smin = -1.0;
            smax = 1.0;
        }
        const double pad = 0.05 * (smax - smin) + 1e-6;
        lo[k] = smin - pad;
        hi[k] = smax + pad;
    }
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// out[s] = max_j (dual[s]*x[j] + v[j]) for ascending dual[], by monotone
// argmax divide and conquer.
void monotone_max_pass(std::span<const double> x, std::span<const double> v,
                       std::span<const double> dual, std::span<double> out, int slo, int shi,
                       int jlo, int jhi) {
    if (slo > shi) return;
    const int mid = (slo + shi) / 2;
    double best = kNegInf;
    int arg = -1;
    for (int j = jlo; j <= jhi; ++j) {
        if (v[j] == kNegInf) continue;
        const double val = dual[mid] * x[j] + v[j];
        if (val > best) {
            best = val;
            arg = j;
        }
    }
    out[mid] = best;
    const int left_hi = arg < 0 ? jhi : arg;
    const int right_lo = arg < 0 ? jlo : arg;
    monotone_max_pass(x, v, dual, out, slo, mid - 1, jlo, left_hi);
    monotone_max_pass(x, v, dual, out, mid + 1, shi, right_lo, jhi);
}

}  // namespace

GridFunction grid_conjugate(const GridFunction& f, Vec dual_lo, Vec dual_hi,
                            std::vector<int> dual_shape) {
    const int d = f.dim();
    if (static_cast<int>(dual_lo.size()) != d || static_cast<int>(dual_hi.size()) != d ||
        static_cast<int>(dual_shape.size()) != d)
        fail(Errc::dimension_mismatch, "dual box arity mismatch");

    // Working buffer starts as -f with +inf mapped to the skip marker.
    std::vector<int> shape = f.shape();
    Vec buf(f.values().size());
    for (size_t i = 0; i < buf.size(); ++i)
        buf[i] = std::isfinite(f.values()[i]) ? -f.values()[i] : kNegInf;

    for (int axis = 0; axis < d; ++axis) {
        const int n_src = shape[axis];
        const int n_dst = dual_shape[axis];
        Vec src_x(n_src), dual_s(n_dst);
        for (int j = 0; j < n_src; ++j) src_x[j] = f.node_coord(axis, j);
        for (int s = 0; s < n_dst; ++s)
            dual_s[s] = dual_lo[axis] + (dual_hi[axis] - dual_lo[axis]) * s /
                                            (dual_shape[axis] - 1);

        size_t stride = 1;
        for (int j = axis + 1; j < d; ++j) stride *= static_cast<size_t>(shape[j]);
        size_t outer_count = 1;
        for (int j = 0; j < axis; ++j) outer_count *= static_cast<size_t>(shape[j]);

        std::vector<int> out_shape = shape;
        out_shape[axis] = n_dst;
        size_t out_total = 1;
        for (int j = 0; j < d; ++j) out_total *= static_cast<size_t>(out_shape[j]);
        Vec out(out_total);

        Vec line_v(n_src), line_out(n_dst);
        for (size_t outer = 0; outer < outer_count; ++outer) {
            for (size_t inner = 0; inner < stride; ++inner) {
                const size_t src_base = outer * static_cast<size_t>(n_src) * stride + inner;
                const size_t dst_base = outer * static_cast<size_t>(n_dst) * stride + inner;
                for (int j = 0; j < n_src; ++j) line_v[j] = buf[src_base + j * stride];
                monotone_max_pass(src_x, line_v, dual_s, line_out, 0, n_dst - 1, 0, n_src - 1);
                for (int s = 0; s < n_dst; ++s) out[dst_base + s * stride] = line_out[s];
            }
        }
        buf = std::move(out);
        shape = out_shape;
    }

    for (double v : buf)
        if (v == kNegInf)
            fail(Errc::invalid_argument, "conjugate of a function that is +inf on a full slice");
    return GridFunction(d, std::move(dual_lo), std::move(dual_hi), std::move(dual_shape),
                        std::move(buf));
}

FunctionPtr conjugate_of(const FunctionPtr& f) {
    if (auto ma = std::dynamic_pointer_cast<const MaxAffine>(f)) {
        std::vector<PointHull::Support> pts;
        pts.reserve(ma->pieces().size());
        for (const auto& p : ma->pieces()) pts.push_back({p.slope, p.intercept});
        return std::make_shared<PointHull>(ma->dim(), std::move(pts));
    }
    if (auto ph = std::dynamic_pointer_cast<const PointHull>(f)) {
        std::vector<MaxAffine::Piece> pieces;
        pieces.reserve(ph->points().size());
        for (const auto& p : ph->points()) pieces.push_back({p.location, p.value});
        return std::make_shared<MaxAffine>(ph->dim(), std::move(pieces));
    }
    if (auto q = std::dynamic_pointer_cast<const Quadratic>(f))
        return std::make_shared<Quadratic>(q->conjugate());
    if (auto ic = std::dynamic_pointer_cast<const InfConvolution>(f)) return ic->conjugate_sum();
    if (auto g = std::dynamic_pointer_cast<const GridFunction>(f)) {
        Vec lo, hi;
        default_dual_box(*g, lo, hi);
        return std::make_shared<GridFunction>(
            grid_conjugate(*g, std::move(lo), std::move(hi), g->shape()));
    }
    fail(Errc::invalid_argument, "no conjugate rule for this representation");
}

namespace {

std::vector<FunctionPtr> flatten_parts(const FunctionPtr& f) {
    if (auto s = std::dynamic_pointer_cast<const SumFunction>(f)) {
        std::vector<FunctionPtr> out;
        for (const auto& p : s->parts()) {
            auto sub = flatten_parts(p);
            out.insert(out.end(), sub.begin(), sub.end());
        }
        return out;
    }
    return {f};
}

// Piecewise description of a 1D conjugate part for the exact segment scan.
struct Part1D {
    double dom_lo = -std::numeric_limits<double>::infinity();
    double dom_hi = std::numeric_limits<double>::infinity();
    Vec breakpoints;
    bool quadratic = false;
};

bool describe_part_1d(const FunctionPtr& p, Part1D& out) {
    if (auto ph = std::dynamic_pointer_cast<const PointHull>(p)) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& s : ph->points()) {
            lo = std::min(lo, s.location[0]);
            hi = std::max(hi, s.location[0]);
            out.breakpoints.push_back(s.location[0]);
        }
        out.dom_lo = lo;
        out.dom_hi = hi;
        return true;
    }
    if (auto ma = std::dynamic_pointer_cast<const MaxAffine>(p)) {
        const Envelope1D env = upper_envelope_1d(*ma);
        out.breakpoints = env.breakpoints;
        return true;
    }
    if (std::dynamic_pointer_cast<const Quadratic>(p)) {
        out.quadratic = true;
        return true;
    }
    if (auto g = std::dynamic_pointer_cast<const GridFunction>(p)) {
        out.dom_lo = g->lo()[0];
        out.dom_hi = g->hi()[0];
        for (int j = 0; j < g->shape()[0]; ++j) out.breakpoints.push_back(g->node_coord(0, j));
        return true;
    }
    return false;
}

}  // namespace

InfConvolution::InfConvolution(FunctionPtr f, FunctionPtr g, std::optional<SearchBox> box)
    : f_(std::move(f)), g_(std::move(g)), box_(std::move(box)) {
    if (f_->dim() != g_->dim()) fail(Errc::dimension_mismatch, "inf-convolution dim mismatch");
    dim_ = f_->dim();
    auto cf = flatten_parts(conjugate_of(f_));
    auto cg = flatten_parts(conjugate_of(g_));
    conj_parts_ = cf;
    conj_parts_.insert(conj_parts_.end(), cg.begin(), cg.end());
    conj_sum_ = conj_parts_.size() == 1 ? conj_parts_[0]
                                        : std::make_shared<SumFunction>(conj_parts_);
    if (dim_ == 1) {
        exact_1d_ = true;
        for (const auto& p : conj_parts_) {
            Part1D tmp;
            if (!describe_part_1d(p, tmp)) {
                exact_1d_ = false;
                break;
            }
        }
    } else {
        lp_path_ = true;
        for (const auto& p : conj_parts_)
            if (!std::dynamic_pointer_cast<const PointHull>(p)) lp_path_ = false;
    }
}

ExtReal InfConvolution::value(std::span<const double> x) const {
    check_dim(x);
    return maximize(x, nullptr);
}

GradientResult InfConvolution::gradient(std::span<const double> x) const {
    check_dim(x);
    Vec arg;
    const ExtReal v = maximize(x, &arg);
    if (!v.is_finite()) fail(Errc::out_of_domain, "gradient of an infinite inf-convolution value");
    return GradientResult{arg, true};
}

ExtReal InfConvolution::maximize(std::span<const double> x, Vec* argmax) const {
    if (exact_1d_) {
        double arg = 0.0;
        const ExtReal v = maximize_exact_1d(x[0], &arg);
        if (argmax) *argmax = Vec{arg};
        return v;
    }
    if (lp_path_) return maximize_lp(x, argmax);
    return maximize_search(x, argmax);
}

ExtReal InfConvolution::maximize_exact_1d(double x, double* argmax) const {
    double dom_lo = -std::numeric_limits<double>::infinity();
    double dom_hi = std::numeric_limits<double>::infinity();
    Vec bps;
    for (const auto& p : conj_parts_) {
        Part1D d;
        describe_part_1d(p, d);
        dom_lo = std::max(dom_lo, d.dom_lo);
        dom_hi = std::min(dom_hi, d.dom_hi);
        bps.insert(bps.end(), d.breakpoints.begin(), d.breakpoints.end());
    }
    if (!(dom_lo <= dom_hi))
        fail(Errc::unbounded_below, "inf-convolution is identically -inf (conjugate domains disjoint)");

    std::sort(bps.begin(), bps.end());
    Vec knots;
    if (std::isfinite(dom_lo)) knots.push_back(dom_lo);
    for (double b : bps) {
        if (b <= dom_lo || b >= dom_hi) continue;
        if (!knots.empty() && b - knots.back() < 1e-13 * std::max(1.0, std::abs(b))) continue;
        knots.push_back(b);
    }
    if (std::isfinite(dom_hi) && (knots.empty() || dom_hi > knots.back())) knots.push_back(dom_hi);

    const auto S = [&](double y) -> double {
        double acc = 0.0;
        Vec pt{y};
        for (const auto& p : conj_parts_) {
            const ExtReal v = p->value(pt);
            if (!v.is_finite()) return std::numeric_limits<double>::infinity();
            acc += v.value();
        }
        return acc;
    };
    const auto G = [&](double y) -> double {
        const double s = S(y);
        return std::isfinite(s) ? x * y - s : kNegInf;
    };

    double best = kNegInf, best_y = 0.0;
    const auto consider = [&](double y) {
        const double v = G(y);
        if (v > best) {
            best = v;
            best_y = y;
        }
    };

    for (double k : knots) consider(k);

    // Interior stationary points: on each open segment S is a quadratic, so
    // centered differences at the midpoint recover S' and S'' exactly.
    const auto segment_stationary = [&](double a, double b) {
        const double mid = 0.5 * (a + b), h = 0.25 * (b - a);
        const double sm = S(mid - h), s0 = S(mid), sp = S(mid + h);
        if (!std::isfinite(sm) || !std::isfinite(s0) || !std::isfinite(sp)) return;
        const double d1 = (sp - sm) / (2.0 * h);
        const double d2 = (sp - 2.0 * s0 + sm) / (h * h);
        if (d2 > 1e-13) {
            const double y = mid + (x - d1) / d2;
            if (y > a && y < b) consider(y);
        }
    };
    for (size_t i = 0; i + 1 < knots.size(); ++i) segment_stationary(knots[i], knots[i + 1]);

    // Tails beyond the outermost knots (only when the domain is unbounded).
    const auto tail = [&](double edge, double direction) {
        const double p1 = edge + direction, h = 0.25;
        const double sm = S(p1 - h), s0 = S(p1), sp = S(p1 + h);
        if (!std::isfinite(sm) || !std::isfinite(s0) || !std::isfinite(sp)) return false;
        const double d1 = (sp - sm) / (2.0 * h);
        const double d2 = (sp - 2.0 * s0 + sm) / (h * h);
        if (d2 > 1e-13) {
            const double y = p1 + (x - d1) / d2;
            consider(direction > 0 ? std::max(y, edge) : std::min(y, edge));
            return false;
        }
        // Affine tail: G' = x - d1 everywhere in the tail.
        return direction > 0 ? (x - d1) > 1e-12 * std::max(1.0, std::abs(x))
                             : (x - d1) < -1e-12 * std::max(1.0, std::abs(x));
    };
    if (knots.empty()) {
        // No breakpoints at all: one global quadratic/affine piece.
        if (tail(0.0, 1.0)) return ExtReal::infinity();
        if (tail(0.0, -1.0)) return ExtReal::infinity();
    } else {
        if (!std::isfinite(dom_hi) && tail(knots.back(), 1.0)) return ExtReal::infinity();
        if (!std::isfinite(dom_lo) && tail(knots.front(), -1.0)) return ExtReal::infinity();
    }

    if (best == kNegInf)
        fail(Errc::unbounded_below, "inf-convolution evaluation found no feasible point");
    if (argmax) *argmax = best_y;
    return ExtReal(best);
}

ExtReal InfConvolution::maximize_lp(std::span<const double> x, Vec* argmax) const {
    // Variables: simplex weights per PointHull part; y is eliminated through
    // part 0. Rows: (P-1)*dim linking constraints + P simplex constraints.
    std::vector<const PointHull*> parts;
    for (const auto& p : conj_parts_)
        parts.push_back(static_cast<const PointHull*>(p.get()));
    const int np = static_cast<int>(parts.size());
    int ncols = 0;
    std::vector<int> offset(np);
    for (int k = 0; k < np; ++k) {
        offset[k] = ncols;
        ncols += static_cast<int>(parts[k]->points().size());
    }
    const int nrows = (np - 1) * dim_ + np;
    std::vector<Vec> rows(nrows, Vec(ncols, 0.0));
    Vec rhs(nrows, 0.0), cost(ncols, 0.0);
    for (int k = 1; k < np; ++k) {
        for (int d = 0; d < dim_; ++d) {
            Vec& row = rows[(k - 1) * dim_ + d];
            for (size_t i = 0; i < parts[0]->points().size(); ++i)
                row[offset[0] + static_cast<int>(i)] = parts[0]->points()[i].location[d];
            for (size_t i = 0; i < parts[k]->points().size(); ++i)
                row[offset[k] + static_cast<int>(i)] = -parts[k]->points()[i].location[d];
        }
    }
    for (int k = 0; k < np; ++k) {
        Vec& row = rows[(np - 1) * dim_ + k];
        for (size_t i = 0; i < parts[k]->points().size(); ++i)
            row[offset[k] + static_cast<int>(i)] = 1.0;
        rhs[(np - 1) * dim_ + k] = 1.0;
    }
    for (size_t i = 0; i < parts[0]->points().size(); ++i)
        cost[offset[0] + static_cast<int>(i)] =
            -(dot(x, parts[0]->points()[i].location) - parts[0]->points()[i].value);
    for (int k = 1; k < np; ++k)
        for (size_t i = 0; i < parts[k]->points().size(); ++i)
            cost[offset[k] + static_cast<int>(i)] = parts[k]->points()[i].value;

    const LpResult lp = solve_lp(rows, rhs, cost);
    if (lp.status == LpResult::Status::infeasible)
        fail(Errc::unbounded_below, "inf-convolution is identically -inf (conjugate domains disjoint)");
    if (lp.status != LpResult::Status::optimal)
        fail(Errc::non_convergent, "inf-convolution LP did not solve");
    if (argmax) {
        argmax->assign(dim_, 0.0);
        for (size_t i = 0; i < parts[0]->points().size(); ++i)
            for (int d = 0; d < dim_; ++d)
                (*argmax)[d] += lp.x[offset[0] + static_cast<int>(i)] *
                                parts[0]->points()[i].location[d];
    }
    return ExtReal(-lp.objective);
}

ExtReal InfConvolution::maximize_search(std::span<const double> x, Vec* argmax) const {
    Vec lo(dim_), hi(dim_);
    bool user_box = box_.has_value();
    if (user_box) {
        lo = box_->lo;
        hi = box_->hi;
    } else {
        const double r = 8.0 + 4.0 * norm_inf(x);
        lo.assign(dim_, -r);
        hi.assign(dim_, r);
    }
    // Clip to PointHull part bounding boxes (outside them the objective is -inf).
    for (const auto& p : conj_parts_) {
        if (auto ph = std::dynamic_pointer_cast<const PointHull>(p)) {
            for (int d = 0; d < dim_; ++d) {
                double plo = std::numeric_limits<double>::infinity(), phi = -plo;
                for (const auto& s : ph->points()) {
                    plo = std::min(plo, s.location[d]);
                    phi = std::max(phi, s.location[d]);
                }
                lo[d] = std::max(lo[d], plo);
                hi[d] = std::min(hi[d], phi);
            }
        }
    }

    const auto G = [&](const Vec& y) -> double {
        double acc = 0.0;
        for (const auto& p : conj_parts_) {
            const ExtReal v = p->value(y);
            if (!v.is_finite()) return kNegInf;
            acc += v.value();
        }
        return dot(x, y) - acc;
    };

    Vec y(dim_);
    for (int d = 0; d < dim_; ++d) y[d] = 0.5 * (lo[d] + hi[d]);
    double fy = G(y);

    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int expand = 0; expand <= 3; ++expand) {
        double prev = fy;
        for (int sweep = 0; sweep < 80; ++sweep) {
            for (int d = 0; d < dim_; ++d) {
                double a = lo[d], b = hi[d];
                Vec probe = y;
                double c1 = b - golden * (b - a), c2 = a + golden * (b - a);
                probe[d] = c1;
                double f1 = G(probe);
                probe[d] = c2;
                double f2 = G(probe);
                for (int it = 0; it < 90; ++it) {
                    if (f1 < f2) {
                        a = c1;
                        c1 = c2;
                        f1 = f2;
                        c2 = a + golden * (b - a);
                        probe[d] = c2;
                        f2 = G(probe);
                    } else {
                        b = c2;
                        c2 = c1;
                        f2 = f1;
                        c1 = b - golden * (b - a);
                        probe[d] = c1;
                        f1 = G(probe);
                    }
                }
                y[d] = f1 > f2 ? c1 : c2;
            }
            fy = G(y);
            if (std::abs(fy - prev) < 1e-13 * std::max(1.0, std::abs(fy)) && sweep > 1) break;
            prev = fy;
        }
        bool on_boundary = false;
        for (int d = 0; d < dim_; ++d) {
            const double width = hi[d] - lo[d];
            if (y[d] - lo[d] < 1e-6 * width || hi[d] - y[d] < 1e-6 * width) on_boundary = true;
        }
        if (!on_boundary) break;
        if (user_box || expand == 3)
            fail(Errc::search_box_too_small, "maximizer landed on the search box boundary");
        for (int d = 0; d < dim_; ++d) {
            const double width = hi[d] - lo[d];
            lo[d] -= width;
            hi[d] += width;
        }
    }
    if (fy == kNegInf)
        fail(Errc::search_box_too_small, "no feasible point found in the search box");
    if (argmax) *argmax = y;
    return ExtReal(fy);
}

FunctionPtr inf_convolution(const FunctionPtr& f, const FunctionPtr& g,
                            std::optional<SearchBox> box) {
    const auto qf = std::dynamic_pointer_cast<const Quadratic>(f);
    const auto qg = std::dynamic_pointer_cast<const Quadratic>(g);
    if (qf && qg) return std::make_shared<Quadratic>(qf->inf_convolve(*qg));
    return std::make_shared<InfConvolution>(f, g, std::move(box));
}

FunctionPtr right_scalar_mult(const FunctionPtr& f, double t) {
    if (!(t > 0.0)) fail(Errc::non_positive_scale, "right scalar multiplication needs t > 0");
    if (auto ma = std::dynamic_pointer_cast<const MaxAffine>(f)) {
        std::vector<MaxAffine::Piece> pieces = ma->pieces();
        for (auto& p : pieces) p.intercept *= t;
        return std::make_shared<MaxAffine>(ma->dim(), std::move(pieces));
    }
    if (auto ph = std::dynamic_pointer_cast<const PointHull>(f)) {
        std::vector<PointHull::Support> pts = ph->points();
        for (auto& p : pts) {
            for (auto& c : p.location) c *= t;
            p.value *= t;
        }
        return std::make_shared<PointHull>(ph->dim(), std::move(pts));
    }
    if (auto q = std::dynamic_pointer_cast<const Quadratic>(f))
        return std::make_shared<Quadratic>(q->right_scalar_mult(t));
    if (auto g = std::dynamic_pointer_cast<const GridFunction>(f)) {
        Vec lo = g->lo(), hi = g->hi(), values = g->values();
        for (auto& v : lo) v *= t;
        for (auto& v : hi) v *= t;
        for (auto& v : values) v *= t;  // t*inf = inf for the marker entries
        return std::make_shared<GridFunction>(g->dim(), std::move(lo), std::move(hi), g->shape(),
                                              std::move(values));
    }
    if (auto ic = std::dynamic_pointer_cast<const InfConvolution>(f)) {
        // (phi [] psi) t = (phi t) [] (psi t)
        return inf_convolution(right_scalar_mult(ic->left(), t),
                               right_scalar_mult(ic->right(), t));
    }
    fail(Errc::invalid_argument, "no right scalar multiplication rule for this representation");
}

namespace {

int matrix_rank(std::vector<Vec> m, double tol = 1e-10) {
    const int rows = static_cast<int>(m.size());
    if (rows == 0) return 0;
    const int cols = static_cast<int>(m[0].size());
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int piv = -1;
        double best = tol;
        for (int r = rank; r < rows; ++r) {
            if (std::abs(m[r][c]) > best) {
                best = std::abs(m[r][c]);
                piv = r;
            }
        }
        if (piv < 0) continue;
        std::swap(m[rank], m[piv]);
        for (int r = 0; r < rows; ++r) {
            if (r == rank) continue;
            const double f = m[r][c] / m[rank][c];
            for (int j = c; j < cols; ++j) m[r][j] -= f * m[rank][j];
        }
        ++rank;
    }
    return rank;
}

}  // namespace

std::vector<Vec> regular_polygon_vertices(int m) {
    std::vector<Vec> u;
    u.reserve(m);
    for (int k = 0; k < m; ++k) {
        const double th = 2.0 * M_PI * k / m;
        u.push_back({std::cos(th), std::sin(th)});
    }
    return u;
}

MaxAffine gauge_from_polar_vertices(int dim, const std::vector<Vec>& polar_vertices) {
    if (polar_vertices.empty()) fail(Errc::degenerate_polar, "empty polar vertex set");
    for (const auto& u : polar_vertices)
        if (static_cast<int>(u.size()) != dim)
            fail(Errc::dimension_mismatch, "polar vertex has wrong length");

    if (matrix_rank(polar_vertices) < dim)
        fail(Errc::degenerate_polar, "polar vertices do not span R^dim");

    // 0 strictly interior to conv(U): maximize delta s.t. lambda_i >= delta,
    // sum lambda = 1, sum lambda_i u_i = 0. Substituting mu = lambda - delta
    // gives a standard-form LP in (mu, delta).
    const int m = static_cast<int>(polar_vertices.size());
    std::vector<Vec> rows(dim + 1, Vec(m + 1, 0.0));
    Vec rhs(dim + 1, 0.0), cost(m + 1, 0.0);
    for (int d = 0; d < dim; ++d) {
        double usum = 0.0;
        for (int i = 0; i < m; ++i) {
            rows[d][i] = polar_vertices[i][d];
            usum += polar_vertices[i][d];
        }
        rows[d][m] = usum;
    }
    for (int i = 0; i < m; ++i) rows[dim][i] = 1.0;
    rows[dim][m] = static_cast<double>(m);
    rhs[dim] = 1.0;
    cost[m] = -1.0;  // maximize delta
    const LpResult lp = solve_lp(rows, rhs, cost);
    if (lp.status != LpResult::Status::optimal || lp.x[m] <= 1e-9)
        fail(Errc::degenerate_polar, "0 is not interior to conv(polar vertices)");

    std::vector<MaxAffine::Piece> pieces;
    pieces.reserve(polar_vertices.size());
    for (const auto& u : polar_vertices) pieces.push_back({u, 0.0});
    return MaxAffine(dim, std::move(pieces));
}

NormalizeResult normalize_at_origin(const MaxAffine& h) {
    const int d = h.dim();
    std::vector<PointHull::Support> pts;
    for (const auto& p : h.pieces()) pts.push_back({p.slope, p.intercept});
    PointHull conj(d, std::move(pts));
    Vec origin(d, 0.0), lambda;
    const ExtReal at0 = conj.value_with_weights(origin, &lambda);
    if (!at0.is_finite())
        fail(Errc::unbounded_below, "0 outside conv{slopes}: function unbounded below");
    const double shift = -at0.value();  // inf h = -h*(0)

    std::vector<MaxAffine::Piece> shifted = h.pieces();
    for (auto& p : shifted) p.intercept += shift;

    // Argmin from the active pieces: solve <a_i, y> = c_i + shift in least
    // squares with a small ridge (handles the flat-piece case a = 0).
    std::vector<int> active;
    for (size_t i = 0; i < lambda.size(); ++i)
        if (lambda[i] > 1e-9) active.push_back(static_cast<int>(i));
    std::vector<Vec> ata(d, Vec(d, 0.0));
    Vec atb(d, 0.0);
    for (int idx : active) {
        const auto& a = h.pieces()[idx].slope;
        const double b = h.pieces()[idx].intercept + shift;
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) ata[i][j] += a[i] * a[j];
            atb[i] += a[i] * b;
        }
    }
    for (int i = 0; i < d; ++i) ata[i][i] += 1e-12;
    const auto inv = spd_inverse(ata);
    Vec argmin(d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) argmin[i] += inv[i][j] * atb[j];

    return NormalizeResult{MaxAffine(d, std::move(shifted)), shift, std::move(argmin)};
}

ConvexityReport check_convexity_grid(const GridFunction& g, double tol) {
    const int d = g.dim();
    const auto& shape = g.shape();
    const auto& values = g.values();

    // directions in {-1,0,1}^d, nonzero, first nonzero positive
    std::vector<std::vector<int>> dirs;
    std::vector<int> dir(d, -1);
    while (true) {
        int k = d - 1;
        while (k >= 0 && dir[k] == 1) dir[k--] = -1;
        if (k < 0) break;
        ++dir[k];
        bool nonzero = false, lex_pos = false;
        for (int j = 0; j < d; ++j) {
            if (dir[j] != 0) {
                nonzero = true;
                lex_pos = dir[j] > 0;
                break;
            }
        }
        if (nonzero && lex_pos) dirs.push_back(dir);
    }

    double scale = 1.0;
    for (double v : values)
        if (std::isfinite(v)) scale = std::max(scale, std::abs(v));

    ConvexityReport rep;
    size_t total = 1;
    for (int k = 0; k < d; ++k) total *= static_cast<size_t>(shape[k]);
    std::vector<int> idx(d);
    for (size_t flat = 0; flat < total; ++flat) {
        size_t rest = flat;
        for (int k = d - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(rest % shape[k]);
            rest /= shape[k];
        }
        for (const auto& dd : dirs) {
            bool ok = true;
            long long offset = 0, stride = 1;
            for (int k = d - 1; k >= 0; --k) {
                const int a = idx[k] + dd[k], b = idx[k] - dd[k];
                if (a < 0 || a >= shape[k] || b < 0 || b >= shape[k]) {
                    ok = false;
                    break;
                }
                offset += dd[k] * stride;
                stride *= shape[k];
            }
            if (!ok) continue;
            const size_t up = static_cast<size_t>(static_cast<long long>(flat) + offset);
            const size_t down = static_cast<size_t>(static_cast<long long>(flat) - offset);
            const double vm = values[flat];
            const double va = values[up], vb = values[down];
            double violation;
            if (!std::isfinite(va) || !std::isfinite(vb)) continue;  // +inf ends absorb
            if (!std::isfinite(vm))
                violation = std::numeric_limits<double>::infinity();
            else
                violation = vm - 0.5 * (va + vb);
            if (violation > rep.worst_violation) {
                rep.worst_violation = violation;
                rep.worst_index = idx;
                rep.worst_direction = dd;
            }
        }
    }
    rep.pass = rep.worst_violation <= tol * scale;
    return rep;
}

}  // namespace fdm
