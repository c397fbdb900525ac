#include "core/cells.hpp"

#include <algorithm>
#include <cmath>

#include "core/linprog.hpp"

namespace fdm {

namespace {

constexpr double kGaussCut = 12.0;  // |x| beyond this is below 1e-31 density

double power_clamped(double base, double p) {
    if (p == std::floor(p)) return std::pow(base, p);
    if (base < 0.0) {
        if (base > -1e-11) base = 0.0;  // roundoff at a cell boundary of a normalized h
        else fail(Errc::negative_base, "h < 0 on a cell with fractional exponent");
    }
    return std::pow(base, p);
}

// One-piece contribution on [a, b] in 1D: integral (s y - c)^p phi(y) dy.
double interval_power_integral(double s, double c, double p, double a, double b) {
    a = std::max(a, -kGaussCut);
    b = std::min(b, kGaussCut);
    if (!(b > a)) return 0.0;
    const double inv_sqrt2pi = 0.3989422804014326779;
    return integrate_interval(a, b, 16, 0.25, [&](double y) {
        return power_clamped(s * y - c, p) * inv_sqrt2pi * std::exp(-0.5 * y * y);
    });
}

// Active-piece intervals of a 1D max-affine restricted to [rlo, rhi].
struct RaySegment {
    int piece;
    double lo, hi;
};

std::vector<RaySegment> envelope_segments(const std::vector<double>& slopes,
                                          const std::vector<double>& intercepts, double rlo,
                                          double rhi) {
    const int m = static_cast<int>(slopes.size());
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (slopes[a] != slopes[b]) return slopes[a] < slopes[b];
        return intercepts[a] < intercepts[b];
    });
    // Upper envelope sweep; equal slopes keep only the larger line.
    std::vector<int> stack;
    Vec starts;
    for (int idx : order) {
        const double a2 = slopes[idx], c2 = intercepts[idx];
        if (!stack.empty() && slopes[stack.back()] == a2) {
            if (intercepts[stack.back()] <= c2) continue;  // dominated
            stack.pop_back();
            if (!starts.empty()) starts.pop_back();
        }
        while (!stack.empty()) {
            const double a1 = slopes[stack.back()], c1 = intercepts[stack.back()];
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
    std::vector<RaySegment> segs;
    for (size_t j = 0; j < stack.size(); ++j) {
        const double lo = j == 0 ? -std::numeric_limits<double>::infinity() : starts[j - 1];
        const double hi = j < starts.size() ? starts[j] : std::numeric_limits<double>::infinity();
        const double slo = std::max(lo, rlo), shi = std::min(hi, rhi);
        if (shi > slo) segs.push_back({stack[j], slo, shi});
    }
    return segs;
}

CellIntegrals cell_integrals_1d(const MaxAffine& h, double p) {
    const auto& pieces = h.pieces();
    std::vector<double> slopes(pieces.size()), intercepts(pieces.size());
    for (size_t i = 0; i < pieces.size(); ++i) {
        slopes[i] = pieces[i].slope[0];
        intercepts[i] = pieces[i].intercept;
    }
    const auto segs = envelope_segments(slopes, intercepts, -kGaussCut, kGaussCut);
    CellIntegrals out;
    out.per_cell.assign(pieces.size(), 0.0);
    for (const auto& seg : segs)
        out.per_cell[seg.piece] +=
            interval_power_integral(slopes[seg.piece], intercepts[seg.piece], p, seg.lo, seg.hi);
    out.total = pairwise_sum(out.per_cell);
    return out;
}

// 2D: polar decomposition. Along each ray u(theta), h(r u) is a 1D max-affine
// in r; the angular integrand is piecewise smooth with kinks only at pair
// bisector directions and at directions of pairwise boundary-line vertices.
class PolarIntegrator2D {
public:
    explicit PolarIntegrator2D(const MaxAffine& h) : h_(h) {
        const auto& pieces = h.pieces();
        const int m = static_cast<int>(pieces.size());
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                const double dx = pieces[i].slope[0] - pieces[j].slope[0];
                const double dy = pieces[i].slope[1] - pieces[j].slope[1];
                // directions where the two slopes tie along the ray
                if (dx != 0.0 || dy != 0.0) {
                    add_angle(std::atan2(dx, -dy));
                    add_angle(std::atan2(-dx, dy));
                }
                // vertex directions of boundary-line intersections
                for (int k = 0; k < m; ++k) {
                    if (k == i || k == j) continue;
                    const double ax = dx, ay = dy;
                    const double bx = pieces[i].slope[0] - pieces[k].slope[0];
                    const double by = pieces[i].slope[1] - pieces[k].slope[1];
                    const double det = ax * by - ay * bx;
                    if (std::abs(det) < 1e-14) continue;
                    const double c1 = pieces[i].intercept - pieces[j].intercept;
                    const double c2 = pieces[i].intercept - pieces[k].intercept;
                    const double vx = (c1 * by - c2 * ay) / det;
                    const double vy = (ax * c2 - bx * c1) / det;
                    if (vx * vx + vy * vy > 1e-24) add_angle(std::atan2(vy, vx));
                }
            }
        std::sort(angles_.begin(), angles_.end());
        angles_.erase(std::unique(angles_.begin(), angles_.end(),
                                  [](double a, double b) { return b - a < 1e-12; }),
                      angles_.end());
        if (angles_.empty()) angles_.push_back(0.0);
    }

    CellIntegrals integrate(double p) const {
        const auto& pieces = h_.pieces();
        const int m = static_cast<int>(pieces.size());
        CellIntegrals out;
        out.per_cell.assign(m, 0.0);
        Vec gx, gw;
        gauss_legendre(12, gx, gw);
        std::vector<double> s(m), c(m);
        for (int i = 0; i < m; ++i) c[i] = pieces[i].intercept;

        const size_t np = angles_.size();
        for (size_t a = 0; a < np; ++a) {
            const double th0 = angles_[a];
            const double th1 = a + 1 < np ? angles_[a + 1] : angles_[0] + 2.0 * M_PI;
            if (!(th1 > th0 + 1e-14)) continue;
            // subdivide wide arcs so the smooth angular factor is resolved
            const int sub = std::max(1, static_cast<int>(std::ceil((th1 - th0) / 0.05)));
            for (int sp = 0; sp < sub; ++sp) {
                const double lo = th0 + (th1 - th0) * sp / sub;
                const double hi = th0 + (th1 - th0) * (sp + 1) / sub;
                const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
                for (size_t gi = 0; gi < gx.size(); ++gi) {
                    const double th = mid + half * gx[gi];
                    const double wth = half * gw[gi];
                    const double ux = std::cos(th), uy = std::sin(th);
                    for (int i = 0; i < m; ++i)
                        s[i] = pieces[i].slope[0] * ux + pieces[i].slope[1] * uy;
                    const auto segs = envelope_segments(s, c, 0.0, kGaussCut);
                    for (const auto& seg : segs) {
                        const double si = s[seg.piece], ci = c[seg.piece];
                        const double radial =
                            integrate_interval(seg.lo, seg.hi, 12, 0.5, [&](double r) {
                                return power_clamped(si * r - ci, p) * r *
                                       std::exp(-0.5 * r * r);
                            });
                        out.per_cell[seg.piece] += wth * radial * (0.5 / M_PI);
                    }
                }
            }
        }
        out.total = pairwise_sum(out.per_cell);
        return out;
    }

private:
    void add_angle(double th) {
        while (th < 0.0) th += 2.0 * M_PI;
        while (th >= 2.0 * M_PI) th -= 2.0 * M_PI;
        angles_.push_back(th);
    }
    const MaxAffine& h_;
    Vec angles_;
};

}  // namespace

CellDecomposition cells_of_max_affine(const MaxAffine& h) {
    CellDecomposition cells;
    cells.dim = h.dim();
    const int m = static_cast<int>(h.pieces().size());
    cells.piece_active.assign(m, false);
    if (h.dim() == 1) {
        cells.envelope = upper_envelope_1d(h);
        for (int idx : cells.envelope.active_piece) cells.piece_active[idx] = true;
        return cells;
    }
    // Piece i is active iff some y gives it a strictly positive margin:
    // maximize delta s.t. <a_i - a_j, y> - (c_i - c_j) >= delta for all j.
    for (int i = 0; i < m; ++i) {
        // variables: y+ (d), y- (d), delta, slack_j (m-1)
        const int d = h.dim();
        const int ncols = 2 * d + 1 + (m - 1);
        std::vector<Vec> rows;
        Vec rhs, cost(ncols, 0.0);
        int sj = 0;
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            Vec row(ncols, 0.0);
            for (int k = 0; k < d; ++k) {
                const double diff = h.pieces()[i].slope[k] - h.pieces()[j].slope[k];
                row[k] = diff;
                row[d + k] = -diff;
            }
            row[2 * d] = -1.0;
            row[2 * d + 1 + sj] = -1.0;
            rows.push_back(std::move(row));
            rhs.push_back(h.pieces()[i].intercept - h.pieces()[j].intercept);
            ++sj;
        }
        if (rows.empty()) {
            cells.piece_active[i] = true;
            continue;
        }
        cost[2 * d] = -1.0;  // maximize delta
        const LpResult lp = solve_lp(rows, rhs, cost);
        cells.piece_active[i] = lp.status == LpResult::Status::unbounded ||
                                (lp.status == LpResult::Status::optimal && lp.x[2 * d] > 1e-10);
    }
    return cells;
}

CellIntegrals cell_power_integrals_sampled(const MaxAffine& h, double p, const Scheme& scheme) {
    const int d = h.dim();
    const int m = static_cast<int>(h.pieces().size());
    Scheme s = scheme;
    if (s.kind == Scheme::Kind::hermite && d > 3) {
        s.kind = Scheme::Kind::quasi_mc;
        s.n = 1 << 16;
    }
    CellIntegrals out;
    out.per_cell.assign(m, 0.0);
    // One pass per cell keeps the deterministic pairwise reduction of
    // gauss_expectation; m is small.
    double stderr_sq = 0.0;
    for (int i = 0; i < m; ++i) {
        const IntegralResult r = gauss_expectation(d, s, [&](std::span<const double> x) {
            if (h.active_index(x) != i) return 0.0;
            const ExtReal v = h.value(x);
            return power_clamped(v.value(), p);
        });
        out.per_cell[i] = r.value;
        stderr_sq += r.stderr_est * r.stderr_est;
    }
    out.total = pairwise_sum(out.per_cell);
    out.stderr_est = std::sqrt(stderr_sq);
    return out;
}

CellIntegrals cell_power_integrals(const MaxAffine& h, double p, const Scheme& scheme) {
    if (h.dim() == 1) return cell_integrals_1d(h, p);
    if (h.dim() == 2) return PolarIntegrator2D(h).integrate(p);
    return cell_power_integrals_sampled(h, p, scheme);
}

}  // namespace fdm
