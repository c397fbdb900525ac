#include "core/dual_curvature.hpp"

#include <algorithm>
#include <cmath>

#include "core/gauss_integrals.hpp"
#include "core/rng.hpp"

namespace fdm {

void DiscreteMeasure::validate() const {
    if (atoms.empty()) fail(Errc::empty_measure, "measure has no atoms");
    for (const auto& a : atoms) {
        if (static_cast<int>(a.location.size()) != dim)
            fail(Errc::dimension_mismatch, "atom location has wrong length");
        if (!(a.weight > 0.0)) fail(Errc::invalid_argument, "atom weights must be positive");
    }
    for (size_t i = 0; i < atoms.size(); ++i)
        for (size_t j = i + 1; j < atoms.size(); ++j) {
            double d2 = 0.0;
            for (int k = 0; k < dim; ++k) {
                const double d = atoms[i].location[k] - atoms[j].location[k];
                d2 += d * d;
            }
            if (d2 < 1e-24) fail(Errc::invalid_argument, "atom locations must be distinct");
        }
}

double DiscreteMeasure::total_mass() const {
    Vec w(atoms.size());
    for (size_t i = 0; i < atoms.size(); ++i) w[i] = atoms[i].weight;
    return pairwise_sum(w);
}

double EmpiricalMeasure::total_weight() const {
    Vec w(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) w[i] = samples[i].weight;
    return pairwise_sum(w);
}

DiscreteMeasure dual_curvature_semidiscrete(const MaxAffine& h, double q, const Scheme& scheme) {
    if (q > 0.0) fail(Errc::invalid_argument, "semidiscrete dual curvature needs q <= 0");
    const CellIntegrals ci = cell_power_integrals(h, -q, scheme);
    DiscreteMeasure m;
    m.dim = h.dim();
    for (size_t i = 0; i < ci.per_cell.size(); ++i) {
        if (ci.per_cell[i] > 1e-300)
            m.atoms.push_back({h.pieces()[i].slope, ci.per_cell[i]});
    }
    return m;
}

EmpiricalMeasure dual_curvature_empirical(const FunctionPtr& f, double q, long long n,
                                          std::uint64_t seed) {
    if (n < 1) fail(Errc::invalid_argument, "need at least one sample");
    const int d = f->dim();
    EmpiricalMeasure e;
    e.dim = d;
    e.seed = seed;
    e.count = n;
    e.samples.resize(static_cast<size_t>(n));
    const long long chunk = 4096;
    for (long long c = 0; c * chunk < n; ++c) {
        CounterRng rng(seed, static_cast<std::uint64_t>(c));
        const long long stop = std::min(n, (c + 1) * chunk);
        Vec x(d);
        for (long long i = c * chunk; i < stop; ++i) {
            for (int k = 0; k < d; ++k) x[k] = rng.next_normal();
            const GradientResult g = f->gradient(x);
            const ExtReal w = pow_ext(f->value(x), -q);
            if (!w.is_finite()) fail(Errc::diverged, "sample weight f^{-q} is +inf");
            e.samples[static_cast<size_t>(i)] = {g.g, w.value() / static_cast<double>(n)};
        }
    }
    return e;
}

DiscreteMeasure cluster_empirical(const EmpiricalMeasure& e, double tol) {
    DiscreteMeasure m;
    m.dim = e.dim;
    for (const auto& s : e.samples) {
        bool merged = false;
        for (auto& a : m.atoms) {
            double d2 = 0.0;
            for (int k = 0; k < e.dim; ++k) {
                const double d = a.location[k] - s.location[k];
                d2 += d * d;
            }
            if (d2 <= tol * tol) {
                a.weight += s.weight;
                merged = true;
                break;
            }
        }
        if (!merged && s.weight > 0.0) m.atoms.push_back({s.location, s.weight});
    }
    return m;
}

double tv_distance(const DiscreteMeasure& a, const DiscreteMeasure& b, double match_tol) {
    std::vector<bool> used(b.atoms.size(), false);
    double acc = 0.0;
    for (const auto& atom : a.atoms) {
        int match = -1;
        for (size_t j = 0; j < b.atoms.size(); ++j) {
            if (used[j]) continue;
            double d2 = 0.0;
            for (int k = 0; k < a.dim; ++k) {
                const double d = atom.location[k] - b.atoms[j].location[k];
                d2 += d * d;
            }
            if (d2 <= match_tol * match_tol) {
                match = static_cast<int>(j);
                break;
            }
        }
        if (match >= 0) {
            used[match] = true;
            acc += std::abs(atom.weight - b.atoms[match].weight);
        } else {
            acc += atom.weight;
        }
    }
    for (size_t j = 0; j < b.atoms.size(); ++j)
        if (!used[j]) acc += b.atoms[j].weight;
    return 0.5 * acc;
}

DiscreteMeasure normalized(const DiscreteMeasure& m) {
    DiscreteMeasure out = m;
    const double total = m.total_mass();
    if (total <= 0.0) fail(Errc::empty_measure, "cannot normalize a zero measure");
    for (auto& a : out.atoms) a.weight /= total;
    return out;
}

BridgeResult body_bridge_check(const MaxAffine& gauge, double q) {
    const int n = gauge.dim();
    if (n > 2) fail(Errc::invalid_argument, "bridge check implemented for dim 1 and 2");
    if (!(q < n)) fail(Errc::invalid_argument, "bridge identity needs q < n");

    // lhs: exact semidiscrete Gaussian functional of the gauge.
    const Scheme dummy = Scheme{};
    const CellIntegrals ci = cell_power_integrals(gauge, -q, dummy);
    const double lhs = ci.total;

    // rhs: radial integral over the sphere, rho_K(u) = 1/gauge(u).
    double sphere_integral = 0.0;
    if (n == 1) {
        const Vec plus{1.0}, minus{-1.0};
        sphere_integral = std::pow(gauge.value(plus).value(), -q) +
                          std::pow(gauge.value(minus).value(), -q);
    } else {
        // split at the gauge's kink directions (piece bisectors)
        Vec angles;
        const auto& pieces = gauge.pieces();
        for (size_t i = 0; i < pieces.size(); ++i)
            for (size_t j = i + 1; j < pieces.size(); ++j) {
                const double dx = pieces[i].slope[0] - pieces[j].slope[0];
                const double dy = pieces[i].slope[1] - pieces[j].slope[1];
                if (dx == 0.0 && dy == 0.0) continue;
                double th = std::atan2(dx, -dy);
                for (int rep = 0; rep < 2; ++rep) {
                    while (th < 0.0) th += 2.0 * M_PI;
                    while (th >= 2.0 * M_PI) th -= 2.0 * M_PI;
                    angles.push_back(th);
                    th += M_PI;
                }
            }
        std::sort(angles.begin(), angles.end());
        angles.erase(std::unique(angles.begin(), angles.end(),
                                 [](double a, double b) { return b - a < 1e-12; }),
                     angles.end());
        if (angles.empty()) angles.push_back(0.0);
        Vec pt(2);
        for (size_t a = 0; a < angles.size(); ++a) {
            const double th0 = angles[a];
            const double th1 = a + 1 < angles.size() ? angles[a + 1] : angles[0] + 2.0 * M_PI;
            sphere_integral += integrate_interval(th0, th1, 16, 0.02, [&](double th) {
                pt[0] = std::cos(th);
                pt[1] = std::sin(th);
                const double g = gauge.value(pt).value();
                return std::pow(g, -q);  // rho^q = gauge^{-q}
            });
        }
    }
    const double body_quermass = sphere_integral / n;
    const double rhs = n * std::pow(2.0 * M_PI, -0.5 * n) *
                       std::pow(2.0, 0.5 * (n - q) - 1.0) * std::exp(std::lgamma(0.5 * (n - q))) *
                       body_quermass;
    return BridgeResult{lhs, rhs, body_quermass};
}

SupportTest hyperplane_support_test(const DiscreteMeasure& m, double tol) {
    if (m.atoms.empty()) fail(Errc::empty_measure, "support test needs atoms");
    const double total = m.total_mass();
    std::vector<Vec> second(m.dim, Vec(m.dim, 0.0));
    for (const auto& a : m.atoms)
        for (int i = 0; i < m.dim; ++i)
            for (int j = 0; j < m.dim; ++j)
                second[i][j] += a.weight / total * a.location[i] * a.location[j];
    const double lmin = smallest_eigenvalue_symmetric(second);
    const double sigma = std::sqrt(std::max(0.0, lmin));
    return SupportTest{sigma, sigma < tol};
}

SupportTest hyperplane_support_test(const EmpiricalMeasure& m, double tol) {
    DiscreteMeasure d;
    d.dim = m.dim;
    for (const auto& s : m.samples)
        if (s.weight > 0.0) d.atoms.push_back({s.location, s.weight});
    return hyperplane_support_test(d, tol);
}

MaxAffine max_of_max_affine(const MaxAffine& f, const MaxAffine& g) {
    std::vector<MaxAffine::Piece> pieces = f.pieces();
    pieces.insert(pieces.end(), g.pieces().begin(), g.pieces().end());
    return MaxAffine(f.dim(), std::move(pieces));
}

MaxAffine min_of_max_affine_1d(const MaxAffine& f, const MaxAffine& g, bool* is_convex) {
    *is_convex = true;
    const Envelope1D ef = upper_envelope_1d(f);
    const Envelope1D eg = upper_envelope_1d(g);
    Vec knots;
    knots.insert(knots.end(), ef.breakpoints.begin(), ef.breakpoints.end());
    knots.insert(knots.end(), eg.breakpoints.begin(), eg.breakpoints.end());
    // crossings of active f/g pieces add breakpoints of the min
    const auto piece_at = [](const MaxAffine& h, const Envelope1D& env, double y) {
        size_t seg = 0;
        while (seg < env.breakpoints.size() && y > env.breakpoints[seg]) ++seg;
        return env.active_piece[seg];
    };
    // candidate crossings between every f piece and g piece
    for (const auto& pf : f.pieces())
        for (const auto& pg : g.pieces()) {
            const double da = pf.slope[0] - pg.slope[0];
            if (da == 0.0) continue;
            knots.push_back((pf.intercept - pg.intercept) / da);
        }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [](double a, double b) { return b - a < 1e-12; }),
                knots.end());

    // Build the min segment by segment and check slopes are non-decreasing.
    Vec cuts;
    cuts.push_back(knots.empty() ? -1.0 : knots.front() - 1.0);
    cuts.insert(cuts.end(), knots.begin(), knots.end());
    cuts.push_back(knots.empty() ? 1.0 : knots.back() + 1.0);

    std::vector<MaxAffine::Piece> segs;
    double prev_slope = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        const Vec pm{mid};
        const double vf = f.value(pm).value();
        const double vg = g.value(pm).value();
        const MaxAffine& h = vf <= vg ? f : g;
        const Envelope1D& env = vf <= vg ? ef : eg;
        const int pi = piece_at(h, env, mid);
        const double slope = h.pieces()[pi].slope[0];
        if (slope < prev_slope - 1e-12) *is_convex = false;
        prev_slope = slope;
        segs.push_back({Vec{slope}, h.pieces()[pi].intercept});
    }
    if (!*is_convex) return f;  // caller must check the flag
    return MaxAffine(1, std::move(segs));
}

ValuationReport valuation_check(const FunctionPtr& f, const FunctionPtr& g, double q,
                                const Scheme& scheme) {
    ValuationReport rep;
    const auto maf = std::dynamic_pointer_cast<const MaxAffine>(f);
    const auto mag = std::dynamic_pointer_cast<const MaxAffine>(g);
    if (maf && mag && maf->dim() == 1 && mag->dim() == 1) {
        bool convex = false;
        const MaxAffine mn = min_of_max_affine_1d(*maf, *mag, &convex);
        if (!convex) fail(Errc::precondition_failed, "min{f,g} is not convex");
        const MaxAffine mx = max_of_max_affine(*maf, *mag);
        const DiscreteMeasure cf = dual_curvature_semidiscrete(*maf, q, scheme);
        const DiscreteMeasure cg = dual_curvature_semidiscrete(*mag, q, scheme);
        const DiscreteMeasure cmin = dual_curvature_semidiscrete(mn, q, scheme);
        const DiscreteMeasure cmax = dual_curvature_semidiscrete(mx, q, scheme);
        const auto merge = [](const DiscreteMeasure& a, const DiscreteMeasure& b) {
            DiscreteMeasure out = a;
            for (const auto& atom : b.atoms) {
                bool merged = false;
                for (auto& existing : out.atoms) {
                    if (std::abs(existing.location[0] - atom.location[0]) < 1e-9) {
                        existing.weight += atom.weight;
                        merged = true;
                        break;
                    }
                }
                if (!merged) out.atoms.push_back(atom);
            }
            return out;
        };
        const DiscreteMeasure lhs = merge(cf, cg);
        const DiscreteMeasure rhs = merge(cmin, cmax);
        rep.exact_path = true;
        rep.max_discrepancy = tv_distance(lhs, rhs);
        rep.pass = rep.max_discrepancy <= 1e-9;
        return rep;
    }

    // Generic path: compare integrals of a fixed dictionary of bounded test
    // functions against both sides, using the definition of the measure.
    const int d = f->dim();
    if (g->dim() != d) fail(Errc::dimension_mismatch, "valuation pair dims differ");

    const auto minf = [&](std::span<const double> x) -> ExtReal {
        const ExtReal a = f->value(x), b = g->value(x);
        return a <= b ? a : b;
    };
    // precondition: sampled min must be midpoint convex
    {
        Vec lo(d, -4.0), hi(d, 4.0);
        std::vector<int> shape(d, d == 1 ? 257 : 65);
        class MinWrap : public ConvexFunction {
        public:
            MinWrap(const FunctionPtr& a, const FunctionPtr& b) : a_(a), b_(b) {}
            int dim() const override { return a_->dim(); }
            ExtReal value(std::span<const double> x) const override {
                const ExtReal u = a_->value(x), v = b_->value(x);
                return u <= v ? u : v;
            }
            GradientResult gradient(std::span<const double> x) const override {
                return (a_->value(x) <= b_->value(x) ? a_ : b_)->gradient(x);
            }

        private:
            FunctionPtr a_, b_;
        };
        MinWrap mw(f, g);
        const GridFunction sampled = GridFunction::sample(mw, lo, hi, shape);
        const ConvexityReport cr = check_convexity_grid(sampled, 1e-6);
        if (!cr.pass) fail(Errc::precondition_failed, "min{f,g} fails the convexity check");
    }

    // dictionary: constants, tanh of coordinates, tanh of |x|^2
    std::vector<std::function<double(std::span<const double>)>> dict;
    dict.push_back([](std::span<const double>) { return 1.0; });
    for (int k = 0; k < d; ++k)
        dict.push_back([k](std::span<const double> z) { return std::tanh(z[k]); });
    dict.push_back([](std::span<const double> z) { return std::tanh(dot(z, z)); });

    const auto pushforward = [&](const std::function<ExtReal(std::span<const double>)>& val,
                                 const std::function<Vec(std::span<const double>)>& grad,
                                 const std::function<double(std::span<const double>)>& test) {
        return gauss_expectation(d, scheme, [&](std::span<const double> x) {
            const ExtReal v = val(x);
            const ExtReal w = pow_ext(v, -q);
            if (!w.is_finite()) fail(Errc::diverged, "weight is +inf at a node");
            return test(grad(x)) * w.value();
        });
    };

    const auto val_f = [&](std::span<const double> x) { return f->value(x); };
    const auto val_g = [&](std::span<const double> x) { return g->value(x); };
    const auto val_min = [&](std::span<const double> x) { return minf(x); };
    const auto val_max = [&](std::span<const double> x) {
        const ExtReal a = f->value(x), b = g->value(x);
        return a <= b ? b : a;
    };
    const auto grad_f = [&](std::span<const double> x) { return f->gradient(x).g; };
    const auto grad_g = [&](std::span<const double> x) { return g->gradient(x).g; };
    const auto grad_min = [&](std::span<const double> x) {
        return (f->value(x) <= g->value(x) ? f : g)->gradient(x).g;
    };
    const auto grad_max = [&](std::span<const double> x) {
        return (f->value(x) <= g->value(x) ? g : f)->gradient(x).g;
    };

    double worst = 0.0, worst_se = 0.0;
    for (const auto& test : dict) {
        const IntegralResult tf = pushforward(val_f, grad_f, test);
        const IntegralResult tg = pushforward(val_g, grad_g, test);
        const IntegralResult tmin = pushforward(val_min, grad_min, test);
        const IntegralResult tmax = pushforward(val_max, grad_max, test);
        const double disc = std::abs(tf.value + tg.value - tmin.value - tmax.value);
        const double se = std::sqrt(tf.stderr_est * tf.stderr_est + tg.stderr_est * tg.stderr_est +
                                    tmin.stderr_est * tmin.stderr_est +
                                    tmax.stderr_est * tmax.stderr_est);
        if (disc > worst) {
            worst = disc;
            worst_se = se;
        }
    }
    rep.exact_path = false;
    rep.max_discrepancy = worst;
    rep.stderr_est = worst_se;
    rep.pass = worst <= std::max(3.0 * worst_se, 1e-3);
    return rep;
}

}  // namespace fdm
