#include "core/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "core/rng.hpp"

namespace fdm {

namespace {

MaxAffine build_h(const DiscreteMeasure& mu, const Vec& v) {
    std::vector<MaxAffine::Piece> pieces;
    pieces.reserve(mu.atoms.size());
    for (size_t i = 0; i < mu.atoms.size(); ++i)
        pieces.push_back({mu.atoms[i].location, v[i]});
    return MaxAffine(mu.dim, std::move(pieces));
}

PointHull build_f(const DiscreteMeasure& mu, const Vec& v) {
    std::vector<PointHull::Support> pts;
    pts.reserve(mu.atoms.size());
    for (size_t i = 0; i < mu.atoms.size(); ++i) pts.push_back({mu.atoms[i].location, v[i]});
    return PointHull(mu.dim, std::move(pts));
}

// inf h_v together with the simplex weights of the envelope LP at the origin
// (the tangent-space normal used by the projection).
double inf_of_h(const DiscreteMeasure& mu, const Vec& v, Vec* lambda) {
    const PointHull f = build_f(mu, v);
    Vec origin(mu.dim, 0.0);
    const ExtReal f0 = f.value_with_weights(origin, lambda);
    if (!f0.is_finite())
        fail(Errc::unbounded_below, "0 outside conv(atoms): objective unbounded below");
    return -f0.value();
}

Vec normalize_v(const DiscreteMeasure& mu, const Vec& v, Vec* lambda = nullptr) {
    const double s = inf_of_h(mu, v, lambda);
    Vec out = v;
    for (auto& c : out) c += s;
    return out;
}

// Pull every v_i down to the lower envelope value f_v(x_i). The objective is
// invariant (h and the envelope are unchanged), but atoms that sat strictly
// above the hull become marginally active, so the descent step can engage
// them instead of stalling on the flat region where their cell is empty.
Vec pull_to_hull(const DiscreteMeasure& mu, const Vec& v) {
    const PointHull f = build_f(mu, v);
    Vec out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = f.value(mu.atoms[i].location).finite();
    return out;
}

// (integral h^{1-q} dgamma)^{1/(1-q)}
double normalized_quermass_shifted(const MaxAffine& h, double q, const Scheme& scheme) {
    const CellIntegrals ci = cell_power_integrals(h, 1.0 - q, scheme);
    return std::pow(ci.total, 1.0 / (1.0 - q));
}

}  // namespace

Vec solver_normalize(const DiscreteMeasure& mu, const Vec& v) { return normalize_v(mu, v); }

void validate_measure(const DiscreteMeasure& mu) {
    mu.validate();
    if (!(mu.total_mass() > 0.0)) fail(Errc::empty_measure, "measure has zero total mass");
    const SupportTest st = hyperplane_support_test(mu);
    if (st.degenerate)
        fail(Errc::support_degenerate, "measure is supported in a lower-dimensional subspace");
}

double solver_objective(const DiscreteMeasure& mu, double q, const Vec& v,
                        const SolverOptions& opts, bool normalize_shift) {
    if (v.size() != mu.atoms.size()) fail(Errc::dimension_mismatch, "v length != atom count");
    const double total = mu.total_mass();
    const PointHull f = build_f(mu, v);
    Vec terms(mu.atoms.size());
    for (size_t i = 0; i < mu.atoms.size(); ++i) {
        const ExtReal fv = f.value(mu.atoms[i].location);
        terms[i] = mu.atoms[i].weight * fv.finite();
    }
    const double data_term = pairwise_sum(terms) / total;

    Vec vw = v;
    if (normalize_shift) vw = normalize_v(mu, v);
    else {
        // raw path still needs 0 in conv(atoms) for a finite objective later
        inf_of_h(mu, v, nullptr);
    }
    const MaxAffine h = build_h(mu, vw);
    const double wbar = normalized_quermass_shifted(h, q, opts.scheme);
    return data_term - std::exp(-wbar);
}

Vec solver_objective_gradient(const DiscreteMeasure& mu, double q, const Vec& v,
                              const SolverOptions& opts) {
    if (v.size() != mu.atoms.size()) fail(Errc::dimension_mismatch, "v length != atom count");
    const double total = mu.total_mass();
    const Vec vn = normalize_v(mu, v);
    const MaxAffine h = build_h(mu, vn);
    const double wbar = normalized_quermass_shifted(h, q, opts.scheme);
    const CellIntegrals masses = cell_power_integrals(h, -q, opts.scheme);
    const double factor = std::exp(-wbar) * std::pow(wbar, q);
    Vec g(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        g[i] = mu.atoms[i].weight / total - factor * masses.per_cell[i];
    return g;
}

SolveResult solve_minkowski(const DiscreteMeasure& mu, const SolverOptions& opts) {
    opts.validate();
    validate_measure(mu);
    const double q = opts.q;
    const size_t m = mu.atoms.size();

    Vec v(m, 0.0);
    if (opts.init == SolverOptions::Init::random) {
        CounterRng rng(opts.seed, 0x496e6974ull);
        for (auto& c : v) c = opts.init_scale * rng.next_uniform();
    }
    Vec lambda;
    v = normalize_v(mu, pull_to_hull(mu, v), &lambda);

    const auto eval_objective = [&](const Vec& vv) {
        return solver_objective(mu, q, vv, opts, true);
    };

    // Projected gradient: G = g - (sum g) * lambda vanishes exactly at the
    // constrained stationary points (g proportional to lambda).
    const auto projected = [&](const Vec& g, const Vec& lam) {
        double s = 0.0;
        for (double c : g) s += c;
        Vec G = g;
        for (size_t i = 0; i < m; ++i) G[i] -= s * lam[i];
        return G;
    };

    // The objective is one-sided at atoms whose cell is empty: raising v_i
    // is flat (the piece just leaves the envelope), only lowering engages
    // it. Components that want to move into the flat region are clamped,
    // both in the working gradient and in the search direction.
    const auto clamp_marginal = [&](Vec G, const Vec& masses) {
        const double eps = 1e-13 * (1.0 + norm_inf(masses));
        for (size_t i = 0; i < m; ++i)
            if (masses[i] <= eps && G[i] < 0.0) G[i] = 0.0;
        return G;
    };

    const auto gradient_and_masses = [&](const Vec& vv, Vec* masses_out) {
        const Vec vn = normalize_v(mu, vv);
        const MaxAffine h = build_h(mu, vn);
        const double wbar = normalized_quermass_shifted(h, q, opts.scheme);
        const CellIntegrals masses = cell_power_integrals(h, -q, opts.scheme);
        const double factor = std::exp(-wbar) * std::pow(wbar, q);
        Vec g(m);
        for (size_t i = 0; i < m; ++i)
            g[i] = mu.atoms[i].weight / mu.total_mass() - factor * masses.per_cell[i];
        if (masses_out) *masses_out = masses.per_cell;
        return g;
    };

    SolveResult res;
    double fv = eval_objective(v);
    Vec masses;
    Vec g = gradient_and_masses(v, &masses);
    Vec G = clamp_marginal(projected(g, lambda), masses);
    res.trace.push_back({fv, norm_inf(G)});

    // limited-memory quasi-Newton with rejection of bad curvature pairs
    std::deque<std::pair<Vec, Vec>> memory;  // (s, y)
    const int memory_cap = 8;

    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        if (norm_inf(G) <= opts.tol) {
            res.converged = true;
            break;
        }
        // two-loop recursion on the projected gradient
        Vec d = G;
        {
            std::vector<double> alpha(memory.size());
            int k = static_cast<int>(memory.size()) - 1;
            for (; k >= 0; --k) {
                const auto& [s, y] = memory[k];
                const double rho = 1.0 / dot(s, y);
                alpha[k] = rho * dot(s, d);
                for (size_t i = 0; i < m; ++i) d[i] -= alpha[k] * y[i];
            }
            if (!memory.empty()) {
                const auto& [s, y] = memory.back();
                const double gamma = dot(s, y) / dot(y, y);
                for (auto& c : d) c *= gamma;
            }
            for (size_t k2 = 0; k2 < memory.size(); ++k2) {
                const auto& [s, y] = memory[k2];
                const double rho = 1.0 / dot(s, y);
                const double beta = rho * dot(y, d);
                for (size_t i = 0; i < m; ++i) d[i] += (alpha[k2] - beta) * s[i];
            }
        }
        // forbid raising marginal pieces; fall back to the clamped gradient
        const double mass_eps = 1e-13 * (1.0 + norm_inf(masses));
        for (size_t i = 0; i < m; ++i)
            if (masses[i] <= mass_eps && d[i] < 0.0) d[i] = 0.0;
        double dir_deriv = dot(G, d);
        if (!(dir_deriv > 0.0)) {  // not a descent direction; fall back
            d = G;
            dir_deriv = dot(G, G);
        }

        // backtracking line search on the normalized objective
        double step = 1.0;
        Vec v_new;
        double f_new = fv;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            Vec trial(m);
            for (size_t i = 0; i < m; ++i) trial[i] = v[i] - step * d[i];
            Vec lam_trial;
            trial = normalize_v(mu, pull_to_hull(mu, trial), &lam_trial);
            const double f_trial = eval_objective(trial);
            if (f_trial <= fv - opts.sufficient_decrease * step * dir_deriv) {
                v_new = std::move(trial);
                f_new = f_trial;
                lambda = std::move(lam_trial);
                accepted = true;
                break;
            }
            step *= opts.backtrack_factor;
        }
        if (!accepted) {
            memory.clear();  // curvature information is stale; stop here
            break;
        }

        Vec masses_new;
        Vec g_new = gradient_and_masses(v_new, &masses_new);
        Vec G_new = clamp_marginal(projected(g_new, lambda), masses_new);
        Vec s(m), y(m);
        for (size_t i = 0; i < m; ++i) {
            s[i] = v_new[i] - v[i];
            y[i] = G_new[i] - G[i];
        }
        const double sy = dot(s, y);
        if (sy > 1e-12 * norm2(s) * norm2(y)) {
            memory.emplace_back(std::move(s), std::move(y));
            if (static_cast<int>(memory.size()) > memory_cap) memory.pop_front();
        }
        // stale curvature when the set of live cells changes
        const double eps_old = 1e-13 * (1.0 + norm_inf(masses));
        const double eps_new = 1e-13 * (1.0 + norm_inf(masses_new));
        for (size_t i = 0; i < m; ++i) {
            if ((masses[i] <= eps_old) != (masses_new[i] <= eps_new)) {
                memory.clear();
                break;
            }
        }
        v = std::move(v_new);
        fv = f_new;
        g = std::move(g_new);
        masses = std::move(masses_new);
        G = std::move(G_new);
        res.trace.push_back({fv, norm_inf(G)});
    }
    if (!res.converged && norm_inf(G) <= opts.tol) res.converged = true;
    res.iterations = it;

    // Final normalized state and the recovery certificate.
    v = normalize_v(mu, pull_to_hull(mu, v), &lambda);
    const MaxAffine h = build_h(mu, v);
    res.v = v;
    for (size_t i = 0; i < m; ++i) res.phi0.push_back({mu.atoms[i].location, v[i]});
    const CellIntegrals final_masses = cell_power_integrals(h, -q, opts.scheme);
    const double w_nq = final_masses.total;  // W_{n-q}(h)
    res.tau = mu.total_mass() / w_nq;
    DiscreteMeasure rec;
    rec.dim = mu.dim;
    for (size_t i = 0; i < m; ++i)
        if (final_masses.per_cell[i] > 1e-300)
            rec.atoms.push_back({mu.atoms[i].location, res.tau * final_masses.per_cell[i]});
    res.recovered = rec;
    res.residual_tv = tv_distance(normalized(mu), normalized(rec));
    res.phi0_star = h;
    return res;
}

VerifyReport verify_solution(const DiscreteMeasure& mu, double q, const SolveResult& result,
                             const Scheme& scheme) {
    VerifyReport rep;
    if (!result.phi0_star) fail(Errc::invalid_argument, "result carries no phi0_star");
    const MaxAffine& h = *result.phi0_star;

    // independent sampled recomputation of the curvature measure
    const CellIntegrals masses = cell_power_integrals_sampled(h, -q, scheme);
    DiscreteMeasure rec;
    rec.dim = mu.dim;
    for (size_t i = 0; i < masses.per_cell.size(); ++i)
        if (masses.per_cell[i] > 1e-300)
            rec.atoms.push_back({h.pieces()[i].slope, masses.per_cell[i]});
    rep.tv_normalized = tv_distance(normalized(mu), normalized(rec));
    rep.stderr_est = masses.stderr_est;

    rep.tau_identity_lhs = 1.0 / masses.total;
    const double wbar = normalized_quermass_shifted(h, q, scheme);
    rep.tau_identity_rhs = std::pow(wbar, q) * std::exp(-wbar);
    rep.tau_identity_residual = std::abs(rep.tau_identity_lhs - rep.tau_identity_rhs);

    const NormalizeResult norm = normalize_at_origin(h);
    rep.inf_h = norm.shift;
    return rep;
}

}  // namespace fdm
