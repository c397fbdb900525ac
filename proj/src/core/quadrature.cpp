#include "core/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "core/rng.hpp"

namespace fdm {

Scheme Scheme::parse(const std::string& text, std::uint64_t seed) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    Scheme s;
    s.seed = seed;
    if (name == "hermite")
        s.kind = Kind::hermite;
    else if (name == "mc")
        s.kind = Kind::monte_carlo;
    else if (name == "qmc")
        s.kind = Kind::quasi_mc;
    else
        fail(Errc::usage, "unknown scheme '" + name + "' (expected hermite|mc|qmc)");
    if (colon != std::string::npos) {
        try {
            s.n = std::stoi(text.substr(colon + 1));
        } catch (const std::exception&) {
            fail(Errc::usage, "bad scheme count in '" + text + "'");
        }
    } else {
        s.n = s.kind == Kind::hermite ? 64 : 65536;
    }
    if (s.n < 2) fail(Errc::usage, "scheme needs at least 2 nodes/samples");
    return s;
}

std::string Scheme::to_string() const {
    const char* name = kind == Kind::hermite ? "hermite" : kind == Kind::monte_carlo ? "mc" : "qmc";
    return std::string(name) + ":" + std::to_string(n);
}

namespace {

// Eigenvalues of a symmetric tridiagonal matrix (diag d, offdiag e), QL with
// implicit shifts. Enough for Golub-Welsch at the sizes used here.
void tridiag_eigenvalues(Vec& d, Vec& e) {
    const int n = static_cast<int>(d.size());
    e.push_back(0.0);
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-300 + 1e-16 * dd) break;
            }
            if (m != l) {
                if (++iter == 60) fail(Errc::non_convergent, "tridiagonal QL did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && m - 1 >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    e.pop_back();
    std::sort(d.begin(), d.end());
}

// Orthonormal polynomial values p_0..p_{n-1} at x for the recurrence with
// Jacobi off-diagonals b_k; used for Christoffel weights and Newton polish.
void orthonormal_values(const Vec& b, double x, Vec& p) {
    const int n = static_cast<int>(p.size());
    p[0] = 1.0;
    if (n > 1) p[1] = x / b[0];
    for (int k = 1; k + 1 < n; ++k) p[k + 1] = (x * p[k] - b[k - 1] * p[k - 1]) / b[k];
}

// Gauss rule from the Jacobi matrix (zero diagonal, off-diagonals b), with
// total weight mu0. Nodes from tridiagonal eigenvalues plus one Newton step,
// weights from the Christoffel sum.
void gauss_from_jacobi(const Vec& b, double mu0, Vec& nodes, Vec& weights) {
    const int n = static_cast<int>(b.size()) + 1;
    Vec d(n, 0.0), e = b;
    tridiag_eigenvalues(d, e);
    nodes = d;
    weights.assign(n, 0.0);
    Vec p1(n + 1), pa(n + 1), pb2(n + 1);
    Vec bb = b;
    bb.push_back(1.0);  // extend the recurrence so p_n is reachable
    for (int i = 0; i < n; ++i) {
        // Newton polish on p_n; centered secant for the derivative.
        for (int polish = 0; polish < 2; ++polish) {
            orthonormal_values(bb, nodes[i], p1);
            const double h = 1e-7 * std::max(1.0, std::abs(nodes[i]));
            orthonormal_values(bb, nodes[i] + h, pa);
            orthonormal_values(bb, nodes[i] - h, pb2);
            const double deriv = (pa[n] - pb2[n]) / (2.0 * h);
            if (deriv != 0.0) nodes[i] -= p1[n] / deriv;
        }
        orthonormal_values(bb, nodes[i], p1);
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += p1[k] * p1[k];
        weights[i] = mu0 / s;
    }
    // Symmetrize: both rules here have even weight functions.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        const double w = 0.5 * (weights[i] + weights[j]);
        weights[i] = weights[j] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

}  // namespace

void gauss_hermite(int n, Vec& nodes, Vec& weights) {
    Vec b(n - 1);
    for (int k = 1; k < n; ++k) b[k - 1] = std::sqrt(k / 2.0);
    gauss_from_jacobi(b, std::sqrt(M_PI), nodes, weights);
}

void gauss_legendre(int n, Vec& nodes, Vec& weights) {
    Vec b(n - 1);
    for (int k = 1; k < n; ++k) b[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    gauss_from_jacobi(b, 2.0, nodes, weights);
}

namespace {

void parallel_fill(size_t count, const std::function<void(size_t, size_t)>& run_range,
                   size_t min_grain = 16384) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const size_t chunks = std::min<size_t>(hw, std::max<size_t>(1, count / min_grain));
    if (chunks <= 1) {
        run_range(0, count);
        return;
    }
    std::vector<std::thread> pool;
    const size_t per = (count + chunks - 1) / chunks;
    for (size_t c = 0; c < chunks; ++c) {
        const size_t lo = c * per, hi = std::min(count, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&run_range, lo, hi] { run_range(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

IntegralResult hermite_expectation(int dim, const Scheme& scheme,
                                   const std::function<double(std::span<const double>)>& f) {
    if (dim > 3) fail(Errc::usage, "hermite scheme supports dim <= 3; use mc/qmc");
    Vec x1, w1;
    gauss_hermite(scheme.n, x1, w1);
    // Convert weight e^{-t^2} to gamma_1: node sqrt(2) t, weight w / sqrt(pi).
    const double norm = std::pow(M_PI, -0.5 * dim);
    for (auto& t : x1) t *= std::sqrt(2.0);

    size_t total = 1;
    for (int k = 0; k < dim; ++k) total *= static_cast<size_t>(scheme.n);
    Vec terms(total);
    parallel_fill(total, [&](size_t lo, size_t hi) {
        Vec pt(dim);
        for (size_t idx = lo; idx < hi; ++idx) {
            size_t rest = idx;
            double w = norm;
            for (int k = 0; k < dim; ++k) {
                const size_t j = rest % scheme.n;
                rest /= scheme.n;
                pt[k] = x1[j];
                w *= w1[j];
            }
            terms[idx] = w * f(pt);
        }
    });
    IntegralResult r;
    r.value = pairwise_sum(terms);
    r.stderr_est = 0.0;
    r.scheme = scheme;
    return r;
}

IntegralResult mc_expectation(int dim, const Scheme& scheme,
                              const std::function<double(std::span<const double>)>& f) {
    const size_t n = static_cast<size_t>(scheme.n);
    Vec terms(n);
    const size_t chunk = 4096;
    const size_t nchunks = (n + chunk - 1) / chunk;
    parallel_fill(
        nchunks,
        [&](size_t clo, size_t chi) {
            Vec pt(dim);
            for (size_t c = clo; c < chi; ++c) {
                CounterRng rng(scheme.seed, c);
                const size_t stop = std::min(n, (c + 1) * chunk);
                for (size_t idx = c * chunk; idx < stop; ++idx) {
                    for (int k = 0; k < dim; ++k) pt[k] = inverse_normal_cdf(rng.next_uniform());
                    terms[idx] = f(pt);
                }
            }
        },
        4);
    IntegralResult r;
    r.scheme = scheme;
    r.value = pairwise_sum(terms) / static_cast<double>(n);
    double ss = 0.0;
    for (double t : terms) ss += (t - r.value) * (t - r.value);
    r.stderr_est = std::sqrt(ss / (static_cast<double>(n) - 1.0) / static_cast<double>(n));
    return r;
}

IntegralResult qmc_expectation(int dim, const Scheme& scheme,
                               const std::function<double(std::span<const double>)>& f) {
    // 8 independently scrambled replicates; the spread across replicates is
    // the error estimate.
    const int reps = 8;
    const size_t per = std::max<size_t>(2, static_cast<size_t>(scheme.n) / reps);
    Vec rep_means(reps);
    std::vector<Vec> rep_terms(reps, Vec(per));
    parallel_fill(
        static_cast<size_t>(reps),
        [&](size_t lo, size_t hi) {
            std::vector<double> z(dim);
            for (size_t rep = lo; rep < hi; ++rep) {
                ScrambledHaltonNormal seq(dim, scheme.seed * 1000003ull + rep, rep * 7919ull);
                for (size_t i = 0; i < per; ++i) {
                    seq.next(z);
                    rep_terms[rep][i] = f(z);
                }
                rep_means[rep] = pairwise_sum(rep_terms[rep]) / static_cast<double>(per);
            }
        },
        1);
    IntegralResult r;
    r.scheme = scheme;
    r.value = pairwise_sum(rep_means) / reps;
    double ss = 0.0;
    for (double m : rep_means) ss += (m - r.value) * (m - r.value);
    r.stderr_est = std::sqrt(ss / (reps - 1.0) / reps);
    return r;
}

}  // namespace

IntegralResult gauss_expectation(int dim, const Scheme& scheme,
                                 const std::function<double(std::span<const double>)>& f) {
    switch (scheme.kind) {
        case Scheme::Kind::hermite: return hermite_expectation(dim, scheme, f);
        case Scheme::Kind::monte_carlo: return mc_expectation(dim, scheme, f);
        case Scheme::Kind::quasi_mc: return qmc_expectation(dim, scheme, f);
    }
    fail(Errc::usage, "bad scheme kind");
}

double integrate_interval(double a, double b, int points_per_panel, double max_panel_width,
                          const std::function<double(double)>& f) {
    if (!(b > a)) return 0.0;
    static thread_local int cached_n = 0;
    static thread_local Vec gx, gw;
    if (cached_n != points_per_panel) {
        gauss_legendre(points_per_panel, gx, gw);
        cached_n = points_per_panel;
    }
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel_width)));
    const double h = (b - a) / panels;
    Vec sums(static_cast<size_t>(panels));
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h, mid = lo + 0.5 * h;
        double s = 0.0;
        for (int i = 0; i < points_per_panel; ++i) s += gw[i] * f(mid + 0.5 * h * gx[i]);
        sums[static_cast<size_t>(p)] = 0.5 * h * s;
    }
    return pairwise_sum(sums);
}

}  // namespace fdm
