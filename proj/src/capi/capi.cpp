#include "fdm.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "core/inequalities.hpp"
#include "core/json_io.hpp"

using namespace fdm;

struct fdm_function_t {
    FunctionPtr rep;
};
struct fdm_measure_t {
    DiscreteMeasure rep;
};
struct fdm_solve_result_t {
    SolveResult rep;
    SolverOptions opts;
};

namespace {

thread_local std::string g_last_error;

fdm_status status_of(const FdmError& e) {
    switch (e.code()) {
        case Errc::usage: return FDM_ERR_USAGE;
        case Errc::not_converged: return FDM_ERR_NOT_CONVERGED;
        case Errc::non_convergent: return FDM_ERR_NOT_CONVERGED;
        case Errc::io_error: return FDM_ERR_RUNTIME;
        default: return FDM_ERR_INVALID_INPUT;
    }
}

void set_status(fdm_status* status, fdm_status v) {
    if (status) *status = v;
}

template <typename F>
auto guarded(fdm_status* status, F&& body) -> decltype(body()) {
    try {
        auto r = body();
        set_status(status, FDM_OK);
        return r;
    } catch (const FdmError& e) {
        g_last_error = e.what();
        set_status(status, status_of(e));
    } catch (const std::exception& e) {
        g_last_error = e.what();
        set_status(status, FDM_ERR_RUNTIME);
    }
    return decltype(body())();
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

Scheme parse_scheme_arg(const char* scheme, uint64_t seed) {
    return Scheme::parse(scheme ? scheme : "hermite:64", seed);
}

}  // namespace

extern "C" {

const char* fdm_last_error(void) { return g_last_error.c_str(); }

void fdm_string_free(char* s) { std::free(s); }

fdm_function_t* fdm_function_parse_json(const char* text, fdm_status* status) {
    return guarded(status, [&]() -> fdm_function_t* {
        if (!text) fail(Errc::schema_error, "null input");
        return new fdm_function_t{parse_function_json(text)};
    });
}

char* fdm_function_to_json(const fdm_function_t* f, fdm_status* status) {
    return guarded(status, [&]() -> char* { return dup_string(function_to_json(*f->rep)); });
}

void fdm_function_free(fdm_function_t* f) { delete f; }

int fdm_function_dim(const fdm_function_t* f) { return f ? f->rep->dim() : 0; }

fdm_status fdm_function_eval(const fdm_function_t* f, const double* x, int n, double* out,
                             int* is_finite) {
    fdm_status st = FDM_OK;
    guarded(&st, [&]() -> int {
        const ExtReal v = f->rep->value(std::span<const double>(x, static_cast<size_t>(n)));
        if (is_finite) *is_finite = v.is_finite() ? 1 : 0;
        if (out) *out = v.is_finite() ? v.value() : 0.0;
        return 0;
    });
    return st;
}

fdm_status fdm_function_gradient(const fdm_function_t* f, const double* x, int n, double* grad,
                                 int* is_smooth) {
    fdm_status st = FDM_OK;
    guarded(&st, [&]() -> int {
        const GradientResult g =
            f->rep->gradient(std::span<const double>(x, static_cast<size_t>(n)));
        for (int k = 0; k < f->rep->dim(); ++k) grad[k] = g.g[k];
        if (is_smooth) *is_smooth = g.is_smooth ? 1 : 0;
        return 0;
    });
    return st;
}

fdm_function_t* fdm_function_conjugate(const fdm_function_t* f, fdm_status* status) {
    return guarded(status,
                   [&]() -> fdm_function_t* { return new fdm_function_t{conjugate_of(f->rep)}; });
}

fdm_function_t* fdm_grid_conjugate(const fdm_function_t* f, const double* dual_lo,
                                   const double* dual_hi, const int* dual_shape, int dim,
                                   fdm_status* status) {
    return guarded(status, [&]() -> fdm_function_t* {
        const auto g = std::dynamic_pointer_cast<const GridFunction>(f->rep);
        if (!g) fail(Errc::invalid_argument, "grid conjugate needs a grid function");
        Vec lo(dual_lo, dual_lo + dim), hi(dual_hi, dual_hi + dim);
        std::vector<int> shape(dual_shape, dual_shape + dim);
        return new fdm_function_t{
            std::make_shared<GridFunction>(grid_conjugate(*g, lo, hi, shape))};
    });
}

fdm_function_t* fdm_inf_convolution(const fdm_function_t* f, const fdm_function_t* g,
                                    fdm_status* status) {
    return guarded(status, [&]() -> fdm_function_t* {
        return new fdm_function_t{inf_convolution(f->rep, g->rep)};
    });
}

fdm_function_t* fdm_right_scalar_mult(const fdm_function_t* f, double t, fdm_status* status) {
    return guarded(status, [&]() -> fdm_function_t* {
        return new fdm_function_t{right_scalar_mult(f->rep, t)};
    });
}

fdm_function_t* fdm_gauge_from_polar_vertices(int dim, const double* vertices, int count,
                                              fdm_status* status) {
    return guarded(status, [&]() -> fdm_function_t* {
        std::vector<Vec> u;
        for (int i = 0; i < count; ++i) u.emplace_back(vertices + i * dim, vertices + (i + 1) * dim);
        return new fdm_function_t{
            std::make_shared<MaxAffine>(gauge_from_polar_vertices(dim, u))};
    });
}

fdm_function_t* fdm_normalize_at_origin(const fdm_function_t* f, double* shift,
                                        fdm_status* status) {
    return guarded(status, [&]() -> fdm_function_t* {
        const auto ma = std::dynamic_pointer_cast<const MaxAffine>(f->rep);
        if (!ma) fail(Errc::invalid_argument, "normalize_at_origin needs a max-affine function");
        NormalizeResult r = normalize_at_origin(*ma);
        if (shift) *shift = r.shift;
        return new fdm_function_t{std::make_shared<MaxAffine>(std::move(r.normalized))};
    });
}

fdm_status fdm_check_convexity_grid(const fdm_function_t* f, double tol, double* worst_violation,
                                    int* pass) {
    fdm_status st = FDM_OK;
    guarded(&st, [&]() -> int {
        const auto g = std::dynamic_pointer_cast<const GridFunction>(f->rep);
        if (!g) fail(Errc::invalid_argument, "convexity check needs a grid function");
        const ConvexityReport rep = check_convexity_grid(*g, tol);
        if (worst_violation) *worst_violation = rep.worst_violation;
        if (pass) *pass = rep.pass ? 1 : 0;
        return 0;
    });
    return st;
}

char* fdm_function_sample_csv(const fdm_function_t* f, const double* lo, const double* hi,
                              int points_per_axis, fdm_status* status) {
    return guarded(status, [&]() -> char* {
        const int d = f->rep->dim();
        Vec l(lo, lo + d), h(hi, hi + d);
        return dup_string(function_samples_csv(*f->rep, l, h, points_per_axis));
    });
}

char* fdm_dual_quermassintegral(const fdm_function_t* f, double q, const char* scheme,
                                uint64_t seed, fdm_status* status) {
    return guarded(status, [&]() -> char* {
        return dup_string(integral_result_to_json(
            dual_quermassintegral(f->rep, q, parse_scheme_arg(scheme, seed))));
    });
}

char* fdm_normalized_quermassintegral(const fdm_function_t* f, double q, const char* scheme,
                                      uint64_t seed, fdm_status* status) {
    return guarded(status, [&]() -> char* {
        return dup_string(integral_result_to_json(
            normalized_quermassintegral(f->rep, q, parse_scheme_arg(scheme, seed))));
    });
}

char* fdm_weighted_second_moment(const fdm_function_t* f, double q, const char* scheme,
                                 uint64_t seed, fdm_status* status) {
    return guarded(status, [&]() -> char* {
        return dup_string(integral_result_to_json(
            weighted_second_moment(f->rep, q, parse_scheme_arg(scheme, seed))));
    });
}

char* fdm_self_mixed(const fdm_function_t* f, double q, const char* scheme, uint64_t seed,
                     fdm_status* status) {
    return guarded(status, [&]() -> char* {
        return dup_string(
            integral_result_to_json(self_mixed(f->rep, q, parse_scheme_arg(scheme, seed))));
    });
}

char* fdm_mixed_integral(const fdm_function_t* f, const fdm_function_t* g, double q,
                         const char* scheme, uint64_t seed, fdm_status* status) {
    return guarded(status, [&]() -> char* {
        return dup_string(integral_result_to_json(
            mixed_integral(f->rep, g->rep, q, parse_scheme_arg(scheme, seed))));
    });
}

char* fdm_mixed_fd(const fdm_function_t* f, const fdm_function_t* g, double q, const char* scheme,
                   uint64_t seed, fdm_status* status) {
    return guarded(status, [&]() -> char* {
        return dup_string(integral_result_to_json(
            mixed_fd(f->rep, g->rep, q, parse_scheme_arg(scheme, seed))));
    });
}

fdm_measure_t* fdm_measure_parse_json(const char* text, fdm_status* status) {
    return guarded(status, [&]() -> fdm_measure_t* {
        if (!text) fail(Errc::schema_error, "null input");
        return new fdm_measure_t{parse_measure_json(text)};
    });
}

char* fdm_measure_to_json(const fdm_measure_t* m, fdm_status* status) {
    return guarded(status, [&]() -> char* { return dup_string(measure_to_json(m->rep)); });
}

char* fdm_measure_to_csv(const fdm_measure_t* m, fdm_status* status) {
    return guarded(status, [&]() -> char* { return dup_string(measure_to_csv(m->rep)); });
}

void fdm_measure_free(fdm_measure_t* m) { delete m; }

fdm_status fdm_measure_validate(const fdm_measure_t* m) {
    fdm_status st = FDM_OK;
    guarded(&st, [&]() -> int {
        validate_measure(m->rep);
        return 0;
    });
    return st;
}

fdm_status fdm_hyperplane_support_test(const fdm_measure_t* m, double tol, double* sigma,
                                       int* degenerate) {
    fdm_status st = FDM_OK;
    guarded(&st, [&]() -> int {
        const SupportTest t = hyperplane_support_test(m->rep, tol);
        if (sigma) *sigma = t.sigma;
        if (degenerate) *degenerate = t.degenerate ? 1 : 0;
        return 0;
    });
    return st;
}

fdm_measure_t* fdm_dual_curvature_semidiscrete(const fdm_function_t* h, double q,
                                               const char* scheme, uint64_t seed,
                                               fdm_status* status) {
    return guarded(status, [&]() -> fdm_measure_t* {
        const auto ma = std::dynamic_pointer_cast<const MaxAffine>(h->rep);
        if (!ma) fail(Errc::invalid_argument, "semidiscrete curvature needs a max-affine function");
        return new fdm_measure_t{
            dual_curvature_semidiscrete(*ma, q, parse_scheme_arg(scheme, seed))};
    });
}

char* fdm_dual_curvature_empirical(const fdm_function_t* f, double q, long long n, uint64_t seed,
                                   fdm_status* status) {
    return guarded(status, [&]() -> char* {
        return dup_string(empirical_to_json(dual_curvature_empirical(f->rep, q, n, seed)));
    });
}

fdm_status fdm_body_bridge_check(const fdm_function_t* gauge, double q, double* lhs, double* rhs) {
    fdm_status st = FDM_OK;
    guarded(&st, [&]() -> int {
        const auto ma = std::dynamic_pointer_cast<const MaxAffine>(gauge->rep);
        if (!ma) fail(Errc::invalid_argument, "bridge check needs a max-affine gauge");
        const BridgeResult r = body_bridge_check(*ma, q);
        if (lhs) *lhs = r.lhs;
        if (rhs) *rhs = r.rhs;
        return 0;
    });
    return st;
}

char* fdm_valuation_check(const fdm_function_t* f, const fdm_function_t* g, double q,
                          const char* scheme, uint64_t seed, fdm_status* status) {
    return guarded(status, [&]() -> char* {
        const ValuationReport r =
            valuation_check(f->rep, g->rep, q, parse_scheme_arg(scheme, seed));
        std::string json = "{\"exact\":";
        json += r.exact_path ? "true" : "false";
        json += ",\"max_discrepancy\":" + format_double(r.max_discrepancy);
        json += ",\"stderr\":" + format_double(r.stderr_est);
        json += ",\"pass\":";
        json += r.pass ? "true" : "false";
        json += "}";
        return dup_string(json);
    });
}

fdm_solve_result_t* fdm_solve(const fdm_measure_t* mu, const char* options_json,
                              fdm_status* status) {
    fdm_solve_result_t* out = guarded(status, [&]() -> fdm_solve_result_t* {
        SolverOptions opts;
        opts.scheme = Scheme::parse("qmc:65536", 0);
        if (options_json && *options_json) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(options_json);
            } catch (const nlohmann::json::exception& e) {
                fail(Errc::schema_error, std::string("options: ") + e.what());
            }
            if (j.contains("q")) opts.q = j["q"].get<double>();
            if (j.contains("tol")) opts.tol = j["tol"].get<double>();
            if (j.contains("max_iterations")) opts.max_iterations = j["max_iterations"].get<int>();
            if (j.contains("seed")) opts.seed = j["seed"].get<uint64_t>();
            if (j.contains("scheme"))
                opts.scheme = Scheme::parse(j["scheme"].get<std::string>(), opts.seed);
            opts.scheme.seed = opts.seed;
            if (j.contains("init"))
                opts.init = j["init"].get<std::string>() == "random"
                                ? SolverOptions::Init::random
                                : SolverOptions::Init::zeros;
            if (j.contains("init_scale")) opts.init_scale = j["init_scale"].get<double>();
        }
        return new fdm_solve_result_t{solve_minkowski(mu->rep, opts), opts};
    });
    if (out && status && *status == FDM_OK && !out->rep.converged) *status = FDM_ERR_NOT_CONVERGED;
    return out;
}

void fdm_solve_result_free(fdm_solve_result_t* r) { delete r; }

char* fdm_solve_result_to_json(const fdm_solve_result_t* r, fdm_status* status) {
    return guarded(status, [&]() -> char* {
        return dup_string(solve_result_to_json(r->rep, r->opts, nullptr));
    });
}

char* fdm_solve_result_trace_csv(const fdm_solve_result_t* r, fdm_status* status) {
    return guarded(status, [&]() -> char* { return dup_string(trace_to_csv(r->rep)); });
}

double fdm_solve_result_residual_tv(const fdm_solve_result_t* r) { return r->rep.residual_tv; }

int fdm_solve_result_converged(const fdm_solve_result_t* r) { return r->rep.converged ? 1 : 0; }

char* fdm_verify_solution(const fdm_measure_t* mu, double q, const fdm_solve_result_t* r,
                          const char* scheme, uint64_t seed, fdm_status* status) {
    return guarded(status, [&]() -> char* {
        const VerifyReport rep =
            verify_solution(mu->rep, q, r->rep, parse_scheme_arg(scheme ? scheme : "mc:200000", seed));
        return dup_string(solve_result_to_json(r->rep, r->opts, &rep));
    });
}

char* fdm_battery_run_csv(const char* which, const char* scheme, uint64_t seed,
                          fdm_status* status) {
    return guarded(status, [&]() -> char* {
        const Scheme s = parse_scheme_arg(scheme ? scheme : "qmc:65536", seed);
        const std::string name = which ? which : "";
        std::vector<GapReport> reports;
        if (name == "minkowski") reports = run_battery_minkowski(s);
        else if (name == "bm") reports = run_battery_bm(s);
        else if (name == "jensen") reports = run_battery_jensen(s);
        else if (name == "pl") reports = run_battery_pl();
        else if (name == "valuation") reports = run_battery_valuation(s);
        else if (name == "bridge") reports = run_battery_bridge();
        else fail(Errc::usage, "unknown battery '" + name + "'");
        return dup_string(gap_reports_to_csv(reports));
    });
}

}  // extern "C"
