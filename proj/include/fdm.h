/* fdm: functional dual Brunn-Minkowski toolkit, C API.
 *
 * Opaque handles wrap the immutable core objects; every function that can
 * fail reports a status code and leaves a message in fdm_last_error()
 * (thread-local). Structured results are returned as JSON/CSV strings owned
 * by the library; release them with fdm_string_free().
 */
#ifndef FDM_H
#define FDM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct fdm_function_t fdm_function_t;
typedef struct fdm_measure_t fdm_measure_t;
typedef struct fdm_solve_result_t fdm_solve_result_t;

typedef enum fdm_status {
    FDM_OK = 0,
    FDM_ERR_USAGE = 1,
    FDM_ERR_INVALID_INPUT = 2,
    FDM_ERR_NOT_CONVERGED = 3,
    FDM_ERR_RUNTIME = 4
} fdm_status;

/* Message for the most recent failure on this thread. */
const char* fdm_last_error(void);
void fdm_string_free(char* s);

/* ---- convex functions ----------------------------------------------- */

/* JSON kinds: maxaffine | pointhull | grid | quadratic. */
fdm_function_t* fdm_function_parse_json(const char* text, fdm_status* status);
char* fdm_function_to_json(const fdm_function_t* f, fdm_status* status);
void fdm_function_free(fdm_function_t* f);
int fdm_function_dim(const fdm_function_t* f);

/* *out = f(x); *is_finite = 0 when f(x) = +inf (then *out is undefined). */
fdm_status fdm_function_eval(const fdm_function_t* f, const double* x, int n, double* out,
                             int* is_finite);
/* grad must hold dim entries; *is_smooth = 0 at a piece tie. */
fdm_status fdm_function_gradient(const fdm_function_t* f, const double* x, int n, double* grad,
                                 int* is_smooth);

fdm_function_t* fdm_function_conjugate(const fdm_function_t* f, fdm_status* status);
/* Discrete Legendre transform onto an explicit dual grid (grid inputs). */
fdm_function_t* fdm_grid_conjugate(const fdm_function_t* f, const double* dual_lo,
                                   const double* dual_hi, const int* dual_shape, int dim,
                                   fdm_status* status);
fdm_function_t* fdm_inf_convolution(const fdm_function_t* f, const fdm_function_t* g,
                                    fdm_status* status);
fdm_function_t* fdm_right_scalar_mult(const fdm_function_t* f, double t, fdm_status* status);
/* vertices: count x dim row-major; gauge of the polytope whose polar has
 * these vertices. */
fdm_function_t* fdm_gauge_from_polar_vertices(int dim, const double* vertices, int count,
                                              fdm_status* status);
/* Shift h so inf h = 0; *shift receives inf h. */
fdm_function_t* fdm_normalize_at_origin(const fdm_function_t* f, double* shift,
                                        fdm_status* status);
fdm_status fdm_check_convexity_grid(const fdm_function_t* f, double tol, double* worst_violation,
                                    int* pass);
/* CSV samples of a 1D/2D function on [lo,hi]^dim. */
char* fdm_function_sample_csv(const fdm_function_t* f, const double* lo, const double* hi,
                              int points_per_axis, fdm_status* status);

/* ---- Gaussian functionals ------------------------------------------- */
/* scheme: "hermite:N" (dim <= 3) | "mc:N" | "qmc:N". Results as JSON
 * {"value":..,"stderr":..,"scheme":{...}}. */

char* fdm_dual_quermassintegral(const fdm_function_t* f, double q, const char* scheme,
                                uint64_t seed, fdm_status* status);
char* fdm_normalized_quermassintegral(const fdm_function_t* f, double q, const char* scheme,
                                      uint64_t seed, fdm_status* status);
char* fdm_weighted_second_moment(const fdm_function_t* f, double q, const char* scheme,
                                 uint64_t seed, fdm_status* status);
char* fdm_self_mixed(const fdm_function_t* f, double q, const char* scheme, uint64_t seed,
                     fdm_status* status);
char* fdm_mixed_integral(const fdm_function_t* f, const fdm_function_t* g, double q,
                         const char* scheme, uint64_t seed, fdm_status* status);
char* fdm_mixed_fd(const fdm_function_t* f, const fdm_function_t* g, double q, const char* scheme,
                   uint64_t seed, fdm_status* status);

/* ---- measures and dual curvature ------------------------------------ */

fdm_measure_t* fdm_measure_parse_json(const char* text, fdm_status* status);
char* fdm_measure_to_json(const fdm_measure_t* m, fdm_status* status);
char* fdm_measure_to_csv(const fdm_measure_t* m, fdm_status* status);
void fdm_measure_free(fdm_measure_t* m);
/* FDM_OK when usable as solver input (positive mass, full-dimensional). */
fdm_status fdm_measure_validate(const fdm_measure_t* m);
fdm_status fdm_hyperplane_support_test(const fdm_measure_t* m, double tol, double* sigma,
                                       int* degenerate);

fdm_measure_t* fdm_dual_curvature_semidiscrete(const fdm_function_t* h, double q,
                                               const char* scheme, uint64_t seed,
                                               fdm_status* status);
/* Weighted-sample JSON {"dim":..,"atoms":[...],"seed":..,"n":..}. */
char* fdm_dual_curvature_empirical(const fdm_function_t* f, double q, long long n, uint64_t seed,
                                   fdm_status* status);
fdm_status fdm_body_bridge_check(const fdm_function_t* gauge, double q, double* lhs, double* rhs);
/* JSON {"exact":bool,"max_discrepancy":..,"stderr":..,"pass":bool}. */
char* fdm_valuation_check(const fdm_function_t* f, const fdm_function_t* g, double q,
                          const char* scheme, uint64_t seed, fdm_status* status);

/* ---- Minkowski problem solver --------------------------------------- */

/* options_json: {"q":..,"tol":..,"max_iterations":..,"scheme":"qmc:65536",
 * "seed":..,"init":"zeros"|"random"}; missing fields take defaults.
 * Returns a handle even when not converged (status FDM_ERR_NOT_CONVERGED). */
fdm_solve_result_t* fdm_solve(const fdm_measure_t* mu, const char* options_json,
                              fdm_status* status);
void fdm_solve_result_free(fdm_solve_result_t* r);
char* fdm_solve_result_to_json(const fdm_solve_result_t* r, fdm_status* status);
char* fdm_solve_result_trace_csv(const fdm_solve_result_t* r, fdm_status* status);
double fdm_solve_result_residual_tv(const fdm_solve_result_t* r);
int fdm_solve_result_converged(const fdm_solve_result_t* r);
/* Re-verification with an independent scheme; JSON report. */
char* fdm_verify_solution(const fdm_measure_t* mu, double q, const fdm_solve_result_t* r,
                          const char* scheme, uint64_t seed, fdm_status* status);

/* ---- inequality batteries ------------------------------------------- */

/* which: minkowski | bm | jensen | pl | valuation | bridge.
 * CSV columns: name,instance,lhs,rhs,gap,stderr,pass. */
char* fdm_battery_run_csv(const char* which, const char* scheme, uint64_t seed,
                          fdm_status* status);

#ifdef __cplusplus
}
#endif

#endif /* FDM_H */
