#ifndef FDM_CORE_JSON_IO_HPP
#define FDM_CORE_JSON_IO_HPP

#include <string>

#include "core/solver.hpp"

namespace fdm {

// On-disk schemas are discriminated by the top-level "kind" field
// (maxaffine | pointhull | grid | quadratic); files without "kind" are
// accepted when the field set identifies the type. Numbers are emitted as
// 17-significant-digit decimals in a fixed field order, so emit(parse(s)) is
// byte-stable and parse(emit(x)) == x.
FunctionPtr parse_function_json(const std::string& text);
std::string function_to_json(const ConvexFunction& f);

DiscreteMeasure parse_measure_json(const std::string& text);
std::string measure_to_json(const DiscreteMeasure& m);
std::string empirical_to_json(const EmpiricalMeasure& e);

std::string scheme_to_json(const Scheme& s);
std::string integral_result_to_json(const IntegralResult& r);

std::string solve_result_to_json(const SolveResult& r, const SolverOptions& opts,
                                 const VerifyReport* verification);

// CSV exports: one row per atom for measures; (x, f(x)) samples for 1D
// functions; (iteration, objective, gradnorm) for solver traces.
std::string measure_to_csv(const DiscreteMeasure& m);
std::string empirical_to_csv(const EmpiricalMeasure& e);
std::string function_samples_csv(const ConvexFunction& f, const Vec& lo, const Vec& hi,
                                 int points_per_axis);
std::string trace_to_csv(const SolveResult& r);

std::string format_double(double v);

}  // namespace fdm

#endif
