#ifndef FDM_CORE_INEQUALITIES_HPP
#define FDM_CORE_INEQUALITIES_HPP

#include "core/gauss_integrals.hpp"

namespace fdm {

// gap >= 0 means the inequality holds in its stated orientation.
struct GapReport {
    std::string name;
    std::string instance;
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
    double stderr_est = 0.0;
    double tol = 1e-3;
    bool pass = false;

    void finish() { pass = gap >= -std::max(3.0 * stderr_est, tol); }
};

// Brunn-Minkowski along [f(1-t)] [] [g t]. For q <= -1 the combination's
// power mean M_{-q} sits below the interpolated means (the proof's norm
// form); for -1 < q < 0 the orientation reverses for the 1/q-normalized
// quermassintegral.
GapReport brunn_minkowski_gap(const FunctionPtr& f, const FunctionPtr& g, double t, double q,
                              const Scheme& scheme);

// Proof-display orientation:
// gap = [Wbar(g) - Wbar(f)] - Wbar(f)^q [W(f,f) - W(f,g)] at index n+1-q.
GapReport minkowski_gap(const FunctionPtr& f, const FunctionPtr& g, double q,
                        const Scheme& scheme);

// Monotonicity of -q -> (integral f^{-q})^{-1/q}; needs -q1 < -q2.
GapReport jensen_monotonicity_check(const FunctionPtr& f, double q1, double q2,
                                    const Scheme& scheme);

// Lebesgue-measure Prekopa-Leindler with h = e^{-[f(1-t)][]g t]}; truncation
// box chosen so the reported tail bound is below tolerance.
GapReport prekopa_leindler_check(const FunctionPtr& f, const FunctionPtr& g, double t);

struct BatteryFunction {
    std::string name;
    FunctionPtr fn;
    bool positive;  // bounded away from 0 (usable for jensen / q > 0 powers)
    int dim;
};

// quadratics, gauges, Huber pairs used across the checks
std::vector<BatteryFunction> standard_battery();

// Battery runners behind `fdm check`.
std::vector<GapReport> run_battery_bm(const Scheme& scheme);
std::vector<GapReport> run_battery_minkowski(const Scheme& scheme);
std::vector<GapReport> run_battery_jensen(const Scheme& scheme);
std::vector<GapReport> run_battery_pl();
std::vector<GapReport> run_battery_valuation(const Scheme& scheme);
std::vector<GapReport> run_battery_bridge();

std::string gap_reports_to_csv(const std::vector<GapReport>& reports);

}  // namespace fdm

#endif
