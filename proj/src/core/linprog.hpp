#ifndef FDM_CORE_LINPROG_HPP
#define FDM_CORE_LINPROG_HPP

#include <vector>

#include "core/common.hpp"

namespace fdm {

// min c'x  s.t.  A x = b, x >= 0.  Dense two-phase simplex with Bland's rule;
// sized for the desk-scale programs in this project (rows <= 8, cols <= a few
// hundred).
struct LpResult {
    enum class Status { optimal, infeasible, unbounded };
    Status status = Status::optimal;
    double objective = 0.0;
    Vec x;                   // primal solution (cols)
    std::vector<int> basis;  // basic column indices
};

LpResult solve_lp(const std::vector<Vec>& a_rows, const Vec& b, const Vec& c,
                  double tol = 1e-10);

}  // namespace fdm

#endif
