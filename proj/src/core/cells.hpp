#ifndef FDM_CORE_CELLS_HPP
#define FDM_CORE_CELLS_HPP

#include "core/convex_ops.hpp"
#include "core/quadrature.hpp"

namespace fdm {

// Cells of a max-affine function: the regions where one piece attains the
// maximum (the gradient is constant there). 1D cells are exact intervals;
// in general dimension membership is the argmax oracle.
struct CellDecomposition {
    int dim = 1;
    Envelope1D envelope;             // 1D only
    std::vector<bool> piece_active;  // false = redundant piece (empty cell)

    int cell_of(const MaxAffine& h, std::span<const double> x) const {
        return h.active_index(x);
    }
};

CellDecomposition cells_of_max_affine(const MaxAffine& h);

struct CellIntegrals {
    Vec per_cell;             // integral of h^p over each piece's cell, gamma_n weighted
    double total = 0.0;       // sum
    double stderr_est = 0.0;  // 0 for the exact 1D/2D paths
};

// integral_{cell_i} h(y)^p dgamma_n(y) for every piece. Exact panelized
// quadrature in 1D (interval cells) and 2D (polar rays split at the cell
// kink directions); indicator-weighted sampling per `scheme` for dim >= 3.
// Fractional p requires h >= 0 on the integration region.
CellIntegrals cell_power_integrals(const MaxAffine& h, double p, const Scheme& scheme);

// Same sampling path regardless of dimension; used as the independent route
// when verifying solver output.
CellIntegrals cell_power_integrals_sampled(const MaxAffine& h, double p, const Scheme& scheme);

}  // namespace fdm

#endif
