#include "core/linprog.hpp"

#include <algorithm>
#include <cmath>

namespace fdm {

namespace {

// Tableau simplex on [A | b] with cost row appended; Bland's rule on ties.
class Tableau {
public:
    Tableau(const std::vector<Vec>& a, const Vec& b, int ncols, double tol)
        : m_(static_cast<int>(a.size())), n_(ncols), tol_(tol) {
        t_.assign(m_ + 1, Vec(n_ + 1, 0.0));
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) t_[i][j] = a[i][j];
            t_[i][n_] = b[i];
        }
        basis_.assign(m_, -1);
    }

    void set_cost(const Vec& c) {
        for (int j = 0; j < n_; ++j) t_[m_][j] = j < static_cast<int>(c.size()) ? c[j] : 0.0;
        t_[m_][n_] = 0.0;
        // price out the current basis
        for (int i = 0; i < m_; ++i) {
            const int jb = basis_[i];
            const double cb = t_[m_][jb];
            if (cb != 0.0)
                for (int j = 0; j <= n_; ++j) t_[m_][j] -= cb * t_[i][j];
        }
    }

    void set_basis(int row, int col) { basis_[row] = col; }

    void pivot(int row, int col) {
        const double piv = t_[row][col];
        for (int j = 0; j <= n_; ++j) t_[row][j] /= piv;
        for (int i = 0; i <= m_; ++i) {
            if (i == row) continue;
            const double f = t_[i][col];
            if (f == 0.0) continue;
            for (int j = 0; j <= n_; ++j) t_[i][j] -= f * t_[row][j];
        }
        basis_[row] = col;
    }

    // Returns false when unbounded.
    bool run(int allowed_cols) {
        for (int iter = 0; iter < 20000; ++iter) {
            int enter = -1;
            for (int j = 0; j < allowed_cols; ++j) {
                if (t_[m_][j] < -tol_) {
                    enter = j;
                    break;  // Bland: first improving column
                }
            }
            if (enter < 0) return true;
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (t_[i][enter] > tol_) {
                    const double ratio = t_[i][n_] / t_[i][enter];
                    if (leave < 0 || ratio < best - tol_ ||
                        (ratio < best + tol_ && basis_[i] < basis_[leave])) {
                        leave = i;
                        best = ratio;
                    }
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
        fail(Errc::non_convergent, "simplex iteration cap reached");
    }

    double rhs(int i) const { return t_[i][n_]; }
    double entry(int i, int j) const { return t_[i][j]; }
    double objective() const { return -t_[m_][n_]; }
    int basis(int i) const { return basis_[i]; }
    int rows() const { return m_; }

private:
    int m_, n_;
    double tol_;
    std::vector<Vec> t_;
    std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const std::vector<Vec>& a_rows, const Vec& b, const Vec& c, double tol) {
    const int m = static_cast<int>(a_rows.size());
    const int n = m > 0 ? static_cast<int>(a_rows[0].size()) : static_cast<int>(c.size());

    // Phase 1 with artificial columns n..n+m-1; flip rows so b >= 0.
    std::vector<Vec> a = a_rows;
    Vec rhs = b;
    for (int i = 0; i < m; ++i) {
        if (rhs[i] < 0.0) {
            rhs[i] = -rhs[i];
            for (auto& v : a[i]) v = -v;
        }
        a[i].resize(n + m, 0.0);
        a[i][n + i] = 1.0;
    }

    Tableau tab(a, rhs, n + m, tol);
    for (int i = 0; i < m; ++i) tab.set_basis(i, n + i);
    Vec phase1_cost(n + m, 0.0);
    for (int i = 0; i < m; ++i) phase1_cost[n + i] = 1.0;
    tab.set_cost(phase1_cost);
    tab.run(n + m);

    LpResult res;
    if (tab.objective() > 1e3 * tol * (1.0 + norm_inf(rhs))) {
        res.status = LpResult::Status::infeasible;
        return res;
    }
    // Pivot basic artificials out where a structural column is available; rows
    // that stay artificial are redundant and keep rhs 0 through phase 2.
    for (int i = 0; i < m; ++i) {
        if (tab.basis(i) < n) continue;
        for (int j = 0; j < n; ++j) {
            if (std::abs(tab.entry(i, j)) > tol) {
                tab.pivot(i, j);
                break;
            }
        }
    }

    Vec phase2_cost(n + m, 0.0);
    for (int j = 0; j < n && j < static_cast<int>(c.size()); ++j) phase2_cost[j] = c[j];
    tab.set_cost(phase2_cost);
    if (!tab.run(n)) {
        res.status = LpResult::Status::unbounded;
        return res;
    }

    res.status = LpResult::Status::optimal;
    res.x.assign(n, 0.0);
    res.basis.clear();
    double artificial_mass = 0.0;
    for (int i = 0; i < m; ++i) {
        const int jb = tab.basis(i);
        if (jb < n) {
            res.x[jb] = tab.rhs(i);
            res.basis.push_back(jb);
        } else {
            artificial_mass += std::abs(tab.rhs(i));
        }
    }
    if (artificial_mass > 1e3 * tol * (1.0 + norm_inf(rhs))) {
        res.status = LpResult::Status::infeasible;
        return res;
    }
    double obj = 0.0;
    for (int j = 0; j < n && j < static_cast<int>(c.size()); ++j) obj += c[j] * res.x[j];
    res.objective = obj;
    return res;
}

}  // namespace fdm
