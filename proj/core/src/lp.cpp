#include "balcl/lp.hpp"

#include <algorithm>
#include <cmath>

#include "balcl/errors.hpp"

namespace balcl::lp {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kZeroEps = 1e-9;
constexpr double kPhase1Eps = 1e-7;

// Row-major dense tableau; the final standardized system is A x = b, b >= 0,
// with slack/surplus and artificial columns appended after the structurals.
class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0), b_(rows, 0.0) {}

  double& at(int r, int c) { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& rhs(int r) { return b_[r]; }
  double rhs(int r) const { return b_[r]; }
  int rows() const { return m_; }
  int cols() const { return cols_; }

  void pivot(int pr, int pc) {
    double* prow = &a_[static_cast<std::size_t>(pr) * cols_];
    double inv = 1.0 / prow[pc];
    for (int c = 0; c < cols_; ++c) prow[c] *= inv;
    b_[pr] *= inv;
    prow[pc] = 1.0;
    for (int r = 0; r < m_; ++r) {
      if (r == pr) continue;
      double f = at(r, pc);
      if (f == 0.0) continue;
      double* row = &a_[static_cast<std::size_t>(r) * cols_];
      for (int c = 0; c < cols_; ++c) row[c] -= f * prow[c];
      row[pc] = 0.0;
      b_[r] -= f * b_[pr];
    }
  }

 private:
  int m_, cols_;
  std::vector<double> a_;
  std::vector<double> b_;
};

struct Standardized {
  Tableau tab;
  std::vector<int> basis;        // basic column per row
  std::vector<char> artificial;  // per column
  int num_cols;
};

enum class PivotOutcome { Moved, Optimal, Unbounded };

// One simplex phase over reduced costs `cost` (length = columns). `banned`
// columns never enter. Mutates tab/basis in place. `bland_start` begins in
// Bland mode (used by the stabilized retry).
PivotOutcome run_phase(Tableau& tab, std::vector<int>& basis, std::vector<double>& cost,
                       double& cost_rhs, const std::vector<char>& banned, int num_structural,
                       bool bland_start) {
  const int m = tab.rows();
  const int cols = tab.cols();
  long long degenerate = 0;
  const long long bland_after = 10LL * std::max(1, num_structural);
  bool bland = bland_start;
  for (;;) {
    int enter = -1;
    if (!bland) {
      double best = -kZeroEps;
      for (int c = 0; c < cols; ++c) {
        if (banned[c]) continue;
        if (cost[c] < best) {
          best = cost[c];
          enter = c;
        }
      }
    } else {
      for (int c = 0; c < cols; ++c) {
        if (!banned[c] && cost[c] < -kZeroEps) {
          enter = c;
          break;
        }
      }
    }
    if (enter < 0) return PivotOutcome::Optimal;

    int leave = -1;
    double best_ratio = 0.0;
    double best_piv = 0.0;
    for (int r = 0; r < m; ++r) {
      double a = tab.at(r, enter);
      if (a <= kPivotEps) continue;
      double ratio = tab.rhs(r) / a;
      bool take = false;
      if (leave < 0 || ratio < best_ratio - 1e-12) {
        take = true;
      } else if (ratio < best_ratio + 1e-12) {
        // Near-tied ratios: in Bland mode keep the anti-cycling lowest basis
        // index; otherwise prefer the numerically safer (larger) pivot.
        if (bland)
          take = basis[r] < basis[leave];
        else
          take = a > best_piv || (a == best_piv && basis[r] < basis[leave]);
      }
      if (take) {
        leave = r;
        best_ratio = ratio;
        best_piv = a;
      }
    }
    if (leave < 0) return PivotOutcome::Unbounded;

    if (best_ratio <= 1e-12) {
      if (++degenerate > bland_after) bland = true;
    } else {
      degenerate = 0;
    }

    // Update the reduced-cost row alongside the tableau.
    double piv = tab.at(leave, enter);
    double f = cost[enter] / piv;
    if (f != 0.0) {
      for (int c = 0; c < cols; ++c) cost[c] -= f * tab.at(leave, c);
      cost[enter] = 0.0;
      cost_rhs -= f * tab.rhs(leave);
    }
    tab.pivot(leave, enter);
    basis[leave] = enter;
  }
}

LpSolution solve_once(const LinearProgram& prob, bool bland_start) {
  const int nv = prob.num_vars;

  // Collect rows in <= form: equalities split, >= negated, upper bounds appended.
  struct DenseRow {
    std::vector<std::pair<int, double>> coeffs;
    double rhs;
  };
  std::vector<DenseRow> le;
  for (auto& row : prob.rows) {
    if (row.sense == Sense::LE || row.sense == Sense::EQ) le.push_back({row.coeffs, row.rhs});
    if (row.sense == Sense::GE || row.sense == Sense::EQ) {
      DenseRow neg{row.coeffs, -row.rhs};
      for (auto& [v, a] : neg.coeffs) a = -a;
      le.push_back(std::move(neg));
    }
  }
  for (int v = 0; v < nv; ++v)
    if (std::isfinite(prob.upper[v])) le.push_back({{{v, 1.0}}, prob.upper[v]});

  const int m = static_cast<int>(le.size());
  int num_art = 0;
  for (auto& row : le)
    if (row.rhs < 0) ++num_art;

  const int cols = nv + m + num_art;
  Tableau tab(m, cols);
  std::vector<int> basis(m, -1);
  std::vector<char> artificial(cols, 0);

  int art_next = nv + m;
  for (int r = 0; r < m; ++r) {
    double sign = le[r].rhs < 0 ? -1.0 : 1.0;
    for (auto& [v, a] : le[r].coeffs) tab.at(r, v) += sign * a;
    tab.rhs(r) = sign * le[r].rhs;
    tab.at(r, nv + r) = sign;  // slack (+1) or surplus (-1)
    if (sign < 0) {
      tab.at(r, art_next) = 1.0;
      artificial[art_next] = 1;
      basis[r] = art_next++;
    } else {
      basis[r] = nv + r;
    }
  }

  LpSolution sol;

  // Phase 1: minimize the artificial sum.
  if (num_art > 0) {
    std::vector<double> cost(cols, 0.0);
    double cost_rhs = 0.0;
    for (int c = nv + m; c < cols; ++c) cost[c] = 1.0;
    for (int r = 0; r < m; ++r) {
      if (!artificial[basis[r]]) continue;
      for (int c = 0; c < cols; ++c) cost[c] -= tab.at(r, c);
      cost_rhs -= tab.rhs(r);
    }
    std::vector<char> banned(cols, 0);
    auto outcome = run_phase(tab, basis, cost, cost_rhs, banned, nv, bland_start);
    ensure(outcome != PivotOutcome::Unbounded, "lp: phase 1 unbounded");
    double art_sum = -cost_rhs;
    if (art_sum > kPhase1Eps) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Pivot leftover zero-level artificials out of the basis where possible,
    // on the numerically safest (largest-magnitude) column; a row with no
    // eligible column is redundant and stays inert.
    for (int r = 0; r < m; ++r) {
      if (!artificial[basis[r]]) continue;
      int pc = -1;
      double best = 1e-7;
      for (int c = 0; c < nv + m; ++c) {
        double a = std::abs(tab.at(r, c));
        if (a > best) {
          best = a;
          pc = c;
        }
      }
      if (pc >= 0) {
        tab.pivot(r, pc);
        basis[r] = pc;
      }
    }
  }

  // Phase 2 over the true objective, artificials banned.
  {
    std::vector<double> cost(cols, 0.0);
    double cost_rhs = 0.0;
    for (int v = 0; v < nv; ++v) cost[v] = prob.objective[v];
    for (int r = 0; r < m; ++r) {
      double cb = basis[r] < nv ? prob.objective[basis[r]] : 0.0;
      if (cb == 0.0) continue;
      for (int c = 0; c < cols; ++c) cost[c] -= cb * tab.at(r, c);
      cost_rhs -= cb * tab.rhs(r);
    }
    for (int c = 0; c < cols; ++c) cost[c] = artificial[c] ? 0.0 : cost[c];
    std::vector<char> banned(cols, 0);
    for (int c = 0; c < cols; ++c) banned[c] = artificial[c];
    auto outcome = run_phase(tab, basis, cost, cost_rhs, banned, nv, bland_start);
    if (outcome == PivotOutcome::Unbounded) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }
  }

  sol.status = LpStatus::Optimal;
  sol.x.assign(nv, 0.0);
  for (int r = 0; r < m; ++r)
    if (basis[r] < nv) sol.x[basis[r]] += tab.rhs(r);
  for (int v = 0; v < nv; ++v) {
    if (sol.x[v] < 0 && sol.x[v] > -1e-7) sol.x[v] = 0.0;
    sol.objective += prob.objective[v] * sol.x[v];
  }
  return sol;
}

// Worst violation of the original rows and bounds, relative to row scale.
double worst_residual(const LinearProgram& prob, const std::vector<double>& x) {
  double worst = 0.0;
  for (auto& row : prob.rows) {
    double lhs = 0.0;
    for (auto& [v, a] : row.coeffs) lhs += a * x[v];
    double scale = 1.0 + std::abs(row.rhs);
    double r = lhs - row.rhs;
    if (row.sense == Sense::LE) worst = std::max(worst, r / scale);
    else if (row.sense == Sense::GE) worst = std::max(worst, -r / scale);
    else worst = std::max(worst, std::abs(r) / scale);
  }
  for (int v = 0; v < prob.num_vars; ++v) {
    worst = std::max(worst, -x[v]);
    if (std::isfinite(prob.upper[v]))
      worst = std::max(worst, (x[v] - prob.upper[v]) / (1.0 + prob.upper[v]));
  }
  return worst;
}

}  // namespace

LpSolution lp_solve(const LinearProgram& prob) {
  LpSolution sol = solve_once(prob, false);
  if (sol.status != LpStatus::Optimal) return sol;
  // Tableau arithmetic can drift on unlucky pivot sequences; verify the
  // claimed optimum against the original rows and retry once with the slower
  // deterministic Bland pivoting before giving up.
  if (worst_residual(prob, sol.x) > 1e-6) {
    sol = solve_once(prob, true);
    if (sol.status != LpStatus::Optimal) return sol;
    ensure(worst_residual(prob, sol.x) <= 1e-6, "lp: solution failed residual verification");
  }
  return sol;
}

}  // namespace balcl::lp
