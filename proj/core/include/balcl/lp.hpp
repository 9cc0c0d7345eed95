#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace balcl::lp {

enum class Sense { LE, GE, EQ };

// Minimize c.x subject to rows and 0 <= x <= upper. Equalities are split
// into opposing inequalities during standardization.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<double> upper;  // +inf when absent
  struct Row {
    Sense sense;
    double rhs;
    std::vector<std::pair<int, double>> coeffs;
  };
  std::vector<Row> rows;

  int add_var(double cost, double ub = std::numeric_limits<double>::infinity()) {
    objective.push_back(cost);
    upper.push_back(ub);
    return num_vars++;
  }
  void add_row(Sense sense, double rhs, std::vector<std::pair<int, double>> coeffs) {
    rows.push_back({sense, rhs, std::move(coeffs)});
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

// Dense two-phase primal simplex. Entering variable: most negative reduced
// cost, ties to the lowest column; after 10*num_vars consecutive degenerate
// pivots the rule switches to Bland's, which cannot cycle. Deterministic.
LpSolution lp_solve(const LinearProgram& prob);

}  // namespace balcl::lp
