#pragma once

#include <optional>
#include <vector>

#include "balcl/cost.hpp"
#include "balcl/instance.hpp"
#include "balcl/lp.hpp"

namespace balcl {

// Fractional relaxation solution over a point set: x[i*n+j] is the fraction
// of point j's demand served by center i, y[i] the opening of i. C[j] is the
// per-point fractional connection cost sum_i c_ij x_ij / p and C_LP its
// scaled total sum_j p*C_j.
struct FractionalSolution {
  int n = 0;
  int p = 1;
  std::vector<double> x;  // n*n
  std::vector<double> y;  // n
  std::vector<double> C;  // n
  double C_LP = 0.0;
  double sum_y = 0.0;

  double xat(int i, int j) const { return x[static_cast<std::size_t>(i) * n + j]; }
};

struct RelaxOptions {
  // Per-point weights (summing to 1) switch the capacity rows to fractional
  // weighted form; without them the rows use integerized absolute counts.
  const std::vector<double>* weights = nullptr;
  // k-center feasibility mode: x_ij exists only on threshold edges, the
  // cardinality row is an equality, and the objective is constant.
  bool kcenter = false;
  // Restrict to a vertex subset (k-center per-component probes); empty = all.
  std::vector<int> vertices;
  // Override cons.k (per-component budget in the exact k-center algorithm).
  int k_override = -1;
};

// Builds LP.1-LP.5 (or the k-center feasibility variant) over the cost
// matrix. Exposed separately so tests can audit row/var counts.
lp::LinearProgram build_relaxation(const CostMatrix& cm, const Constraints& cons,
                                   const RelaxOptions& opts = {});

// Solves the relaxation; nullopt when infeasible. The result is checked
// against the LP invariants before it is returned.
std::optional<FractionalSolution> solve_relaxation(const CostMatrix& cm, const Constraints& cons,
                                                   const RelaxOptions& opts = {});

// Feasibility probe for the k-center threshold LP at threshold t.
std::optional<FractionalSolution> kcenter_lp_feasible(const Instance& inst, double t,
                                                      const Constraints& cons,
                                                      const RelaxOptions& opts = {});

// Throws InvariantError if the solution violates the LP constraints beyond
// tolerance: per-point demand p, capacity rows, x <= y, y <= 1, sum_y <= k.
void check_fractional(const FractionalSolution& fs, const CostMatrix& cm, const Constraints& cons,
                      const RelaxOptions& opts = {}, double tol = 1e-6);

}  // namespace balcl
