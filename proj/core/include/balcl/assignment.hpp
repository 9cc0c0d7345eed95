#pragma once

#include <utility>
#include <vector>

namespace balcl {

// A (possibly replicated) assignment: every point receives `p` center slots,
// recorded as (center point-index, multiplicity) pairs with multiplicities
// summing to p. Centers are indices into the instance's points.
struct Assignment {
  std::vector<int> centers;  // distinct point indices, ascending
  std::vector<std::vector<std::pair<int, int>>> assign;  // per point: (center, mult)

  int n() const { return static_cast<int>(assign.size()); }

  int multiplicity(int j, int center) const {
    for (auto& [c, m] : assign[j])
      if (c == center) return m;
    return 0;
  }

  int slots(int j) const {
    int s = 0;
    for (auto& [c, m] : assign[j]) s += m;
    return s;
  }
};

// Capacity audit of an assignment. Loads are fractions of total mass (count/n
// unweighted, or summed weights). A factor is the multiplicative amount by
// which the worst center misses its bound: >= 1 means violated, 1 means tight
// or satisfied.
struct ViolationReport {
  std::vector<double> loads;        // per center, fraction of mass
  std::vector<long long> counts;    // per center, integer slot totals
  double max_upper_factor = 1.0;    // max over centers of load / L
  double max_lower_factor = 1.0;    // max over centers of ell / load
  int worst_multiplicity = 0;
  bool feasible(double tol = 1e-7) const {
    return max_upper_factor <= 1.0 + tol && max_lower_factor <= 1.0 + tol;
  }
};

}  // namespace balcl
