#pragma once

#include <limits>
#include <vector>

#include "balcl/assignment.hpp"
#include "balcl/instance.hpp"

namespace balcl {

enum class Objective { KMedian, KMeans, KCenter };

constexpr double kInf = std::numeric_limits<double>::infinity();

// Connection costs c_ij. For k-median c = d, for k-means c = d^2, for
// k-center the matrix is relative to a threshold t: c = t on edges (d <= t)
// and +inf otherwise.
struct CostMatrix {
  Objective objective = Objective::KMedian;
  int n = 0;
  double t = 0.0;  // k-center threshold, unused otherwise
  std::vector<double> c;  // n*n

  double at(int i, int j) const { return c[static_cast<std::size_t>(i) * n + j]; }
};

CostMatrix cost_matrix(const Instance& inst, Objective obj, double t = 0.0);

// Objective value of an assignment: sum of multiplicity-weighted distances
// (k-median), squared distances (k-means), or the max used distance (k-center).
double evaluate(const Instance& inst, const Assignment& a, Objective obj);

// Audits per-center loads against [ell, L]. Unweighted mass is count/n where
// n counts points (not slots); `weights` switches to summed weights.
ViolationReport check_capacities(const Assignment& a, const Constraints& cons,
                                 const std::vector<double>* weights = nullptr);

// Q(f,c) = sum_j (1/|f(x_j)|) sum_{i in f(x_j)} d(i,j)^2 with multiplicity;
// equals the plain k-means cost when every point has a single center.
double averaged_kmeans_objective(const Instance& inst, const Assignment& a);

// H = -(1/k) sum_clusters sum_labels p_cy log2 p_cy, where p_cy is the label
// distribution inside each cluster; empty clusters contribute 0 but still
// count in k. Lower is purer.
double class_entropy(const Assignment& a, const std::vector<int>& labels);

}  // namespace balcl
