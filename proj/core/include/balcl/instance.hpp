#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "balcl/errors.hpp"

namespace balcl {

// A clustering instance: either n points in R^dim (row-major `points`) or an
// explicit n-by-n distance matrix. Labels are optional class ids.
struct Instance {
  int n = 0;
  int dim = 0;
  std::vector<double> points;  // n*dim, empty in matrix form
  std::vector<double> dist;    // n*n, empty in point form
  std::vector<int> labels;     // size n or empty
  std::vector<std::pair<std::string, double>> meta;  // generator-suggested defaults

  bool has_points() const { return !points.empty(); }
  bool has_matrix() const { return !dist.empty(); }
  bool has_labels() const { return !labels.empty(); }

  const double* point(int i) const { return points.data() + static_cast<std::size_t>(i) * dim; }

  double distance_sq(int i, int j) const {
    if (has_points()) {
      const double* a = point(i);
      const double* b = point(j);
      double s = 0.0;
      for (int t = 0; t < dim; ++t) {
        double d = a[t] - b[t];
        s += d * d;
      }
      return s;
    }
    double d = dist[static_cast<std::size_t>(i) * n + j];
    return d * d;
  }

  double distance(int i, int j) const {
    if (has_matrix()) return dist[static_cast<std::size_t>(i) * n + j];
    return std::sqrt(distance_sq(i, j));
  }

  static Instance from_points(std::vector<double> pts, int dim, std::vector<int> labels = {});
  static Instance from_matrix(std::vector<double> d, int n, std::vector<int> labels = {});

  // Throws InvalidArgument naming the first violating entry/triple if the
  // matrix is not a metric (asymmetry, nonzero diagonal, negative entry, or
  // triangle inequality failure beyond tol).
  void validate_metric(double tol = 1e-9) const;

  // Sorted distinct pairwise distances, always including 0.
  std::vector<double> distinct_distances() const;
};

// Capacity and replication parameters shared by all solvers.
struct Constraints {
  int k = 1;        // number of clusters
  int p = 1;        // replication: centers per point
  double ell = 0.0; // lower capacity fraction
  double cap_L = 1.0; // upper capacity fraction

  // Integerized absolute bounds used everywhere a per-center point count is
  // compared against the fractional caps.
  int lower_count(int n) const { return static_cast<int>(std::ceil(n * ell - 1e-9)); }
  int upper_count(int n) const { return static_cast<int>(std::floor(n * cap_L + 1e-9)); }

  void validate(int n) const {
    require(k >= 1, "constraints: k must be >= 1");
    require(n >= 1, "constraints: empty instance");
    require(k <= n, "constraints: k exceeds number of points");
    require(p >= 1 && p <= k, "constraints: need 1 <= p <= k");
    require(ell >= 0.0 && ell <= 1.0, "constraints: ell outside [0,1]");
    require(cap_L > 0.0 && cap_L <= 1.0, "constraints: L outside (0,1]");
    require(ell <= cap_L, "constraints: ell > L");
    require(k * ell <= p + 1e-12, "constraints: k*ell > p (total demand p*n cannot fill all lower bounds)");
    require(k * cap_L >= p - 1e-12, "constraints: k*L < p (upper bounds cannot absorb demand p*n)");
  }
};

}  // namespace balcl
