#include "balcl/instance.hpp"

#include <algorithm>
#include <cstddef>

namespace balcl {

Instance Instance::from_points(std::vector<double> pts, int dim, std::vector<int> labels) {
  require(dim >= 1, "instance: dim must be >= 1");
  require(pts.size() % dim == 0, "instance: point buffer size not divisible by dim");
  Instance inst;
  inst.dim = dim;
  inst.n = static_cast<int>(pts.size() / dim);
  require(inst.n >= 1, "instance: no points");
  require(labels.empty() || static_cast<int>(labels.size()) == inst.n,
          "instance: label count does not match point count");
  inst.points = std::move(pts);
  inst.labels = std::move(labels);
  return inst;
}

Instance Instance::from_matrix(std::vector<double> d, int n, std::vector<int> labels) {
  require(n >= 1, "instance: no points");
  require(d.size() == static_cast<std::size_t>(n) * n, "instance: distance matrix is not n*n");
  require(labels.empty() || static_cast<int>(labels.size()) == n,
          "instance: label count does not match point count");
  Instance inst;
  inst.n = n;
  inst.dist = std::move(d);
  inst.labels = std::move(labels);
  return inst;
}

void Instance::validate_metric(double tol) const {
  if (!has_matrix()) return;  // point form is metric by construction
  auto at = [&](int i, int j) { return dist[static_cast<std::size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i) {
    require(std::abs(at(i, i)) <= tol,
            "distance matrix: nonzero diagonal at (" + std::to_string(i) + "," + std::to_string(i) + ")");
    for (int j = 0; j < n; ++j) {
      require(at(i, j) >= -tol,
              "distance matrix: negative entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      require(std::abs(at(i, j) - at(j, i)) <= tol,
              "distance matrix: asymmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m)
        require(at(i, j) <= at(i, m) + at(m, j) + tol,
                "distance matrix: triangle inequality fails for (" + std::to_string(i) + "," +
                    std::to_string(j) + "," + std::to_string(m) + ")");
}

std::vector<double> Instance::distinct_distances() const {
  std::vector<double> ds;
  ds.reserve(static_cast<std::size_t>(n) * (n - 1) / 2 + 1);
  ds.push_back(0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) ds.push_back(distance(i, j));
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  return ds;
}

}  // namespace balcl
