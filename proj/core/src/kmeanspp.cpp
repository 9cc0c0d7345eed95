#include "balcl/kmeanspp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "balcl/errors.hpp"

namespace balcl {

namespace {

double sq_dist_to(const Instance& inst, int j, const std::vector<double>& center) {
  const double* x = inst.point(j);
  double s = 0.0;
  for (int t = 0; t < inst.dim; ++t) {
    double d = x[t] - center[t];
    s += d * d;
  }
  return s;
}

std::vector<double> centroid_of(const Instance& inst, const std::vector<int>& cluster) {
  std::vector<double> c(inst.dim, 0.0);
  for (int j : cluster) {
    const double* x = inst.point(j);
    for (int t = 0; t < inst.dim; ++t) c[t] += x[t];
  }
  for (double& v : c) v /= static_cast<double>(cluster.size());
  return c;
}

// Member minimizing the summed squared distance to the cluster (matrix form)
// or the squared distance to the centroid (point form); ties -> lowest index.
int representative_of(const Instance& inst, const std::vector<int>& cluster) {
  require(!cluster.empty(), "representative of empty cluster");
  int best = -1;
  double best_val = 0.0;
  if (inst.has_points()) {
    std::vector<double> c = centroid_of(inst, cluster);
    for (int j : cluster) {
      double v = sq_dist_to(inst, j, c);
      if (best < 0 || v < best_val - 1e-15 || (std::abs(v - best_val) <= 1e-15 && j < best)) {
        best = j;
        best_val = v;
      }
    }
  } else {
    for (int j : cluster) {
      double v = 0.0;
      for (int o : cluster) v += inst.distance_sq(j, o);
      if (best < 0 || v < best_val - 1e-15 || (std::abs(v - best_val) <= 1e-15 && j < best)) {
        best = j;
        best_val = v;
      }
    }
  }
  return best;
}

double center_gap(const Instance& inst, const std::vector<int>& a, const std::vector<int>& b) {
  if (inst.has_points()) {
    std::vector<double> ca = centroid_of(inst, a), cb = centroid_of(inst, b);
    double s = 0.0;
    for (int t = 0; t < inst.dim; ++t) {
      double d = ca[t] - cb[t];
      s += d * d;
    }
    return std::sqrt(s);
  }
  return inst.distance(representative_of(inst, a), representative_of(inst, b));
}

}  // namespace

std::vector<int> dsquared_seed(const Instance& inst, int m, Rng& rng) {
  require(m >= 1, "dsquared_seed: need m >= 1");
  require(m <= inst.n, "dsquared_seed: m exceeds the number of points");
  std::vector<int> chosen;
  std::vector<char> is_chosen(inst.n, 0);
  std::vector<double> d2(inst.n, 0.0);

  int first = std::uniform_int_distribution<int>(0, inst.n - 1)(rng);
  chosen.push_back(first);
  is_chosen[first] = 1;
  for (int j = 0; j < inst.n; ++j) d2[j] = inst.distance_sq(first, j);

  while (static_cast<int>(chosen.size()) < m) {
    double total = 0.0;
    for (int j = 0; j < inst.n; ++j)
      if (!is_chosen[j]) total += d2[j];
    int next = -1;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (int j = 0; j < inst.n; ++j) {
        if (is_chosen[j]) continue;
        acc += d2[j];
        if (acc >= r) {
          next = j;
          break;
        }
      }
      if (next < 0)  // r landed on the floating-point tail
        for (int j = inst.n - 1; j >= 0; --j)
          if (!is_chosen[j]) {
            next = j;
            break;
          }
    } else {
      for (int j = 0; j < inst.n && next < 0; ++j)
        if (!is_chosen[j]) next = j;
    }
    chosen.push_back(next);
    is_chosen[next] = 1;
    for (int j = 0; j < inst.n; ++j) d2[j] = std::min(d2[j], inst.distance_sq(next, j));
  }
  return chosen;
}

std::vector<int> greedy_prune(const Instance& inst, std::vector<int> centers, int k) {
  require(k >= 1, "greedy_prune: need k >= 1");
  require(static_cast<int>(centers.size()) >= k, "greedy_prune: fewer centers than k");
  while (static_cast<int>(centers.size()) > k) {
    const int s = static_cast<int>(centers.size());
    std::vector<double> increase(s, 0.0);
    for (int j = 0; j < inst.n; ++j) {
      int arg1 = -1;
      double d1 = kInf, d2 = kInf;
      for (int c = 0; c < s; ++c) {
        double v = inst.distance_sq(centers[c], j);
        if (v < d1) {
          d2 = d1;
          d1 = v;
          arg1 = c;
        } else if (v < d2) {
          d2 = v;
        }
      }
      increase[arg1] += d2 - d1;  // s >= 2 here, so d2 is finite
    }
    int drop = 0;
    for (int c = 1; c < s; ++c)
      if (increase[c] < increase[drop] - 1e-15 ||
          (std::abs(increase[c] - increase[drop]) <= 1e-15 && centers[c] < centers[drop]))
        drop = c;
    centers.erase(centers.begin() + drop);
  }
  return centers;
}

std::vector<std::vector<double>> lloyd(const Instance& inst,
                                       std::vector<std::vector<double>> centers, int iters) {
  require(inst.has_points(), "lloyd: needs a point-form instance");
  const int k = static_cast<int>(centers.size());
  require(k >= 1, "lloyd: no centers");
  double prev_cost = kInf;
  for (int it = 0; it < iters; ++it) {
    std::vector<int> owner(inst.n, 0);
    double cost = 0.0;
    for (int j = 0; j < inst.n; ++j) {
      int arg = 0;
      double best = sq_dist_to(inst, j, centers[0]);
      for (int c = 1; c < k; ++c) {
        double v = sq_dist_to(inst, j, centers[c]);
        if (v < best) {
          best = v;
          arg = c;
        }
      }
      owner[j] = arg;
      cost += best;
    }
    ensure(cost <= prev_cost + 1e-9 * std::max(1.0, std::abs(prev_cost)),
           "lloyd: k-means cost increased");
    prev_cost = cost;

    std::vector<std::vector<double>> sums(k, std::vector<double>(inst.dim, 0.0));
    std::vector<int> cnt(k, 0);
    for (int j = 0; j < inst.n; ++j) {
      const double* x = inst.point(j);
      for (int t = 0; t < inst.dim; ++t) sums[owner[j]][t] += x[t];
      ++cnt[owner[j]];
    }
    for (int c = 0; c < k; ++c)
      if (cnt[c] > 0) {
        for (int t = 0; t < inst.dim; ++t) sums[c][t] /= cnt[c];
        centers[c] = std::move(sums[c]);
      }  // empty cluster keeps its previous center
  }
  return centers;
}

std::vector<int> lloyd_medoid(const Instance& inst, std::vector<int> medoids, int iters) {
  const int k = static_cast<int>(medoids.size());
  require(k >= 1, "lloyd_medoid: no medoids");
  double prev_cost = kInf;
  for (int it = 0; it < iters; ++it) {
    std::vector<std::vector<int>> clusters(k);
    double cost = 0.0;
    for (int j = 0; j < inst.n; ++j) {
      int arg = 0;
      double best = inst.distance_sq(medoids[0], j);
      for (int c = 1; c < k; ++c) {
        double v = inst.distance_sq(medoids[c], j);
        if (v < best) {
          best = v;
          arg = c;
        }
      }
      clusters[arg].push_back(j);
      cost += best;
    }
    ensure(cost <= prev_cost + 1e-9 * std::max(1.0, std::abs(prev_cost)),
           "lloyd_medoid: cost increased");
    prev_cost = cost;
    for (int c = 0; c < k; ++c)
      if (!clusters[c].empty()) medoids[c] = representative_of(inst, clusters[c]);
  }
  return medoids;
}

std::vector<std::vector<int>> balance_heuristic(const Instance& inst,
                                                std::vector<std::vector<int>> clusters,
                                                double ell, double cap_L, Rng& rng,
                                                const std::vector<double>* weights) {
  clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                [](const std::vector<int>& c) { return c.empty(); }),
                 clusters.end());
  require(!clusters.empty(), "balance_heuristic: no nonempty clusters");

  long long n_pts = 0;
  for (auto& c : clusters) n_pts += static_cast<long long>(c.size());

  double total_w = 0.0, max_w = 0.0;
  if (weights) {
    for (auto& c : clusters)
      for (int j : c) {
        require((*weights)[j] >= 0.0, "balance_heuristic: negative weight");
        total_w += (*weights)[j];
        max_w = std::max(max_w, (*weights)[j]);
      }
    require(total_w > 0.0, "balance_heuristic: zero total weight");
  }
  auto load = [&](const std::vector<int>& c) {
    if (!weights) return static_cast<double>(c.size());
    double s = 0.0;
    for (int j : c) s += (*weights)[j];
    return s;
  };
  const double lo = weights ? ell * total_w : std::ceil(ell * n_pts - 1e-9);
  const double hi = weights ? cap_L * total_w : std::floor(cap_L * n_pts + 1e-9);
  require(lo <= hi + 1e-12, "balance_heuristic: empty capacity window [ceil(ell*n), floor(L*n)]");

  // Merge phase: smallest under-full cluster joins the nearest-center cluster.
  const double merge_tol = weights ? 1e-12 : 1e-9;
  for (;;) {
    int small = -1;
    for (int c = 0; c < static_cast<int>(clusters.size()); ++c)
      if (load(clusters[c]) < lo - merge_tol &&
          (small < 0 || load(clusters[c]) < load(clusters[small]) - 1e-15))
        small = c;
    if (small < 0 || clusters.size() == 1) break;
    int target = -1;
    double best_gap = 0.0;
    for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
      if (c == small) continue;
      double gapv = center_gap(inst, clusters[small], clusters[c]);
      if (target < 0 || gapv < best_gap - 1e-15) {
        target = c;
        best_gap = gapv;
      }
    }
    clusters[target].insert(clusters[target].end(), clusters[small].begin(),
                            clusters[small].end());
    std::sort(clusters[target].begin(), clusters[target].end());
    clusters.erase(clusters.begin() + small);
  }

  // Split phase: random shuffle, then cut into chunks that fit the window.
  std::vector<std::vector<int>> out;
  for (auto& cluster : clusters) {
    double s = load(cluster);
    if (s <= hi + (weights ? 1e-12 : 1e-9)) {
      out.push_back(std::move(cluster));
      continue;
    }
    std::shuffle(cluster.begin(), cluster.end(), rng);
    if (!weights) {
      const long long U = static_cast<long long>(hi);
      const long long lowb = static_cast<long long>(lo);
      const long long sz = static_cast<long long>(cluster.size());
      std::vector<long long> sizes;
      long long q = sz / U, r = sz % U;
      if (r == 0 || r >= lowb) {
        sizes.assign(q, U);
        if (r > 0) sizes.push_back(r);
      } else {
        // Remainder too small for its own chunk: q+1 near-equal chunks.
        long long nch = q + 1, base = sz / nch, extra = sz % nch;
        require(base >= lowb && base + (extra > 0 ? 1 : 0) <= U,
                "balance_heuristic: oversized cluster cannot be split within bounds");
        for (long long c = 0; c < nch; ++c) sizes.push_back(base + (c < extra ? 1 : 0));
      }
      std::size_t pos = 0;
      for (long long sizec : sizes) {
        out.emplace_back(cluster.begin() + pos, cluster.begin() + pos + sizec);
        pos += static_cast<std::size_t>(sizec);
      }
    } else {
      // Pick a chunk count q with average weight S/q inside the window, then
      // cut at the running-total boundaries; chunks deviate by < one weight.
      long long q = static_cast<long long>(std::ceil(s / hi - 1e-12));
      long long qmax =
          lo > 0 ? static_cast<long long>(std::floor(s / lo + 1e-12)) : static_cast<long long>(cluster.size());
      require(q <= qmax, "balance_heuristic: weighted cluster cannot be split within bounds");
      double target = s / static_cast<double>(q);
      std::vector<int> chunk;
      double acc = 0.0, boundary = target;
      long long made = 0;
      for (std::size_t idx = 0; idx < cluster.size(); ++idx) {
        chunk.push_back(cluster[idx]);
        acc += (*weights)[cluster[idx]];
        if ((acc >= boundary - 1e-12 && made + 1 < q) ||
            idx + 1 == cluster.size()) {
          out.push_back(chunk);
          chunk.clear();
          ++made;
          boundary = target * static_cast<double>(made + 1);
        }
      }
    }
  }
  for (auto& c : out) std::sort(c.begin(), c.end());

  long long out_pts = 0;
  for (auto& c : out) out_pts += static_cast<long long>(c.size());
  ensure(out_pts == n_pts, "balance_heuristic: points not conserved");
  const double slack = weights ? max_w + 1e-9 : 1e-9;
  for (auto& c : out) {
    double s = load(c);
    ensure(s >= lo - slack && s <= hi + slack,
           "balance_heuristic: output cluster violates the capacity window");
  }
  return out;
}

std::pair<Assignment, ViolationReport> kmeanspp_balanced(
    const Instance& inst, const Constraints& cons, const SeedingConfig& config, Rng& rng,
    const std::vector<double>* weights) {
  cons.validate(inst.n);
  require(cons.p == 1, "kmeanspp_balanced: replication (p > 1) unsupported on this path");
  const int k = config.k > 0 ? config.k : cons.k;
  require(k >= 1 && k <= inst.n, "kmeanspp_balanced: need 1 <= k <= n");

  int m = config.oversample_count;
  if (m < 0)
    m = k * static_cast<int>(std::ceil(std::log(static_cast<double>(k) + 1.0))) + k;
  m = std::max(m, k);
  m = std::min(m, inst.n);

  std::vector<int> seeds = dsquared_seed(inst, m, rng);
  std::vector<int> pruned = greedy_prune(inst, seeds, k);

  std::vector<std::vector<int>> clusters;
  if (inst.has_points()) {
    std::vector<std::vector<double>> centers;
    centers.reserve(pruned.size());
    for (int c : pruned)
      centers.emplace_back(inst.point(c), inst.point(c) + inst.dim);
    centers = lloyd(inst, centers, config.lloyd_iters);
    clusters.assign(centers.size(), {});
    for (int j = 0; j < inst.n; ++j) {
      int arg = 0;
      double best = sq_dist_to(inst, j, centers[0]);
      for (int c = 1; c < static_cast<int>(centers.size()); ++c) {
        double v = sq_dist_to(inst, j, centers[c]);
        if (v < best) {
          best = v;
          arg = c;
        }
      }
      clusters[arg].push_back(j);
    }
  } else {
    std::vector<int> medoids = lloyd_medoid(inst, pruned, config.lloyd_iters);
    clusters.assign(medoids.size(), {});
    for (int j = 0; j < inst.n; ++j) {
      int arg = 0;
      double best = inst.distance_sq(medoids[0], j);
      for (int c = 1; c < static_cast<int>(medoids.size()); ++c) {
        double v = inst.distance_sq(medoids[c], j);
        if (v < best) {
          best = v;
          arg = c;
        }
      }
      clusters[arg].push_back(j);
    }
  }

  clusters = balance_heuristic(inst, clusters, cons.ell, cons.cap_L, rng, weights);

  Assignment a;
  a.assign.resize(inst.n);
  for (auto& cluster : clusters) {
    int rep = representative_of(inst, cluster);
    a.centers.push_back(rep);
    for (int j : cluster) a.assign[j].push_back({rep, 1});
  }
  std::sort(a.centers.begin(), a.centers.end());
  return {a, check_capacities(a, cons, weights)};
}

}  // namespace balcl
