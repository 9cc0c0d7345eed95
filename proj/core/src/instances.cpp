#include "balcl/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "balcl/errors.hpp"
#include "balcl/mincostflow.hpp"

namespace balcl {

Instance gen_star(int nl) {
  require(nl >= 3, "gen_star: nl must be >= 3");
  const int n = 10 * nl + 1;
  std::vector<double> d(static_cast<std::size_t>(n) * n, 2.0);
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i) * n + i] = 0.0;
  for (int j = 1; j < n; ++j) {
    d[j] = 1.0;
    d[static_cast<std::size_t>(j) * n] = 1.0;
  }
  Instance inst = Instance::from_matrix(std::move(d), n);
  inst.meta = {{"ell", static_cast<double>(nl) / n}, {"cap_L", 1.0}};
  return inst;
}

Instance gen_groups(int k_prime, int nl, bool perturb) {
  require(k_prime >= 1, "gen_groups: k_prime must be >= 1");
  require(nl >= 2, "gen_groups: nl must be >= 2");
  const int gs = 2 * nl - 1;
  const int n = k_prime * gs;
  std::vector<double> d(static_cast<std::size_t>(n) * n, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i / gs != j / gs) continue;
      double v = 0.0;
      if (perturb && i != j) {
        // Deterministic jitter in [5e-7, 1e-6]: distinct points, still a metric.
        std::uint64_t h = mix64(static_cast<std::uint64_t>(std::min(i, j)) * 1000003u +
                                static_cast<std::uint64_t>(std::max(i, j)));
        v = 5e-7 + 5e-7 * (static_cast<double>(h >> 11) / 9007199254740992.0);
      }
      d[static_cast<std::size_t>(i) * n + j] = i == j ? 0.0 : v;
    }
  }
  Instance inst = Instance::from_matrix(std::move(d), n);
  inst.meta = {{"ell", static_cast<double>(nl) / n}, {"cap_L", 1.0}};
  return inst;
}

namespace {

// Complete-linkage dendrogram over the mixture centers; labels recurse down
// the tree, each side receiving a share proportional to its leaf count.
struct Dendro {
  struct Node {
    int left = -1, right = -1;  // node ids; leaves have none
    int leaf = -1;              // component id for leaves
    int count = 1;
  };
  std::vector<Node> nodes;
  int root = -1;
};

Dendro complete_linkage(const std::vector<double>& centers, int c, int dims) {
  Dendro dg;
  std::vector<int> active;
  for (int i = 0; i < c; ++i) {
    dg.nodes.push_back({-1, -1, i, 1});
    active.push_back(i);
  }
  auto dist = [&](int a, int b) {
    double s = 0.0;
    for (int t = 0; t < dims; ++t) {
      double d = centers[static_cast<std::size_t>(a) * dims + t] -
                 centers[static_cast<std::size_t>(b) * dims + t];
      s += d * d;
    }
    return std::sqrt(s);
  };
  // Cluster-to-cluster complete-linkage distances, grown as nodes merge.
  std::vector<std::vector<double>> cd(c, std::vector<double>(c, 0.0));
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) cd[i][j] = dist(i, j);
  while (active.size() > 1) {
    int ba = -1, bb = -1;
    double best = 0.0;
    for (std::size_t x = 0; x < active.size(); ++x)
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        double d = cd[active[x]][active[y]];
        if (ba < 0 || d < best) {
          best = d;
          ba = static_cast<int>(x);
          bb = static_cast<int>(y);
        }
      }
    int na = active[ba], nb = active[bb];
    int id = static_cast<int>(dg.nodes.size());
    dg.nodes.push_back({na, nb, -1, dg.nodes[na].count + dg.nodes[nb].count});
    for (auto& row : cd) row.push_back(0.0);
    cd.push_back(std::vector<double>(dg.nodes.size(), 0.0));
    for (int other : active) {
      if (other == na || other == nb) continue;
      double d = std::max(cd[na][other], cd[nb][other]);
      cd[id][other] = cd[other][id] = d;
    }
    active.erase(active.begin() + bb);
    active.erase(active.begin() + ba);
    active.push_back(id);
  }
  dg.root = active.empty() ? -1 : active[0];
  return dg;
}

void assign_labels(const Dendro& dg, int node, int lo, int hi, std::vector<std::pair<int, int>>& out) {
  const auto& nd = dg.nodes[node];
  if (nd.leaf >= 0) {
    out[nd.leaf] = {lo, hi};
    return;
  }
  int span = hi - lo;
  if (span <= 1) {
    assign_labels(dg, nd.left, lo, hi, out);
    assign_labels(dg, nd.right, lo, hi, out);
    return;
  }
  int lc = dg.nodes[nd.left].count, rc = dg.nodes[nd.right].count;
  int left_share = static_cast<int>(std::lround(static_cast<double>(span) * lc / (lc + rc)));
  left_share = std::clamp(left_share, 1, span - 1);
  assign_labels(dg, nd.left, lo, lo + left_share, out);
  assign_labels(dg, nd.right, lo + left_share, hi, out);
}

}  // namespace

Instance gen_gaussian_mixture(int components, int dims, double sigma, int n, Rng& rng,
                              int n_labels) {
  require(components >= 1, "gen_gaussian_mixture: components must be >= 1");
  require(dims >= 1 && n >= 1, "gen_gaussian_mixture: bad dims/n");
  if (n_labels <= 0) n_labels = std::max(1, static_cast<int>(std::lround(0.15 * components)));
  n_labels = std::min(n_labels, components);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> centers(static_cast<std::size_t>(components) * dims);
  for (auto& v : centers) v = unit(rng);

  std::vector<int> comp_label(components, 0);
  if (components > 1 && n_labels > 1) {
    Dendro dg = complete_linkage(centers, components, dims);
    std::vector<std::pair<int, int>> ranges(components);
    assign_labels(dg, dg.root, 0, n_labels, ranges);
    for (int c = 0; c < components; ++c) {
      auto [lo, hi] = ranges[c];
      comp_label[c] =
          hi - lo <= 1 ? lo : lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo));
    }
  }

  std::normal_distribution<double> noise(0.0, sigma);
  std::uniform_int_distribution<int> pick(0, components - 1);
  std::vector<double> pts(static_cast<std::size_t>(n) * dims);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    int c = pick(rng);
    labels[i] = comp_label[c];
    for (int t = 0; t < dims; ++t)
      pts[static_cast<std::size_t>(i) * dims + t] =
          centers[static_cast<std::size_t>(c) * dims + t] + (sigma > 0 ? noise(rng) : 0.0);
  }
  return Instance::from_points(std::move(pts), dims, std::move(labels));
}

Instance gen_grid_rect(int n, Rng& rng, int dims) {
  require(n >= 1 && dims >= 2, "gen_grid_rect: need n >= 1 and dims >= 2");
  std::uniform_real_distribution<double> side(0.0, 10.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> pts(static_cast<std::size_t>(n) * dims);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    double* p = pts.data() + static_cast<std::size_t>(i) * dims;
    p[0] = side(rng);
    p[1] = side(rng);
    for (int t = 2; t < dims; ++t) p[t] = unit(rng);
    int c0 = std::clamp(static_cast<int>(p[0] / 2.5), 0, 3);
    int c1 = std::clamp(static_cast<int>(p[1] / 2.5), 0, 3);
    labels[i] = 4 * c0 + c1;
  }
  return Instance::from_points(std::move(pts), dims, std::move(labels));
}

Instance gen_two_gaussians(int n, Rng& rng) {
  require(n >= 1, "gen_two_gaussians: need n >= 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> pts(static_cast<std::size_t>(n) * 2);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    double cx = unit(rng) < 0.08 ? 10.0 : 0.0;
    double x0 = cx + gauss(rng);
    double x1 = gauss(rng);
    pts[2 * static_cast<std::size_t>(i)] = x0;
    pts[2 * static_cast<std::size_t>(i) + 1] = x1;
    labels[i] = x0 <= 0.0 ? -1 : (x0 <= 5.0 ? 1 : 2);
  }
  Instance inst = Instance::from_points(std::move(pts), 2, std::move(labels));
  inst.meta = {{"ell", 0.1}, {"cap_L", 1.0}};
  return inst;
}

Instance gen_uniform(int n, int dims, Rng& rng) {
  require(n >= 1 && dims >= 1, "gen_uniform: bad n/dims");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> pts(static_cast<std::size_t>(n) * dims);
  for (auto& v : pts) v = unit(rng);
  return Instance::from_points(std::move(pts), dims);
}

namespace {

// Balanced p-replicated assignment cost for a fixed center set; nullopt when
// the capacity window admits no assignment.
std::optional<std::pair<double, Assignment>> assign_to_centers(const Instance& inst,
                                                               const std::vector<int>& centers,
                                                               const Constraints& cons,
                                                               const CostMatrix& cm,
                                                               double radius) {
  const int n = inst.n;
  const int k = static_cast<int>(centers.size());
  const bool kcenter = cm.objective == Objective::KCenter;
  const long long lo = cons.lower_count(n);
  const long long hi = cons.upper_count(n);
  if (hi < lo) return std::nullopt;

  FlowNetwork net;
  std::vector<int> pnode(n), cnode(k);
  for (int j = 0; j < n; ++j) {
    pnode[j] = net.add_node();
    net.add_supply(pnode[j], cons.p);
  }
  for (int c = 0; c < k; ++c) cnode[c] = net.add_node();
  int sink = net.add_node();
  net.add_supply(sink, -static_cast<long long>(n) * cons.p);

  std::vector<std::vector<int>> eid(n, std::vector<int>(k, -1));
  for (int j = 0; j < n; ++j)
    for (int c = 0; c < k; ++c) {
      if (kcenter && inst.distance(centers[c], j) > radius + 1e-12) continue;
      eid[j][c] = net.add_edge(pnode[j], cnode[c], 1, kcenter ? 0.0 : cm.at(centers[c], j));
    }
  for (int c = 0; c < k; ++c) net.add_edge_bounded(cnode[c], sink, lo, hi, 0.0);

  auto res = solve_mcf(net);
  if (!res) return std::nullopt;

  Assignment a;
  a.centers = centers;
  a.assign.resize(n);
  for (int j = 0; j < n; ++j) {
    int slots = 0;
    for (int c = 0; c < k; ++c) {
      if (eid[j][c] < 0) continue;
      if (res->flow[eid[j][c]] == 1) {
        a.assign[j].push_back({centers[c], 1});
        ++slots;
      }
    }
    ensure(slots == cons.p, "oracle: point missing replicas");
  }
  return std::make_pair(res->cost, a);
}

}  // namespace

OracleResult brute_force_opt(const Instance& inst, const Constraints& cons, Objective obj) {
  cons.validate(inst.n);
  const int n = inst.n;
  const int k = cons.k;
  double subsets = 1.0;
  for (int i = 0; i < k; ++i) subsets = subsets * (n - i) / (i + 1);
  require(subsets <= 1e6, "brute_force_opt: C(n,k) exceeds 1e6");

  CostMatrix cm = cost_matrix(inst, obj, 0.0);
  std::vector<double> radii = obj == Objective::KCenter ? inst.distinct_distances()
                                                        : std::vector<double>{};

  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  bool found = false;
  double best = 0.0;
  std::vector<int> best_centers;
  double best_radius = 0.0;

  for (;;) {
    if (obj == Objective::KCenter) {
      // Smallest feasible radius for this center set, by bisection.
      int lo = 0, hi = static_cast<int>(radii.size()) - 1, ok = -1;
      while (lo <= hi) {
        int mid = (lo + hi) / 2;
        if (assign_to_centers(inst, pick, cons, cm, radii[mid])) {
          ok = mid;
          hi = mid - 1;
        } else {
          lo = mid + 1;
        }
      }
      if (ok >= 0 && (!found || radii[ok] < best - 1e-12)) {
        found = true;
        best = radii[ok];
        best_radius = radii[ok];
        best_centers = pick;
      }
    } else {
      auto res = assign_to_centers(inst, pick, cons, cm, 0.0);
      if (res && (!found || res->first < best - 1e-12)) {
        found = true;
        best = res->first;
        best_centers = pick;
      }
    }
    // next lexicographic combination
    int i = k - 1;
    while (i >= 0 && pick[i] == n - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }

  if (!found) throw InfeasibleError("brute_force_opt: no center set admits a feasible assignment");
  auto res = assign_to_centers(inst, best_centers, cons, cm,
                               obj == Objective::KCenter ? best_radius : 0.0);
  ensure(res.has_value(), "oracle: best subset no longer feasible");
  OracleResult out;
  out.assignment = res->second;
  out.value = obj == Objective::KCenter ? best_radius : res->first;
  return out;
}

}  // namespace balcl
