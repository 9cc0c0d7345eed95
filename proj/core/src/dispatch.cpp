#include "balcl/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "balcl/bicriteria.hpp"
#include "balcl/errors.hpp"
#include "balcl/instances.hpp"
#include "dispatch_io.hpp"

namespace balcl {

namespace {

double sq_dist(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int t = 0; t < dim; ++t) {
    double d = a[t] - b[t];
    s += d * d;
  }
  return s;
}

double dot(const std::vector<double>& dir, const double* x) {
  double s = 0.0;
  for (std::size_t t = 0; t < dir.size(); ++t) s += dir[t] * x[t];
  return s;
}

int build_node(RpTree& tree, std::vector<int> ids, int depth, int max_depth, Rng& rng) {
  const int node_id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (static_cast<int>(ids.size()) <= tree.leaf_size) {
    ensure(depth <= max_depth, "rp-tree: depth bound exceeded");
    tree.nodes[node_id].is_leaf = true;
    tree.nodes[node_id].points = std::move(ids);
    return node_id;
  }
  std::vector<double> dir(tree.dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double norm = 0.0;
  for (double& v : dir) {
    v = gauss(rng);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm < 1e-12) {
    std::fill(dir.begin(), dir.end(), 0.0);
    dir[0] = 1.0;
  } else {
    for (double& v : dir) v /= norm;
  }

  std::vector<double> proj(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    proj[i] = dot(dir, tree.pts.data() + static_cast<std::size_t>(ids[i]) * tree.dim);
  std::vector<int> order(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (proj[a] != proj[b]) return proj[a] < proj[b];
    return ids[a] < ids[b];
  });
  const std::size_t left_count = (ids.size() + 1) / 2;  // rank split, left heavy
  std::vector<int> left_ids, right_ids;
  for (std::size_t i = 0; i < ids.size(); ++i)
    (i < left_count ? left_ids : right_ids).push_back(ids[order[i]]);
  const double thresh = proj[order[left_count - 1]];  // lower median

  std::vector<double> dir_copy = dir;
  int left = build_node(tree, std::move(left_ids), depth + 1, max_depth, rng);
  int right = build_node(tree, std::move(right_ids), depth + 1, max_depth, rng);
  RpTreeNode& node = tree.nodes[node_id];
  node.dir = std::move(dir_copy);
  node.thresh = thresh;
  node.left = left;
  node.right = right;
  return node_id;
}

}  // namespace

RpTree build_rptree(const std::vector<double>& pts, int n, int dim, int leaf_size, Rng& rng) {
  require(n >= 1 && dim >= 1, "rp-tree: empty input");
  require(leaf_size >= 1, "rp-tree: leaf_size must be >= 1");
  require(static_cast<int>(pts.size()) == n * dim, "rp-tree: data size mismatch");
  RpTree tree;
  tree.n = n;
  tree.dim = dim;
  tree.leaf_size = leaf_size;
  tree.pts = pts;
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  const int max_depth =
      static_cast<int>(std::ceil(std::log2(std::max(1.0, static_cast<double>(n) / leaf_size)))) +
      1;
  build_node(tree, std::move(ids), 0, max_depth, rng);

  std::vector<char> seen(n, 0);
  for (const RpTreeNode& node : tree.nodes)
    if (node.is_leaf)
      for (int i : node.points) {
        ensure(!seen[i], "rp-tree: point in two leaves");
        seen[i] = 1;
      }
  for (int i = 0; i < n; ++i) ensure(seen[i], "rp-tree: point missing from leaves");
  return tree;
}

int nn_query(const RpTree& tree, const double* x) {
  require(!tree.empty(), "rp-tree: query on empty tree");
  int node_id = 0;
  while (!tree.nodes[node_id].is_leaf) {
    const RpTreeNode& node = tree.nodes[node_id];
    node_id = dot(node.dir, x) <= node.thresh ? node.left : node.right;
  }
  const std::vector<int>& leaf = tree.nodes[node_id].points;
  int best = -1;
  double best_d = 0.0;
  for (int i : leaf) {
    double d = sq_dist(tree.pts.data() + static_cast<std::size_t>(i) * tree.dim, x, tree.dim);
    if (best < 0 || d < best_d) {
      best = i;
      best_d = d;
    }
  }
  ensure(best >= 0, "rp-tree: empty leaf");
  return best;
}

int exact_nn(const double* pts, int n, int dim, const double* x) {
  require(n >= 1, "exact_nn: empty point set");
  int best = 0;
  double best_d = sq_dist(pts, x, dim);
  for (int i = 1; i < n; ++i) {
    double d = sq_dist(pts + static_cast<std::size_t>(i) * dim, x, dim);
    if (d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

WeightEstimate estimate_weights(const PointSet& S, const PointSet& S_prime) {
  require(S.n >= 1, "estimate_weights: empty subsample");
  require(S_prime.n >= 1, "estimate_weights: empty second sample");
  require(S.dim == S_prime.dim, "estimate_weights: dimension mismatch");
  WeightEstimate we;
  we.counts.assign(S.n, 0);
  for (int j = 0; j < S_prime.n; ++j)
    ++we.counts[exact_nn(S.data.data(), S.n, S.dim, S_prime.row(j))];
  we.w_hat.resize(S.n);
  for (int i = 0; i < S.n; ++i)
    we.w_hat[i] = static_cast<double>(we.counts[i]) / static_cast<double>(S_prime.n);
  return we;
}

double estimate_alpha(const PointSet& S, const PointSet& holdout, int power) {
  require(power == 1 || power == 2, "estimate_alpha: power must be 1 or 2");
  require(S.n >= 1, "estimate_alpha: empty subsample");
  require(holdout.n >= 1, "estimate_alpha: empty holdout");
  require(S.dim == holdout.dim, "estimate_alpha: dimension mismatch");
  double sum = 0.0;
  for (int j = 0; j < holdout.n; ++j) {
    int i = exact_nn(S.data.data(), S.n, S.dim, holdout.row(j));
    double d2 = sq_dist(S.row(i), holdout.row(j), S.dim);
    sum += power == 2 ? d2 : std::sqrt(d2);
  }
  return sum / holdout.n;
}

std::vector<int> NnDispatcher::route(const double* x) const {
  int idx = tree_.empty() ? exact_nn(sample_.data.data(), sample_.n, sample_.dim, x)
                          : nn_query(tree_, x);
  std::vector<int> out(ids_.begin() + static_cast<std::size_t>(idx) * p_,
                       ids_.begin() + static_cast<std::size_t>(idx + 1) * p_);
  return out;
}

void NnDispatcher::save(std::ostream& os) const {
  using namespace detail;
  write_magic(os);
  write_string(os, type_);
  write_pod<std::int32_t>(os, k_);
  write_pod<std::int32_t>(os, p_);
  write_pod<double>(os, ell_);
  write_pod<double>(os, cap_l_);
  write_pod<std::int32_t>(os, sample_.n);
  write_pod<std::int32_t>(os, sample_.dim);
  os.write(reinterpret_cast<const char*>(sample_.data.data()),
           static_cast<std::streamsize>(sample_.data.size() * sizeof(double)));
  for (int id : ids_) write_pod<std::int32_t>(os, id);
  write_pod<std::uint8_t>(os, tree_.empty() ? 0 : 1);
  if (!tree_.empty()) {
    write_pod<std::int32_t>(os, tree_.leaf_size);
    write_pod<std::int32_t>(os, static_cast<std::int32_t>(tree_.nodes.size()));
    for (const RpTreeNode& node : tree_.nodes) {
      write_pod<std::uint8_t>(os, node.is_leaf ? 1 : 0);
      if (node.is_leaf) {
        write_pod<std::int32_t>(os, static_cast<std::int32_t>(node.points.size()));
        for (int i : node.points) write_pod<std::int32_t>(os, i);
      } else {
        os.write(reinterpret_cast<const char*>(node.dir.data()),
                 static_cast<std::streamsize>(node.dir.size() * sizeof(double)));
        write_pod<double>(os, node.thresh);
        write_pod<std::int32_t>(os, node.left);
        write_pod<std::int32_t>(os, node.right);
      }
    }
  }
}

std::unique_ptr<NnDispatcher> fit_dispatcher(const PointSet& S, const PointSet& S_prime,
                                             const Constraints& cons, const FitOptions& opts,
                                             Rng& rng) {
  require(S.n >= 1 && S.dim >= 1, "fit_dispatcher: empty subsample");
  require(static_cast<int>(S.data.size()) == S.n * S.dim, "fit_dispatcher: sample size mismatch");
  cons.validate(S.n);

  WeightEstimate we = estimate_weights(S, S_prime);
  Instance inst = Instance::from_points(S.data, S.dim);

  auto d = std::make_unique<NnDispatcher>();
  d->sample_ = S;
  d->w_hat_ = we.w_hat;
  d->p_ = cons.p;
  d->ell_ = cons.ell;
  d->cap_l_ = cons.cap_L;

  Assignment a;
  switch (opts.algo) {
    case FitAlgo::KMeansPP: {
      require(cons.p == 1, "fit_dispatcher: kmeanspp path needs p = 1");
      auto [assignment, report] = kmeanspp_balanced(inst, cons, opts.seeding, rng, &we.w_hat);
      a = std::move(assignment);
      d->report_ = report;
      d->type_ = "kmeanspp-nn";
      break;
    }
    case FitAlgo::LpRound: {
      require(cons.p >= 2, "fit_dispatcher: lp-round path needs p >= 2");
      auto res = bicriteria_cluster(inst, cons, opts.objective, &we.w_hat, &we.counts);
      if (!res)
        throw InfeasibleError("fit_dispatcher: weighted relaxation infeasible for the subsample");
      a = std::move(res->assignment);
      d->report_ = res->report;
      d->type_ = "lp-round-nn";
      break;
    }
    case FitAlgo::Oracle: {
      OracleResult orc = brute_force_opt(inst, cons, opts.objective);
      a = std::move(orc.assignment);
      d->report_ = check_capacities(a, cons, &we.w_hat);
      d->type_ = "oracle-nn";
      break;
    }
  }

  d->k_ = static_cast<int>(a.centers.size());
  d->ids_.assign(static_cast<std::size_t>(S.n) * cons.p, -1);
  for (int j = 0; j < S.n; ++j) {
    std::vector<int> row;
    for (auto& [c, m] : a.assign[j]) {
      auto it = std::lower_bound(a.centers.begin(), a.centers.end(), c);
      ensure(it != a.centers.end() && *it == c, "fit_dispatcher: assignment names unknown center");
      int id = static_cast<int>(it - a.centers.begin());
      for (int t = 0; t < m; ++t) row.push_back(id);
    }
    ensure(static_cast<int>(row.size()) == cons.p, "fit_dispatcher: point without p slots");
    std::sort(row.begin(), row.end());
    std::copy(row.begin(), row.end(), d->ids_.begin() + static_cast<std::size_t>(j) * cons.p);
  }

  bool use_tree = opts.backend == NnBackend::Tree ||
                  (opts.backend == NnBackend::Auto && S.n > 4096);
  if (use_tree) d->tree_ = build_rptree(S.data, S.n, S.dim, opts.leaf_size, rng);
  return d;
}

}  // namespace balcl
