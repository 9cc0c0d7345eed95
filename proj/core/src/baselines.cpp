#include "balcl/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "balcl/errors.hpp"
#include "dispatch_io.hpp"

namespace balcl {

namespace {

std::uint64_t hash_point(const double* x, int dim, std::uint64_t seed) {
  std::uint64_t h = mix64(seed);
  for (int t = 0; t < dim; ++t) h = mix64(h ^ std::bit_cast<std::uint64_t>(x[t]));
  return h;
}

}  // namespace

// ---------------------------------------------------------------- random --

RandomDispatcher::RandomDispatcher(int k, int dim, std::uint64_t seed)
    : k_(k), dim_(dim), seed_(seed) {
  require(k >= 1, "random dispatcher: k must be >= 1");
  require(dim >= 1, "random dispatcher: dim must be >= 1");
}

std::vector<int> RandomDispatcher::route(const double* x) const {
  return {static_cast<int>(hash_point(x, dim_, seed_) % static_cast<std::uint64_t>(k_))};
}

void RandomDispatcher::save(std::ostream& os) const {
  using namespace detail;
  write_magic(os);
  write_string(os, type());
  write_pod<std::int32_t>(os, k_);
  write_pod<std::int32_t>(os, dim_);
  write_pod<std::uint64_t>(os, seed_);
}

std::unique_ptr<RandomDispatcher> random_dispatcher(int k, int dim, Rng& rng) {
  return std::make_unique<RandomDispatcher>(k, dim, rng());
}

// ------------------------------------------------------------------- bpt --

namespace {

// Splits span into `leaves` leaves; returns the node id. Leaf ids are
// assigned in left-to-right build order.
int build_bpt(std::vector<BptDispatcher::Node>& nodes, const PointSet& S, std::vector<int> span,
              int leaves, int& next_leaf, Rng& rng) {
  const int node_id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (leaves == 1) {
    nodes[node_id].is_leaf = true;
    nodes[node_id].leaf_id = next_leaf++;
    return node_id;
  }
  const int d = std::uniform_int_distribution<int>(0, S.dim - 1)(rng);
  std::stable_sort(span.begin(), span.end(), [&](int a, int b) {
    double va = S.row(a)[d], vb = S.row(b)[d];
    if (va != vb) return va < vb;
    return a < b;
  });
  const std::size_t left_count = (span.size() + 1) / 2;
  ensure(left_count >= 1 && left_count < span.size(), "bpt: degenerate split");
  // Midway threshold: fitting points on each side route back to their side
  // whenever the boundary values differ.
  const double vl = S.row(span[left_count - 1])[d];
  const double vr = S.row(span[left_count])[d];
  const double thresh = (vl + vr) / 2.0;
  std::vector<int> left_span(span.begin(), span.begin() + left_count);
  std::vector<int> right_span(span.begin() + left_count, span.end());
  int left = build_bpt(nodes, S, std::move(left_span), leaves / 2, next_leaf, rng);
  int right = build_bpt(nodes, S, std::move(right_span), leaves / 2, next_leaf, rng);
  nodes[node_id].split_dim = d;
  nodes[node_id].thresh = thresh;
  nodes[node_id].left = left;
  nodes[node_id].right = right;
  return node_id;
}

}  // namespace

std::vector<int> BptDispatcher::route(const double* x) const {
  int node_id = 0;
  while (!nodes_[node_id].is_leaf) {
    const Node& node = nodes_[node_id];
    node_id = x[node.split_dim] <= node.thresh ? node.left : node.right;
  }
  return {nodes_[node_id].leaf_id};
}

void BptDispatcher::save(std::ostream& os) const {
  using namespace detail;
  write_magic(os);
  write_string(os, type());
  write_pod<std::int32_t>(os, k_);
  write_pod<std::int32_t>(os, dim_);
  write_pod<std::int32_t>(os, static_cast<std::int32_t>(nodes_.size()));
  for (const Node& node : nodes_) {
    write_pod<std::uint8_t>(os, node.is_leaf ? 1 : 0);
    if (node.is_leaf) {
      write_pod<std::int32_t>(os, node.leaf_id);
    } else {
      write_pod<std::int32_t>(os, node.split_dim);
      write_pod<double>(os, node.thresh);
      write_pod<std::int32_t>(os, node.left);
      write_pod<std::int32_t>(os, node.right);
    }
  }
}

std::unique_ptr<BptDispatcher> bpt_dispatcher(const PointSet& S, int k, Rng& rng) {
  require(k >= 1 && (k & (k - 1)) == 0, "bpt dispatcher: k must be a power of 2");
  require(S.n >= k, "bpt dispatcher: fewer fitting points than leaves");
  require(S.dim >= 1, "bpt dispatcher: dim must be >= 1");
  auto d = std::make_unique<BptDispatcher>();
  d->k_ = k;
  d->dim_ = S.dim;
  std::vector<int> span(S.n);
  for (int i = 0; i < S.n; ++i) span[i] = i;
  int next_leaf = 0;
  build_bpt(d->nodes_, S, std::move(span), k, next_leaf, rng);
  ensure(next_leaf == k, "bpt dispatcher: wrong leaf count");
  return d;
}

// ------------------------------------------------------------------- lsh --

namespace {

constexpr int kLshDirs = 10;

std::uint64_t combine_bins(const double* x, const std::vector<double>& dirs, int dim, double w) {
  std::uint64_t h = mix64(0x1b5);
  for (int t = 0; t < kLshDirs; ++t) {
    double proj = 0.0;
    for (int c = 0; c < dim; ++c) proj += dirs[static_cast<std::size_t>(t) * dim + c] * x[c];
    // Truncation toward zero, not floor: every index collapses to 0 once w
    // exceeds the projection range. Floor would pin negative projections at
    // -1, so no width could ever merge the two half-spaces of a direction and
    // coarse calibration targets would be unreachable on centered data.
    auto bin = static_cast<std::int64_t>(proj / w);
    h = mix64(h ^ mix64(static_cast<std::uint64_t>(bin)));
  }
  return h;
}

std::size_t distinct_bins(const PointSet& S, const std::vector<double>& dirs, double w) {
  std::set<std::uint64_t> seen;
  for (int i = 0; i < S.n; ++i) seen.insert(combine_bins(S.row(i), dirs, S.dim, w));
  return seen.size();
}

}  // namespace

std::uint64_t LshDispatcher::hash_bins(const double* x) const {
  return combine_bins(x, dirs_, dim_, w_);
}

std::vector<int> LshDispatcher::route(const double* x) const {
  return {static_cast<int>(hash_bins(x) % static_cast<std::uint64_t>(k_))};
}

void LshDispatcher::save(std::ostream& os) const {
  using namespace detail;
  write_magic(os);
  write_string(os, type());
  write_pod<std::int32_t>(os, k_);
  write_pod<std::int32_t>(os, dim_);
  write_pod<double>(os, w_);
  os.write(reinterpret_cast<const char*>(dirs_.data()),
           static_cast<std::streamsize>(dirs_.size() * sizeof(double)));
}

std::unique_ptr<LshDispatcher> lsh_dispatcher(const PointSet& S, int k, Rng& rng) {
  require(k >= 1, "lsh dispatcher: k must be >= 1");
  require(S.n >= 1 && S.dim >= 1, "lsh dispatcher: empty fitting sample");
  auto d = std::make_unique<LshDispatcher>();
  d->k_ = k;
  d->dim_ = S.dim;
  d->dirs_.resize(static_cast<std::size_t>(kLshDirs) * S.dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : d->dirs_) v = gauss(rng);

  // Diameter of the fitting sample, exact on a deterministic cap of 2048
  // points to keep calibration cheap on large samples.
  const int stride = std::max(1, (S.n + 2047) / 2048);
  std::vector<int> probe;
  for (int i = 0; i < S.n; i += stride) probe.push_back(i);
  double diam = 0.0;
  for (std::size_t a = 0; a < probe.size(); ++a)
    for (std::size_t b = a + 1; b < probe.size(); ++b) {
      double s = 0.0;
      for (int c = 0; c < S.dim; ++c) {
        double delta = S.row(probe[a])[c] - S.row(probe[b])[c];
        s += delta * delta;
      }
      diam = std::max(diam, s);
    }
  diam = std::sqrt(diam);

  if (diam <= 0.0) {
    std::fprintf(stderr, "lsh dispatcher: degenerate fitting sample (zero diameter); w = 1\n");
    d->w_ = 1.0;
    return d;
  }

  // Smallest w whose nonempty combined-bin count is <= 2k. Bisection needs a
  // feasible upper end, so the bracket grows past the diameter if required.
  const std::size_t target = 2 * static_cast<std::size_t>(k);
  double lo = 1e-6 * diam, hi = diam;
  int expand = 0;
  while (distinct_bins(S, d->dirs_, hi) > target && expand < 60) {
    hi *= 2.0;
    ++expand;
  }
  if (distinct_bins(S, d->dirs_, hi) > target) {
    d->w_ = hi;  // give up: keep the coarsest probed width
    return d;
  }
  for (int it = 0; it < 40; ++it) {
    double mid = 0.5 * (lo + hi);
    if (distinct_bins(S, d->dirs_, mid) <= target)
      hi = mid;
    else
      lo = mid;
  }
  d->w_ = hi;
  return d;
}

// ------------------------------------------------------------------ load --

std::unique_ptr<Dispatcher> load_dispatcher(std::istream& is) {
  using namespace detail;
  check_magic(is);
  std::string type = read_string(is);
  if (type == "random") {
    int k = read_pod<std::int32_t>(is);
    int dim = read_pod<std::int32_t>(is);
    auto seed = read_pod<std::uint64_t>(is);
    return std::make_unique<RandomDispatcher>(k, dim, seed);
  }
  if (type == "bpt") {
    auto d = std::make_unique<BptDispatcher>();
    d->k_ = read_pod<std::int32_t>(is);
    d->dim_ = read_pod<std::int32_t>(is);
    int count = read_pod<std::int32_t>(is);
    require(count >= 1, "bpt file: empty tree");
    d->nodes_.resize(count);
    for (BptDispatcher::Node& node : d->nodes_) {
      node.is_leaf = read_pod<std::uint8_t>(is) != 0;
      if (node.is_leaf) {
        node.leaf_id = read_pod<std::int32_t>(is);
      } else {
        node.split_dim = read_pod<std::int32_t>(is);
        node.thresh = read_pod<double>(is);
        node.left = read_pod<std::int32_t>(is);
        node.right = read_pod<std::int32_t>(is);
      }
    }
    return d;
  }
  if (type == "lsh") {
    auto d = std::make_unique<LshDispatcher>();
    d->k_ = read_pod<std::int32_t>(is);
    d->dim_ = read_pod<std::int32_t>(is);
    d->w_ = read_pod<double>(is);
    d->dirs_.resize(static_cast<std::size_t>(kLshDirs) * d->dim_);
    is.read(reinterpret_cast<char*>(d->dirs_.data()),
            static_cast<std::streamsize>(d->dirs_.size() * sizeof(double)));
    require(static_cast<bool>(is), "lsh file: truncated");
    return d;
  }
  if (type == "kmeanspp-nn" || type == "lp-round-nn" || type == "oracle-nn") {
    auto d = std::make_unique<NnDispatcher>();
    d->type_ = type;
    d->k_ = read_pod<std::int32_t>(is);
    d->p_ = read_pod<std::int32_t>(is);
    d->ell_ = read_pod<double>(is);
    d->cap_l_ = read_pod<double>(is);
    d->sample_.n = read_pod<std::int32_t>(is);
    d->sample_.dim = read_pod<std::int32_t>(is);
    require(d->sample_.n >= 1 && d->sample_.dim >= 1 && d->p_ >= 1,
            "dispatcher file: bad NN header");
    d->sample_.data.resize(static_cast<std::size_t>(d->sample_.n) * d->sample_.dim);
    is.read(reinterpret_cast<char*>(d->sample_.data.data()),
            static_cast<std::streamsize>(d->sample_.data.size() * sizeof(double)));
    require(static_cast<bool>(is), "dispatcher file: truncated sample");
    d->ids_.resize(static_cast<std::size_t>(d->sample_.n) * d->p_);
    for (int& id : d->ids_) id = read_pod<std::int32_t>(is);
    if (read_pod<std::uint8_t>(is) != 0) {
      RpTree& tree = d->tree_;
      tree.n = d->sample_.n;
      tree.dim = d->sample_.dim;
      tree.pts = d->sample_.data;
      tree.leaf_size = read_pod<std::int32_t>(is);
      int count = read_pod<std::int32_t>(is);
      require(count >= 1, "dispatcher file: empty rp-tree");
      tree.nodes.resize(count);
      for (RpTreeNode& node : tree.nodes) {
        node.is_leaf = read_pod<std::uint8_t>(is) != 0;
        if (node.is_leaf) {
          int pts = read_pod<std::int32_t>(is);
          require(pts >= 0, "dispatcher file: bad leaf");
          node.points.resize(pts);
          for (int& i : node.points) i = read_pod<std::int32_t>(is);
        } else {
          node.dir.resize(tree.dim);
          is.read(reinterpret_cast<char*>(node.dir.data()),
                  static_cast<std::streamsize>(node.dir.size() * sizeof(double)));
          require(static_cast<bool>(is), "dispatcher file: truncated direction");
          node.thresh = read_pod<double>(is);
          node.left = read_pod<std::int32_t>(is);
          node.right = read_pod<std::int32_t>(is);
        }
      }
    }
    return d;
  }
  throw InvalidArgument("dispatcher file: unknown type tag '" + type + "'");
}

}  // namespace balcl
