#pragma once

#include <memory>

#include "balcl/dispatch.hpp"
#include "balcl/rng.hpp"

namespace balcl {

// Uniform random dispatch, made repeatable by hashing the point bytes with a
// seeded 64-bit mixer: the same point always routes to the same cluster.
class RandomDispatcher : public Dispatcher {
 public:
  RandomDispatcher(int k, int dim, std::uint64_t seed);
  std::vector<int> route(const double* x) const override;
  int k() const override { return k_; }
  int p() const override { return 1; }
  int dim() const override { return dim_; }
  std::string type() const override { return "random"; }
  void save(std::ostream& os) const override;

 private:
  int k_ = 1, dim_ = 0;
  std::uint64_t seed_ = 0;
};

// Balanced partition tree: recursive rank-median splits along random
// dimensions until k leaves (k a power of 2). Fitting-sample leaf sizes
// differ by at most 1, and fitting points route back to their own leaf when
// coordinate values across a boundary are distinct (thresholds sit midway
// between the boundary values).
class BptDispatcher : public Dispatcher {
 public:
  std::vector<int> route(const double* x) const override;
  int k() const override { return k_; }
  int p() const override { return 1; }
  int dim() const override { return dim_; }
  std::string type() const override { return "bpt"; }
  void save(std::ostream& os) const override;

  struct Node {
    bool is_leaf = false;
    int leaf_id = -1;
    int split_dim = 0;
    double thresh = 0.0;
    int left = -1, right = -1;
  };
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  friend std::unique_ptr<BptDispatcher> bpt_dispatcher(const PointSet&, int, Rng&);
  friend std::unique_ptr<Dispatcher> load_dispatcher(std::istream& is);
  int k_ = 1, dim_ = 0;
  std::vector<Node> nodes_;  // nodes_[0] is the root
};

// LSH dispatch: 10 Gaussian projections binned at bucket width w, the bin
// tuple combined with a 64-bit avalanche mixer and reduced mod k. w is
// calibrated by bisection to the smallest width whose nonempty combined-bin
// count on the fitting sample is at most 2k.
class LshDispatcher : public Dispatcher {
 public:
  std::vector<int> route(const double* x) const override;
  int k() const override { return k_; }
  int p() const override { return 1; }
  int dim() const override { return dim_; }
  std::string type() const override { return "lsh"; }
  void save(std::ostream& os) const override;

  double bucket_width() const { return w_; }
  std::uint64_t hash_bins(const double* x) const;  // combined 64-bit bin hash

 private:
  friend std::unique_ptr<LshDispatcher> lsh_dispatcher(const PointSet&, int, Rng&);
  friend std::unique_ptr<Dispatcher> load_dispatcher(std::istream& is);
  int k_ = 1, dim_ = 0;
  double w_ = 1.0;
  std::vector<double> dirs_;  // 10 * dim, row-major
};

std::unique_ptr<RandomDispatcher> random_dispatcher(int k, int dim, Rng& rng);
std::unique_ptr<BptDispatcher> bpt_dispatcher(const PointSet& S, int k, Rng& rng);
std::unique_ptr<LshDispatcher> lsh_dispatcher(const PointSet& S, int k, Rng& rng);

}  // namespace balcl
