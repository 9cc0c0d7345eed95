#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "balcl/assignment.hpp"
#include "balcl/cost.hpp"
#include "balcl/instance.hpp"
#include "balcl/kmeanspp.hpp"
#include "balcl/rng.hpp"

namespace balcl {

// A flat row-major sample of n points in R^dim.
struct PointSet {
  int n = 0;
  int dim = 0;
  std::vector<double> data;  // n*dim

  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * dim; }
};

// Routing interface shared by the NN dispatcher and the baseline dispatchers.
// Implementations are immutable after fit; route is a pure function.
class Dispatcher {
 public:
  virtual ~Dispatcher() = default;
  virtual std::vector<int> route(const double* x) const = 0;  // p cluster ids
  virtual int k() const = 0;
  virtual int p() const = 0;
  virtual int dim() const = 0;
  virtual std::string type() const = 0;
  virtual void save(std::ostream& os) const = 0;  // BDSP1 container
};

// Random-projection tree with rank splits: every internal node splits its
// points at the lower median of their projections onto a random unit
// direction (left half gets the extra point), leaves hold <= leaf_size
// points. Depth <= ceil(log2(n / leaf_size)) + 1.
struct RpTreeNode {
  bool is_leaf = false;
  std::vector<double> dir;   // internal: unit direction
  double thresh = 0.0;       // internal: split threshold
  int left = -1, right = -1; // internal: child node ids
  std::vector<int> points;   // leaf: point indices
};

struct RpTree {
  int n = 0;
  int dim = 0;
  int leaf_size = 0;
  std::vector<double> pts;  // owned copy, row-major
  std::vector<RpTreeNode> nodes;  // nodes[0] is the root

  bool empty() const { return nodes.empty(); }
};

RpTree build_rptree(const std::vector<double>& pts, int n, int dim, int leaf_size, Rng& rng);

// Defeatist search: descend by projection sign to a single leaf and scan it
// exactly (ties -> lowest index). Returns a point index into the tree data.
int nn_query(const RpTree& tree, const double* x);

// Exact nearest neighbor over a flat point array; ties -> lowest index.
int exact_nn(const double* pts, int n, int dim, const double* x);

struct WeightEstimate {
  std::vector<double> w_hat;    // per subsample point, sums to 1
  std::vector<long long> counts;  // |S'_i|, sums to |S'|
};

// Voronoi weight estimates from a second sample: w_hat[i] = |S'_i| / n'
// where S'_i holds the second-sample points whose exact NN in S is i.
WeightEstimate estimate_weights(const PointSet& S, const PointSet& S_prime);

// Empirical mean of d(x, NN_S(x))^power over the holdout; power is 1 or 2.
double estimate_alpha(const PointSet& S, const PointSet& holdout, int power);

enum class FitAlgo { KMeansPP, LpRound, Oracle };
enum class NnBackend { Auto, Exact, Tree };

struct FitOptions {
  FitAlgo algo = FitAlgo::KMeansPP;
  NnBackend backend = NnBackend::Auto;  // Auto: exact up to 4096 points
  int leaf_size = 32;
  Objective objective = Objective::KMeans;  // lp-round / oracle objective
  SeedingConfig seeding;                    // kmeanspp path
};

// Nearest-neighbor clustering extension: stores the clustered subsample and
// answers queries with the cluster ids of the query's (approximate) nearest
// subsample point.
class NnDispatcher : public Dispatcher {
 public:
  std::vector<int> route(const double* x) const override;
  int k() const override { return k_; }
  int p() const override { return p_; }
  int dim() const override { return sample_.dim; }
  std::string type() const override { return type_; }
  void save(std::ostream& os) const override;

  // Cluster ids (p per subsample point, repeats allowed up to multiplicity 2
  // on the lp-round path).
  const std::vector<int>& ids() const { return ids_; }
  const PointSet& sample() const { return sample_; }
  const std::vector<double>& weight_estimate() const { return w_hat_; }
  const ViolationReport& fit_report() const { return report_; }
  bool uses_tree() const { return !tree_.empty(); }

 private:
  friend std::unique_ptr<NnDispatcher> fit_dispatcher(const PointSet&, const PointSet&,
                                                      const Constraints&, const FitOptions&,
                                                      Rng&);
  friend std::unique_ptr<Dispatcher> load_dispatcher(std::istream& is);

  PointSet sample_;
  std::vector<int> ids_;  // n*p row-major
  int k_ = 0, p_ = 1;
  double ell_ = 0.0, cap_l_ = 1.0;
  std::string type_ = "kmeanspp-nn";
  RpTree tree_;  // empty -> exact backend
  std::vector<double> w_hat_;
  ViolationReport report_;
};

// Algorithm: estimate Voronoi weights from the second sample, cluster the
// subsample under weighted capacity bounds (kmeanspp for p=1, the LP
// rounding pipeline for p>=2, or the brute-force oracle on tiny subsamples),
// and build the NN index.
std::unique_ptr<NnDispatcher> fit_dispatcher(const PointSet& S, const PointSet& S_prime,
                                             const Constraints& cons, const FitOptions& opts,
                                             Rng& rng);

// Reads any dispatcher saved with save() (NN or baseline types); implemented
// alongside the baselines so every type tag is known. Throws InvalidArgument
// on bad magic or an unknown tag.
std::unique_ptr<Dispatcher> load_dispatcher(std::istream& is);

}  // namespace balcl
