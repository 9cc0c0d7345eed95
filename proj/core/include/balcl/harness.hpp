#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "balcl/dispatch.hpp"
#include "balcl/instance.hpp"

namespace balcl {

// One simulated distributed-learning experiment: fit a dispatcher on a
// subsample of the training set, dispatch every train/test point to one of k
// simulated workers, train per-worker one-vs-all linear classifiers, and
// score on the dispatched test set.
struct ExperimentConfig {
  int k = 4;
  // One of: kmeanspp | oracle | random | bpt | lsh. (lp-round produces p >= 2
  // replicas and is rejected: the harness partitions with replication p = 1.)
  std::string dispatcher = "kmeanspp";
  int subsample = 2000;     // dispatcher fit sample size (clamped to train n)
  int second_sample = -1;   // weight-estimation sample size; -1 -> subsample
  int workers = 1;          // thread-pool size for dispatch/train/predict
  int repeats = 1;          // independent runs averaged into accuracy
  double lambda = -1.0;     // L2 reg; < 0 -> 3-fold CV over {1e-3, 1e-1, 10}
  int epochs = 200;         // max gradient-descent epochs per binary problem
  double step0 = 1.0;       // initial line-search step size
  double ell = -1.0;        // fitted-dispatcher lower bound; -1 -> 0.5 / k
  double cap_L = -1.0;      // fitted-dispatcher upper bound; -1 -> min(1, 2 / k)
  std::uint64_t seed = 0;
};

struct PhaseTimings {
  double fit = 0.0;
  double dispatch_train = 0.0;
  double train = 0.0;
  double dispatch_test = 0.0;
  double predict = 0.0;
  double total = 0.0;  // wall clock around all phases
};

struct ExperimentResult {
  // Mean test accuracy over the repeats whose partitioning passed the
  // imbalance guard; NaN when every repeat tripped (accuracy omitted).
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  std::vector<long long> cluster_sizes;  // train partition sizes, last repeat
  double entropy = std::numeric_limits<double>::quiet_NaN();  // last repeat
  PhaseTimings timings;                  // accumulated over repeats
  bool guard_tripped = false;            // any repeat tripped
  int repeats_used = 0;                  // repeats contributing to accuracy
};

// One-vs-all linear model over raw features plus a constant bias term.
// `is_constant` short-circuits prediction (empty or single-class data);
// labels may be any int, including negatives.
struct LinearModel {
  std::vector<int> classes;            // sorted distinct labels
  std::vector<std::vector<double>> w;  // per class: dim weights then bias
  bool is_constant = false;
  int constant = 0;

  int predict(const double* x, int dim) const;
};

// True iff the largest ceil(k/2) partitions hold more than 98% of the mass.
// k = 1 never trips (a single worker is trivially "balanced").
bool imbalance_guard(const std::vector<long long>& sizes, int k);

// Full-batch gradient descent with Armijo backtracking on the L2-regularized
// squared-hinge loss (bias unregularized); the objective is non-increasing
// per epoch (asserted). lambda < 0 selects from {1e-3, 1e-1, 10} by 3-fold
// round-robin cross-validation (ties -> smallest lambda; fewer than 3 points
// -> 0.1). Empty input yields a constant fallback_label model.
LinearModel train_local(const std::vector<const double*>& points, const std::vector<int>& labels,
                        int dim, double lambda, int epochs, double step0, int fallback_label);

// Runs the configured experiment. Requires labeled point-form train/test
// data of equal dimension. Fixed seed => bit-for-bit identical accuracy.
ExperimentResult run_experiment(const Instance& train, const Instance& test,
                                const ExperimentConfig& cfg);

struct ScalingReport {
  std::vector<int> worker_counts;
  std::vector<PhaseTimings> timings;  // one per count
  std::vector<double> speedup;        // total(first) / total(i)
};

// Same workload at each thread-pool size; reports wall time per phase and
// speedup vs the first count. Speedups are measurements, not guarantees:
// whether 1 -> 4 threads actually wins depends on the workload (and the
// hardware), so that check belongs to the caller.
ScalingReport scaling_run(const Instance& train, const Instance& test, const ExperimentConfig& cfg,
                          const std::vector<int>& worker_counts);

}  // namespace balcl
