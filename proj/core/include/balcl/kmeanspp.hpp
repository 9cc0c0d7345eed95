#pragma once

#include <utility>
#include <vector>

#include "balcl/assignment.hpp"
#include "balcl/cost.hpp"
#include "balcl/instance.hpp"
#include "balcl/rng.hpp"

namespace balcl {

// Configuration for the seeding/refinement pipeline. A negative
// oversample_count selects the default k * ceil(ln(k+1)) + k.
struct SeedingConfig {
  int k = -1;                // -1: take k from the constraints
  int oversample_count = -1; // -1: default oversampling
  int lloyd_iters = 10;
  std::uint64_t seed = 0;    // used by callers to seed the Rng they pass in
};

// D^2-sampling: first index uniform, each subsequent index sampled with
// probability proportional to its squared distance to the chosen set.
// Returns m distinct indices. If every remaining point coincides with a
// chosen one (all weights zero), the lowest unchosen index is taken.
std::vector<int> dsquared_seed(const Instance& inst, int m, Rng& rng);

// Repeatedly deletes the center whose removal increases the unconstrained
// k-means cost (squared distance to the nearest surviving center) the least,
// ties to the lowest center index, until k centers remain.
std::vector<int> greedy_prune(const Instance& inst, std::vector<int> centers, int k);

// Standard Lloyd iterations on point-form instances with continuous centroid
// centers. Empty clusters keep their previous center. The k-means cost is
// asserted non-increasing across iterations.
std::vector<std::vector<double>> lloyd(const Instance& inst,
                                       std::vector<std::vector<double>> centers, int iters);

// Medoid variant for matrix-form instances: alternates nearest-medoid
// assignment with per-cluster medoid updates (member minimizing the summed
// squared distance). Cost asserted non-increasing.
std::vector<int> lloyd_medoid(const Instance& inst, std::vector<int> medoids, int iters);

// Balancing heuristic: merges every cluster below the lower bound into the
// cluster with the nearest center, then randomly splits clusters above the
// upper bound. Output sizes land in [ceil(ell*n), floor(L*n)] (hard assert);
// the cluster count may differ from the input count. In weighted mode the
// load of a cluster is the sum of its point weights and the bounds are
// [ell*W, L*W] with one-point slack, W the total weight.
std::vector<std::vector<int>> balance_heuristic(const Instance& inst,
                                                std::vector<std::vector<int>> clusters,
                                                double ell, double cap_L, Rng& rng,
                                                const std::vector<double>* weights = nullptr);

// Full pipeline: D^2 seeding with oversampling, greedy pruning to k, Lloyd
// refinement, then the balancing heuristic. p must be 1. The returned
// assignment uses one representative point per cluster (the member nearest
// the cluster centroid/medoid) as its center.
std::pair<Assignment, ViolationReport> kmeanspp_balanced(
    const Instance& inst, const Constraints& cons, const SeedingConfig& config, Rng& rng,
    const std::vector<double>* weights = nullptr);

}  // namespace balcl
