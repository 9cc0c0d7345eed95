#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "balcl/errors.hpp"
#include "balcl/instance.hpp"

namespace balcl {

// Raised when the threshold graph runs out of vertices before k clusters
// have been carved; a larger threshold may succeed.
struct SuggestLargerTau : InfeasibleError {
  using InfeasibleError::InfeasibleError;
};

// A clustering obtained from a threshold graph. Clusters partition the
// points; attached[j] marks points that were not carved directly but glued
// to the nearest cluster afterwards.
struct ThresholdClustering {
  double tau = 0.0;
  std::vector<std::vector<int>> clusters;
  std::vector<char> attached;
};

// BBG-style carving: k rounds of removing the closed neighborhood of the
// highest-degree vertex of the surviving threshold graph at tau (ties to the
// lowest index), then attaching every leftover point to the cluster holding
// its nearest carved point. Throws SuggestLargerTau if the graph empties
// before k rounds.
ThresholdClustering bbg_cluster(const Instance& inst, int k, double tau);

// Rebalances cluster sizes into [ceil(ell*n), floor(L*n)] by repeatedly
// moving, from the largest cluster into the smallest, the point nearest the
// smallest cluster's medoid. Returns the number of moved points, which never
// exceeds the summed initial bound violations.
std::pair<std::vector<std::vector<int>>, int> capacity_repair(
    const Instance& inst, std::vector<std::vector<int>> clusters, double ell, double cap_L);

// Probes bbg_cluster at every distinct pairwise distance (ascending),
// repairs capacities, scores by the k-median cost with per-cluster medoids,
// and returns the argmin (first threshold wins ties). Thresholds where
// carving fails are skipped; throws InfeasibleError when no threshold works.
ThresholdClustering tau_sweep(const Instance& inst, int k, double ell, double cap_L);

struct KCenterStableResult {
  ThresholdClustering clustering;
  double r_star = 0.0;
};

// Balanced k-center under (2,0)-approximation stability: the smallest
// threshold r whose graph has exactly k connected components, all with sizes
// inside the capacity window. nullopt means no such threshold exists (the
// instance is not stable in the required sense).
std::optional<KCenterStableResult> kcenter_stable(const Instance& inst, int k, double ell,
                                                  double cap_L);

}  // namespace balcl
