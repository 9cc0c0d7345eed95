#pragma once

#include <optional>
#include <vector>

#include "balcl/assignment.hpp"
#include "balcl/instance.hpp"
#include "balcl/lp_relax.hpp"

namespace balcl {

// Unweighted graph with an edge between every pair at distance <= t, plus
// component labels and an all-pairs hop-distance table (-1 across components).
struct ThresholdGraph {
  double t = 0.0;
  int n = 0;
  std::vector<std::vector<int>> adj;  // neighbors, ascending, self excluded
  std::vector<int> comp;              // component id per vertex (discovery order)
  int num_comps = 0;
  std::vector<int> hops;              // n*n BFS hop distances

  int hop(int i, int j) const { return hops[static_cast<std::size_t>(i) * n + j]; }
};

ThresholdGraph threshold_graph(const Instance& inst, double t);

// Monarch tree over one connected component: coarse clusters (empires) whose
// centers form a tree with hop distance exactly 3 between adjacent monarchs.
struct MonarchTree {
  std::vector<int> monarchs;                      // creation order, [0] is the root
  std::vector<int> parent;                        // per vertex: parent monarch, -1 elsewhere
  std::vector<int> m_of;                          // per vertex: owning monarch, -1 off-component
  std::vector<std::vector<int>> child_monarchs;   // per vertex j: ChildMonarchs(j)
  std::vector<std::vector<int>> dependents;       // per vertex j: Dependents(j)
  std::vector<std::vector<int>> children;         // per vertex u (monarch): tree children
};

// Builds the tree for the component containing `verts` (which must be exactly
// one connected component). All five structural guarantees are checked.
MonarchTree build_monarch_tree(const ThresholdGraph& g, const std::vector<int>& verts);

// One aggregated movement of opening mass: `delta` moved from its origin
// `from` to its final location `to`, `hops` the hop distance between them.
struct Shift {
  int from = -1, to = -1;
  double delta = 0.0;
  int hops = 0;
};
using ShiftLog = std::vector<Shift>;

// Mass parcel: opening that originated at `origin` in the LP solution.
struct Parcel {
  int origin;
  double amount;
};

// Mutable y-rounding state for one component. Parcels track each unit of
// opening back to its LP origin so movements can be aggregated (a unit moves
// once) and the distance-5 bound checked on every deposit.
struct YRounding {
  FractionalSolution fs;                    // current x (still the LP x) and y
  std::vector<std::vector<Parcel>> parcels; // per vertex, FIFO order
  ShiftLog elementary;                      // every individual move, in order
  bool v3_fallback_outside_wstar = false;   // diagnostics: see LocalRound
};

// Raises every monarch's opening to exactly 1 by pulling from its neighbors
// (distance-1 shift). Seeds the parcel state from the LP openings.
YRounding initial_aggregation(const ThresholdGraph& g, const MonarchTree& tree,
                              const FractionalSolution& frac);

// Bottom-up empire rounding; afterwards every y in the component is 0 or 1
// and exactly k_c are 1. Returns the aggregated shift log (initial
// aggregation included); every aggregated movement spans at most 5 hops.
ShiftLog round_y(const ThresholdGraph& g, const MonarchTree& tree, YRounding& st);

// Applies the aggregated shift to the pre-rounding LP solution all at once
// (each unit of opening moves exactly once), producing a 6-feasible (x', y')
// with y' integral. Checked against the rounded y and the LP constraints.
FractionalSolution realize_shift(const ThresholdGraph& g, const FractionalSolution& lp_frac,
                                 const ShiftLog& shifts, const Constraints& cons,
                                 const std::vector<int>& verts, int k_c);

// Unit-capacity flow rounding of x: every component point receives p distinct
// centers, every open center load lands in [ceil(n*ell), floor(n*L)], and
// only support edges of the 6-feasible x' are used.
void round_x_kcenter(const ThresholdGraph& g, const FractionalSolution& fs,
                     const Constraints& cons, const std::vector<int>& verts,
                     Assignment& out);

// Contiguous LP-feasible per-component budget range [m, M] (empty if none),
// probed exhaustively over 1..k and checked for contiguity. Solutions for
// each feasible k' are cached for reuse by the caller.
struct KRange {
  int m = 1, M = 0;  // empty when m > M
  std::vector<std::optional<FractionalSolution>> probes;  // index k' (0 unused)
  bool empty() const { return m > M; }
};
KRange feasible_k_range(const Instance& inst, const ThresholdGraph& g,
                        const std::vector<int>& verts, const Constraints& cons);

struct KCenterDiagnostics {
  int threshold_index = -1;           // position of t* in the sorted distinct distances
  int num_components = 0;
  std::vector<int> component_k;       // per component budget at t*
  int num_shifts = 0;                 // aggregated movements over all components
  int max_hop = 0;                    // max aggregated movement span (<= 5)
  double max_assigned_distance = 0.0; // <= 6 * t_star
  bool v3_fallback_outside_wstar = false;
};

struct KCenterResult {
  Assignment assignment;
  double t_star = 0.0;
  KCenterDiagnostics diag;
};

// Appendix-style exact algorithm: ascending threshold search, per-component
// LP probes and budget allocation, monarch-tree y-rounding (distance-5
// shifts), and unit-capacity x-rounding. The result never violates the
// capacity bounds or replication; max assigned distance <= 6 * t* <= 6 * OPT.
// Returns nullopt when no threshold admits a feasible allocation (the
// instance itself is infeasible).
std::optional<KCenterResult> kcenter_cluster(const Instance& inst, const Constraints& cons);

}  // namespace balcl
