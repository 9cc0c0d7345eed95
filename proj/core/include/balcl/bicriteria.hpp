#pragma once

#include <optional>
#include <vector>

#include "balcl/assignment.hpp"
#include "balcl/cost.hpp"
#include "balcl/instance.hpp"
#include "balcl/lp_relax.hpp"

namespace balcl {

// Monarch selection result. empire_of[j] is the monarch owning j; every
// vertex belongs to exactly one empire and monarchs own themselves.
struct Empires {
  std::vector<int> monarchs;  // in admission order
  std::vector<int> empire_of;
  double rho = 2.0;  // 2 for k-median, 4 for k-means, 1 for k-center
};

// Greedy monarch procedure over nondecreasing fractional connection cost.
// Postconditions (checked): empires partition the points; every point pays
// at most 2*rho*C_j to its monarch; distinct monarchs are far apart; every
// empire holds at least p/2 fractional opening (p for k-center).
Empires select_monarchs(const FractionalSolution& fs, const CostMatrix& cm, const Instance& inst);

// Elementary opening move: shifts delta of opening from a to b and re-points
// the matching share of a's assignments at b. Preserves every LP constraint
// except the y <= 1 cap.
void move_opening(FractionalSolution& fs, int a, int b, double delta);

// One recorded reassignment produced while concentrating openings.
struct OpeningMove {
  int from = -1, to = -1;
  double delta = 0.0;
};

struct AggregatedSolution {
  FractionalSolution fs;          // x, y after aggregation (y may exceed 1)
  std::vector<OpeningMove> moves; // elementary moves in execution order
  std::vector<int> support;       // centers with positive opening, ascending
};

// Concentrates each empire's opening mass onto its floor(Y_u) members nearest
// the monarch, all at the common level Y_u / floor(Y_u). Checks the
// aggregation invariants (level bound, capacities, conservation, x <= y,
// demand, support size) and the per-move reassignment-cost bounds. With
// `weights`, capacity checks use weighted loads against the fractional
// bounds, matching the weighted relaxation.
AggregatedSolution aggregate_openings(const FractionalSolution& fs, const Empires& emp,
                                      const CostMatrix& cm, const Constraints& cons,
                                      const Instance& inst,
                                      const std::vector<double>* weights = nullptr);

struct BicriteriaDiagnostics {
  double c_lp = 0.0;        // scaled fractional optimum
  double value = 0.0;       // objective of the rounded assignment
  double sum_y = 0.0;       // total opening returned by the LP
  double threshold = 0.0;   // k-center t*, 0 otherwise
  int num_open = 0;
};

struct BicriteriaResult {
  Assignment assignment;
  ViolationReport report;
  BicriteriaDiagnostics diag;
};

// Rounds the aggregated fractional solution to an integral assignment by
// min-cost flow: every point gets p slots, per-center multiplicity at most 2,
// loads within [ceil(n*ell), ceil(cap * n*L)] where cap is the parity-exact
// level bound ((p+2)/p even, (p+1)/(p-1) odd). With `units` (integer point
// masses, as weights * total), loads are measured in those units at bounds
// [floor(U*ell), ceil(cap * U*L)], U the unit total; slots are apportioned
// per point by largest remainder and zero-mass points take the cheapest
// admissible open centers.
Assignment round_assignment(const AggregatedSolution& agg, const CostMatrix& cm,
                            const Constraints& cons, const Instance& inst,
                            const std::vector<long long>* units = nullptr);

// Full (p, k, ell, L) bicriteria pipeline for k-median / k-means / k-center.
// Requires p >= 2; k-center scans thresholds for the smallest LP-feasible t.
// Returns nullopt when the relaxation itself is infeasible. Passing `weights`
// (nonnegative masses) switches capacities to weighted loads; `units` must
// then hold weights * U as integers for the rounding step.
std::optional<BicriteriaResult> bicriteria_cluster(const Instance& inst, const Constraints& cons,
                                                   Objective obj,
                                                   const std::vector<double>* weights = nullptr,
                                                   const std::vector<long long>* units = nullptr);

}  // namespace balcl
