#pragma once

#include <optional>

#include "balcl/assignment.hpp"
#include "balcl/cost.hpp"
#include "balcl/instance.hpp"
#include "balcl/rng.hpp"

namespace balcl {

// Star metric: one hub at index 0 plus 10*nl leaves; hub-leaf distance 1,
// leaf-leaf distance 2. The k-median optimum under ell = nl/n strictly
// increases with k.
Instance gen_star(int nl);

// k_prime groups of size 2*nl-1 each; distance 0 inside a group, 1 across.
// `perturb` replaces the zeros with tiny distinct values (1e-6 scale) for
// algorithms that assume distinct points; leave it off for oracle runs.
Instance gen_groups(int k_prime, int nl, bool perturb = false);

// Equal-weight Gaussian mixture with centers uniform in the unit cube.
// Labels follow a complete-linkage hierarchy over the centers: label ranges
// split proportionally to subtree leaf counts, so nearby components share
// labels. n_labels <= 0 picks round(0.15 * components) as in the 200/30 setup.
Instance gen_gaussian_mixture(int components, int dims, double sigma, int n, Rng& rng,
                              int n_labels = 0);

// Uniform points on [0,10]^2 x [0,1]^(dims-2); the class is the cell of the
// 4x4 grid over the first two coordinates (16 classes).
Instance gen_grid_rect(int n, Rng& rng, int dims = 100);

// Two unit Gaussians at (0,0) and (10,0), mixing weight 0.08 for the second.
// Labels: -1 when x0 <= 0, 1 when x0 in (0,5], else 2. Carries ell=0.1, L=1
// as metadata defaults.
Instance gen_two_gaussians(int n, Rng& rng);

// Uniform points in the unit cube; convenience generator for test corpora.
Instance gen_uniform(int n, int dims, Rng& rng);

struct OracleResult {
  double value = 0.0;
  Assignment assignment;
};

// Exact optimum by enumerating every k-subset of points as centers and
// solving the balanced p-replicated assignment with a unit-capacity min-cost
// flow (k-center: smallest feasible radius by bisection over the distinct
// distances). Ties prefer the lexicographically smallest center set.
// Guarded by C(n,k) <= 1e6; throws InfeasibleError when no subset admits a
// feasible assignment.
OracleResult brute_force_opt(const Instance& inst, const Constraints& cons, Objective obj);

}  // namespace balcl
