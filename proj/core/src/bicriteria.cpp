#include "balcl/bicriteria.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "balcl/errors.hpp"
#include "balcl/mincostflow.hpp"

namespace balcl {

namespace {

constexpr double kTol = 1e-6;
constexpr double kZero = 1e-9;

double rho_for(Objective obj) {
  switch (obj) {
    case Objective::KMedian: return 2.0;
    case Objective::KMeans: return 4.0;
    case Objective::KCenter: return 1.0;
  }
  return 2.0;
}

// Aggregation may push openings slightly above 1; the provable level cap is
// (p+2)/p for even p and (p+1)/(p-1) for odd p >= 3.
double level_cap(int p) {
  if (p % 2 == 0) return (p + 2.0) / p;
  if (p >= 3) return (p + 1.0) / (p - 1.0);
  return 2.0;
}

void check_reassignment_bound(const Instance& inst, const FractionalSolution& fs,
                              const CostMatrix& cm, int donor, int recv) {
  for (int j = 0; j < fs.n; ++j) {
    if (fs.xat(donor, j) <= kZero) continue;
    switch (cm.objective) {
      case Objective::KMedian:
        ensure(inst.distance(recv, j) <= 3.0 * inst.distance(donor, j) + 8.0 * fs.C[j] + kTol,
               "aggregate: k-median reassignment bound violated");
        break;
      case Objective::KMeans:
        ensure(inst.distance_sq(recv, j) <=
                   15.0 * inst.distance_sq(donor, j) + 80.0 * fs.C[j] + kTol,
               "aggregate: k-means reassignment bound violated");
        break;
      case Objective::KCenter:
        ensure(inst.distance(recv, j) <= 5.0 * cm.t + kTol,
               "aggregate: k-center reassignment bound violated");
        break;
    }
  }
}

}  // namespace

Empires select_monarchs(const FractionalSolution& fs, const CostMatrix& cm,
                        const Instance& inst) {
  const int n = fs.n;
  Empires emp;
  emp.rho = rho_for(cm.objective);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fs.C[a] < fs.C[b]; });

  for (int j : order) {
    bool blocked = false;
    for (int u : emp.monarchs) {
      if (cm.at(u, j) <= 2.0 * emp.rho * fs.C[j] + 1e-12) {
        blocked = true;
        break;
      }
    }
    if (!blocked) emp.monarchs.push_back(j);
  }

  emp.empire_of.assign(n, -1);
  for (int j = 0; j < n; ++j) {
    int best = -1;
    double bd = 0.0;
    for (int u : emp.monarchs) {
      double d = inst.distance(u, j);
      if (best < 0 || d < bd - 1e-15 || (std::abs(d - bd) <= 1e-15 && u < best)) {
        best = u;
        bd = d;
      }
    }
    emp.empire_of[j] = best;
  }

  // Lemma 1 postconditions.
  for (int u : emp.monarchs)
    ensure(emp.empire_of[u] == u, "monarchs: monarch not in own empire");
  for (int j = 0; j < n; ++j) {
    ensure(emp.empire_of[j] >= 0, "monarchs: uncovered point");
    ensure(cm.at(emp.empire_of[j], j) <= 2.0 * emp.rho * fs.C[j] + kTol,
           "monarchs: point too far from its monarch");
  }
  for (std::size_t a = 0; a < emp.monarchs.size(); ++a)
    for (std::size_t b = a + 1; b < emp.monarchs.size(); ++b) {
      int u = emp.monarchs[a], v = emp.monarchs[b];
      ensure(cm.at(u, v) > 4.0 * std::max(fs.C[u], fs.C[v]) - kTol,
             "monarchs: monarch pair too close");
    }
  double min_mass = cm.objective == Objective::KCenter ? fs.p : fs.p / 2.0;
  for (int u : emp.monarchs) {
    double mass = 0.0;
    for (int j = 0; j < n; ++j)
      if (emp.empire_of[j] == u) mass += fs.y[j];
    ensure(mass >= min_mass - kTol, "monarchs: empire holds too little opening");
  }
  return emp;
}

void move_opening(FractionalSolution& fs, int a, int b, double delta) {
  ensure(a != b, "move: a == b");
  ensure(delta >= 0 && delta <= fs.y[a] + kZero, "move: bad delta");
  if (delta == 0.0) return;
  delta = std::min(delta, fs.y[a]);
  double ratio = delta / fs.y[a];
  for (int j = 0; j < fs.n; ++j) {
    std::size_t aj = static_cast<std::size_t>(a) * fs.n + j;
    std::size_t bj = static_cast<std::size_t>(b) * fs.n + j;
    double shift = fs.x[aj] * ratio;
    fs.x[aj] -= shift;
    fs.x[bj] += shift;
  }
  fs.y[a] -= delta;
  fs.y[b] += delta;
  if (fs.y[a] < 1e-12) {
    // Exact drain: clear the residue so support counts stay crisp.
    fs.y[a] = 0.0;
    for (int j = 0; j < fs.n; ++j) fs.x[static_cast<std::size_t>(a) * fs.n + j] = 0.0;
  }
}

AggregatedSolution aggregate_openings(const FractionalSolution& fs, const Empires& emp,
                                      const CostMatrix& cm, const Constraints& cons,
                                      const Instance& inst,
                                      const std::vector<double>* weights) {
  AggregatedSolution agg;
  agg.fs = fs;
  FractionalSolution& g = agg.fs;

  for (int u : emp.monarchs) {
    std::vector<int> members;
    for (int j = 0; j < fs.n; ++j)
      if (emp.empire_of[j] == u) members.push_back(j);
    std::sort(members.begin(), members.end(), [&](int a, int b) {
      double da = inst.distance(u, a), db = inst.distance(u, b);
      if (da != db) return da < db;
      return a < b;
    });

    double total = 0.0;
    for (int j : members) total += g.y[j];
    int m = static_cast<int>(std::floor(total + kZero));
    ensure(m >= 1, "aggregate: empire opening below 1");
    double z = total / m;

    // Targets: the m members nearest the monarch end at level z, everyone
    // else at 0. Donors drain farthest-first into the nearest unfilled
    // target, so every elementary move shortens the distance to the monarch.
    std::size_t recv = 0;
    std::size_t donor = members.size();
    while (recv < static_cast<std::size_t>(m)) {
      double need = z - g.y[members[recv]];
      if (need <= kZero) {
        ++recv;
        continue;
      }
      while (donor > static_cast<std::size_t>(m) && g.y[members[donor - 1]] <= kZero) --donor;
      if (donor <= static_cast<std::size_t>(m)) break;  // conservation: nothing left to pull
      int d = members[donor - 1];
      int r = members[recv];
      double delta = std::min(need, g.y[d]);
      check_reassignment_bound(inst, g, cm, d, r);
      move_opening(g, d, r, delta);
      agg.moves.push_back({d, r, delta});
    }

    for (std::size_t i = 0; i < members.size(); ++i) {
      double want = i < static_cast<std::size_t>(m) ? z : 0.0;
      ensure(std::abs(g.y[members[i]] - want) <= kTol,
             "aggregate: empire did not reach its level");
    }
  }

  // Lemma 2 postconditions.
  const double cap = level_cap(cons.p);
  const double lo = weights ? cons.ell : static_cast<double>(cons.lower_count(fs.n));
  const double hi = weights ? cons.cap_L : static_cast<double>(cons.upper_count(fs.n));
  double sum_y = 0.0;
  int support = 0;
  for (int i = 0; i < fs.n; ++i) {
    double yi = g.y[i];
    sum_y += yi;
    if (yi > kZero) {
      ++support;
      agg.support.push_back(i);
      ensure(yi >= 1.0 - kTol && yi < cap + kTol, "aggregate: opening level outside [1, cap)");
    }
    double load = 0.0;
    for (int j = 0; j < fs.n; ++j) {
      double xij = g.xat(i, j);
      ensure(xij <= yi + kZero, "aggregate: x exceeds y");
      load += (weights ? (*weights)[j] : 1.0) * xij;
    }
    ensure(load >= lo * yi - kTol * (1.0 + lo), "aggregate: load below lower capacity");
    ensure(load <= hi * yi + kTol * (1.0 + hi), "aggregate: load above upper capacity");
  }
  ensure(std::abs(sum_y - fs.sum_y) <= kTol, "aggregate: total opening not conserved");
  ensure(sum_y <= cons.k + kTol, "aggregate: total opening exceeds k");
  ensure(support <= cons.k, "aggregate: support larger than k");
  for (int j = 0; j < fs.n; ++j) {
    double served = 0.0;
    for (int i = 0; i < fs.n; ++i) served += g.xat(i, j);
    ensure(std::abs(served - cons.p) <= kTol, "aggregate: point demand changed");
  }
  return agg;
}

Assignment round_assignment(const AggregatedSolution& agg, const CostMatrix& cm,
                            const Constraints& cons, const Instance& inst,
                            const std::vector<long long>* units) {
  const int n = agg.fs.n;
  const int p = cons.p;
  const int khat = static_cast<int>(agg.support.size());

  // Per-point masses: 1 each unweighted, integer units otherwise.
  std::vector<long long> u(n, 1);
  long long total = n;
  if (units) {
    require(static_cast<int>(units->size()) == n, "round: units size mismatch");
    total = 0;
    for (int j = 0; j < n; ++j) {
      require((*units)[j] >= 0, "round: negative unit mass");
      u[j] = (*units)[j];
      total += u[j];
    }
    require(total > 0, "round: zero total mass");
  }
  const long long lo = units ? static_cast<long long>(std::floor(total * cons.ell + kZero))
                             : cons.lower_count(n);
  const long long hi =
      static_cast<long long>(std::ceil(level_cap(p) * total * cons.cap_L - kZero));
  ensure(hi >= lo, "round: capacity window empty");

  FlowNetwork net;
  std::vector<int> point_node(n, -1), center_node(khat);
  long long demand = 0;
  for (int j = 0; j < n; ++j) {
    if (u[j] == 0) continue;
    point_node[j] = net.add_node();
    net.add_supply(point_node[j], p * u[j]);
    demand += p * u[j];
  }
  for (int c = 0; c < khat; ++c) {
    center_node[c] = net.add_node();
    net.add_supply(center_node[c], -lo);
  }
  int sink = net.add_node();
  net.add_supply(sink, -(demand - khat * lo));

  std::vector<std::vector<int>> edge_id(n, std::vector<int>(khat, -1));
  for (int j = 0; j < n; ++j) {
    if (point_node[j] < 0) continue;
    for (int c = 0; c < khat; ++c) {
      int i = agg.support[c];
      if (cm.objective == Objective::KCenter) {
        if (inst.distance(i, j) > 5.0 * cm.t + kZero) continue;
        edge_id[j][c] = net.add_edge(point_node[j], center_node[c], 2 * u[j], 5.0 * cm.t);
      } else {
        edge_id[j][c] = net.add_edge(point_node[j], center_node[c], 2 * u[j], cm.at(i, j));
      }
    }
  }
  for (int c = 0; c < khat; ++c) net.add_edge(center_node[c], sink, hi - lo, 0.0);

  auto res = solve_mcf(net);
  ensure(res.has_value(), "round: assignment flow infeasible");

  Assignment a;
  a.centers = agg.support;
  a.assign.resize(n);
  for (int j = 0; j < n; ++j) {
    if (point_node[j] < 0) {
      // Zero-mass point: cheapest admissible open centers, multiplicity <= 2.
      std::vector<int> order;
      for (int c = 0; c < khat; ++c) {
        int i = agg.support[c];
        if (cm.objective == Objective::KCenter && inst.distance(i, j) > 5.0 * cm.t + kZero)
          continue;
        order.push_back(c);
      }
      std::stable_sort(order.begin(), order.end(), [&](int ca, int cb) {
        double va = cm.objective == Objective::KCenter ? inst.distance(agg.support[ca], j)
                                                       : cm.at(agg.support[ca], j);
        double vb = cm.objective == Objective::KCenter ? inst.distance(agg.support[cb], j)
                                                       : cm.at(agg.support[cb], j);
        if (va != vb) return va < vb;
        return agg.support[ca] < agg.support[cb];
      });
      int rest = p;
      for (int c : order) {
        if (rest == 0) break;
        int take = std::min(rest, 2);
        a.assign[j].push_back({agg.support[c], take});
        rest -= take;
      }
      ensure(rest == 0, "round: zero-mass point could not fill p slots");
      continue;
    }
    long long slots_units = 0;
    // Largest-remainder apportionment of p slots proportional to flow units.
    std::vector<std::pair<int, long long>> flows;  // (center pos, units)
    for (int c = 0; c < khat; ++c) {
      if (edge_id[j][c] < 0) continue;
      long long f = res->flow[edge_id[j][c]];
      if (f > 0) {
        ensure(f <= 2 * u[j], "round: per-center flow above 2 units");
        flows.push_back({c, f});
        slots_units += f;
      }
    }
    ensure(slots_units == p * u[j], "round: point units not fully assigned");
    if (!units) {
      for (auto& [c, f] : flows) a.assign[j].push_back({agg.support[c], static_cast<int>(f)});
      continue;
    }
    int given = 0;
    std::vector<int> mult(flows.size(), 0);
    std::vector<std::pair<long long, int>> rem;  // (remainder, flow pos), descending
    for (std::size_t t = 0; t < flows.size(); ++t) {
      mult[t] = static_cast<int>(flows[t].second / u[j]);
      given += mult[t];
      long long r = flows[t].second % u[j];
      if (r > 0) rem.push_back({r, static_cast<int>(t)});
    }
    std::stable_sort(rem.begin(), rem.end(), [&](auto& ra, auto& rb) {
      if (ra.first != rb.first) return ra.first > rb.first;
      return agg.support[flows[ra.second].first] < agg.support[flows[rb.second].first];
    });
    for (auto& [r, t] : rem) {
      if (given == p) break;
      (void)r;
      ensure(mult[t] < 2, "round: apportionment would exceed multiplicity 2");
      ++mult[t];
      ++given;
    }
    ensure(given == p, "round: apportionment did not place p slots");
    for (std::size_t t = 0; t < flows.size(); ++t)
      if (mult[t] > 0) a.assign[j].push_back({agg.support[flows[t].first], mult[t]});
  }
  return a;
}

std::optional<BicriteriaResult> bicriteria_cluster(const Instance& inst, const Constraints& cons,
                                                   Objective obj,
                                                   const std::vector<double>* weights,
                                                   const std::vector<long long>* units) {
  cons.validate(inst.n);
  require(cons.p >= 2,
          "bicriteria_cluster requires p >= 2; use the k-means++ path for unreplicated clustering");
  require(!units || weights, "bicriteria_cluster: units given without weights");
  if (units && weights) {
    require(static_cast<int>(units->size()) == inst.n && static_cast<int>(weights->size()) == inst.n,
            "bicriteria_cluster: weights/units size mismatch");
    long long total = 0;
    for (long long uj : *units) total += uj;
    for (int j = 0; j < inst.n; ++j)
      require(std::abs((*weights)[j] * total - (*units)[j]) <= 1e-6 * std::max(1.0, static_cast<double>(total)),
              "bicriteria_cluster: units do not match weights * total");
  }

  RelaxOptions opts;
  opts.weights = weights;
  CostMatrix cm;
  std::optional<FractionalSolution> fs;
  if (obj == Objective::KCenter) {
    for (double t : inst.distinct_distances()) {
      fs = kcenter_lp_feasible(inst, t, cons, opts);
      if (fs) {
        cm = cost_matrix(inst, Objective::KCenter, t);
        break;
      }
    }
    if (!fs) return std::nullopt;
  } else {
    cm = cost_matrix(inst, obj);
    fs = solve_relaxation(cm, cons, opts);
    if (!fs) return std::nullopt;
  }

  Empires emp = select_monarchs(*fs, cm, inst);
  AggregatedSolution agg = aggregate_openings(*fs, emp, cm, cons, inst, weights);
  Assignment assignment = round_assignment(agg, cm, cons, inst, units);

  BicriteriaResult out;
  out.assignment = std::move(assignment);
  out.report = check_capacities(out.assignment, cons, weights);
  out.diag.c_lp = fs->C_LP;
  out.diag.sum_y = fs->sum_y;
  out.diag.num_open = static_cast<int>(agg.support.size());
  out.diag.threshold = obj == Objective::KCenter ? cm.t : 0.0;
  out.diag.value = evaluate(inst, out.assignment, obj);

  // Approximation guarantees; a violation here is an implementation bug.
  // Unit-weighted rounding proves the ratio against the unit-weighted cost,
  // so that is what gets checked in weighted mode (k-center's distance bound
  // is per point either way).
  double ratio = obj == Objective::KMedian ? 11.0 : 95.0;
  if (obj == Objective::KCenter) {
    ensure(out.diag.value <= 5.0 * cm.t + kTol, "bicriteria: k-center value above 5t");
  } else if (!units) {
    ensure(out.diag.value <= ratio * out.diag.c_lp + kTol * std::max(1.0, out.diag.c_lp),
           "bicriteria: rounded value above the guaranteed multiple of C_LP");
  } else {
    double wval = 0.0, wclp = 0.0;
    for (int j = 0; j < inst.n; ++j) {
      double cj = 0.0;
      for (auto& [c, m] : out.assignment.assign[j]) cj += m * cm.at(c, j);
      wval += static_cast<double>((*units)[j]) * cj;
      wclp += static_cast<double>((*units)[j]) * cons.p * fs->C[j];
    }
    ensure(wval <= ratio * wclp + kTol * std::max(1.0, wclp),
           "bicriteria: unit-weighted value above the guaranteed multiple");
  }
  return out;
}

}  // namespace balcl
