#include "balcl/stability.hpp"

#include <algorithm>
#include <cmath>

#include "balcl/kcenter_exact.hpp"

namespace balcl {

namespace {

// Medoid under the plain (non-squared) distance; ties -> lowest index.
int kmedian_medoid(const Instance& inst, const std::vector<int>& cluster) {
  int best = -1;
  double best_val = 0.0;
  for (int m : cluster) {
    double v = 0.0;
    for (int j : cluster) v += inst.distance(m, j);
    if (best < 0 || v < best_val - 1e-15) {
      best = m;
      best_val = v;
    }
  }
  return best;
}

double kmedian_cost(const Instance& inst, const std::vector<std::vector<int>>& clusters) {
  double total = 0.0;
  for (auto& c : clusters) {
    if (c.empty()) continue;
    int m = kmedian_medoid(inst, c);
    for (int j : c) total += inst.distance(m, j);
  }
  return total;
}

}  // namespace

ThresholdClustering bbg_cluster(const Instance& inst, int k, double tau) {
  require(k >= 1 && k <= inst.n, "bbg_cluster: need 1 <= k <= n");
  require(tau >= 0.0, "bbg_cluster: negative threshold");
  ThresholdClustering out;
  out.tau = tau;
  out.attached.assign(inst.n, 0);

  std::vector<char> alive(inst.n, 1);
  for (int round = 0; round < k; ++round) {
    int pick = -1, best_deg = -1;
    for (int v = 0; v < inst.n; ++v) {
      if (!alive[v]) continue;
      int deg = 0;
      for (int w = 0; w < inst.n; ++w)
        if (w != v && alive[w] && inst.distance(v, w) <= tau + 1e-12) ++deg;
      if (deg > best_deg) {
        best_deg = deg;
        pick = v;
      }
    }
    if (pick < 0)
      throw SuggestLargerTau("bbg_cluster: threshold graph exhausted before k clusters");
    std::vector<int> cluster = {pick};
    for (int w = 0; w < inst.n; ++w)
      if (w != pick && alive[w] && inst.distance(pick, w) <= tau + 1e-12) cluster.push_back(w);
    for (int w : cluster) alive[w] = 0;
    std::sort(cluster.begin(), cluster.end());
    out.clusters.push_back(std::move(cluster));
  }

  // Leftovers: single-linkage attachment to the nearest carved cluster.
  for (int v = 0; v < inst.n; ++v) {
    if (!alive[v]) continue;
    int target = -1;
    double best = 0.0;
    for (int c = 0; c < k; ++c)
      for (int w : out.clusters[c])
        if (target < 0 || inst.distance(v, w) < best - 1e-15) {
          target = c;
          best = inst.distance(v, w);
        }
    out.clusters[target].push_back(v);
    out.attached[v] = 1;
    alive[v] = 0;
  }
  for (auto& c : out.clusters) std::sort(c.begin(), c.end());
  return out;
}

std::pair<std::vector<std::vector<int>>, int> capacity_repair(
    const Instance& inst, std::vector<std::vector<int>> clusters, double ell, double cap_L) {
  long long n = 0;
  for (auto& c : clusters) n += static_cast<long long>(c.size());
  const long long k = static_cast<long long>(clusters.size());
  const long long lo = static_cast<long long>(std::ceil(ell * n - 1e-9));
  const long long hi = static_cast<long long>(std::floor(cap_L * n + 1e-9));
  require(lo <= hi, "capacity_repair: empty capacity window");
  require(k * lo <= n && k * hi >= n, "capacity_repair: bounds infeasible for k clusters");

  long long initial_violation = 0;
  for (auto& c : clusters) {
    long long s = static_cast<long long>(c.size());
    initial_violation += std::max(0LL, s - hi) + std::max(0LL, lo - s);
  }

  int moves = 0;
  for (;;) {
    int largest = 0, smallest = 0;
    for (int c = 1; c < static_cast<int>(clusters.size()); ++c) {
      if (clusters[c].size() > clusters[largest].size()) largest = c;
      if (clusters[c].size() < clusters[smallest].size()) smallest = c;
    }
    bool over = static_cast<long long>(clusters[largest].size()) > hi;
    bool under = static_cast<long long>(clusters[smallest].size()) < lo;
    if (!over && !under) break;
    ensure(largest != smallest, "capacity_repair: cannot rebalance a single violating cluster");

    // Cheapest point of the largest cluster w.r.t. the smallest's medoid.
    int medoid = clusters[smallest].empty() ? -1 : kmedian_medoid(inst, clusters[smallest]);
    int pick_pos = 0;
    for (int pos = 1; pos < static_cast<int>(clusters[largest].size()); ++pos) {
      if (medoid < 0) break;  // empty receiver: lowest index moves
      double cur = inst.distance(clusters[largest][pick_pos], medoid);
      double alt = inst.distance(clusters[largest][pos], medoid);
      if (alt < cur - 1e-15) pick_pos = pos;
    }
    int moved = clusters[largest][pick_pos];
    clusters[largest].erase(clusters[largest].begin() + pick_pos);
    clusters[smallest].push_back(moved);
    std::sort(clusters[smallest].begin(), clusters[smallest].end());
    ++moves;
    ensure(moves <= initial_violation, "capacity_repair: exceeded the move budget");
  }

  long long out_n = 0;
  for (auto& c : clusters) {
    long long s = static_cast<long long>(c.size());
    ensure(s >= lo && s <= hi, "capacity_repair: output size outside bounds");
    out_n += s;
  }
  ensure(out_n == n, "capacity_repair: points not conserved");
  return {std::move(clusters), moves};
}

ThresholdClustering tau_sweep(const Instance& inst, int k, double ell, double cap_L) {
  require(k >= 1 && k <= inst.n, "tau_sweep: need 1 <= k <= n");
  std::optional<ThresholdClustering> best;
  double best_cost = 0.0;
  for (double tau : inst.distinct_distances()) {
    ThresholdClustering tc;
    try {
      tc = bbg_cluster(inst, k, tau);
    } catch (const SuggestLargerTau&) {
      continue;
    }
    auto [repaired, moves] = capacity_repair(inst, tc.clusters, ell, cap_L);
    (void)moves;
    tc.clusters = std::move(repaired);
    double cost = kmedian_cost(inst, tc.clusters);
    if (!best || cost < best_cost - 1e-15) {
      best = std::move(tc);
      best_cost = cost;
    }
  }
  if (!best) throw InfeasibleError("tau_sweep: no threshold produced k clusters");
  return *best;
}

std::optional<KCenterStableResult> kcenter_stable(const Instance& inst, int k, double ell,
                                                  double cap_L) {
  require(k >= 1 && k <= inst.n, "kcenter_stable: need 1 <= k <= n");
  const long long lo = static_cast<long long>(std::ceil(ell * inst.n - 1e-9));
  const long long hi = static_cast<long long>(std::floor(cap_L * inst.n + 1e-9));
  for (double r : inst.distinct_distances()) {
    ThresholdGraph g = threshold_graph(inst, r);
    if (g.num_comps != k) continue;
    std::vector<std::vector<int>> comps(k);
    for (int v = 0; v < inst.n; ++v) comps[g.comp[v]].push_back(v);
    bool ok = true;
    for (auto& c : comps)
      ok = ok && static_cast<long long>(c.size()) >= lo &&
           static_cast<long long>(c.size()) <= hi;
    if (!ok) continue;
    KCenterStableResult res;
    res.r_star = r;
    res.clustering.tau = r;
    res.clustering.clusters = std::move(comps);
    res.clustering.attached.assign(inst.n, 0);
    return res;
  }
  return std::nullopt;
}

}  // namespace balcl
