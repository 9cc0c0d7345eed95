#include "balcl/mincostflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "balcl/errors.hpp"

namespace balcl {

namespace {

constexpr double kBig = std::numeric_limits<double>::infinity();
constexpr double kCostEps = 1e-9;

struct Arc {
  int to;
  long long cap;
  double cost;
};

struct Graph {
  std::vector<Arc> arcs;  // arc 2e = forward of edge e, 2e+1 = reverse
  std::vector<std::vector<int>> head;

  void build(int n, const std::vector<FlowNetwork::Edge>& edges) {
    head.assign(n, {});
    arcs.reserve(edges.size() * 2);
    for (auto& e : edges) {
      head[e.from].push_back(static_cast<int>(arcs.size()));
      arcs.push_back({e.to, e.cap, e.cost});
      head[e.to].push_back(static_cast<int>(arcs.size()));
      arcs.push_back({e.from, 0, -e.cost});
    }
  }
};

}  // namespace

std::optional<FlowResult> solve_mcf(const FlowNetwork& net) {
  const int n0 = net.num_nodes();
  long long total_supply = 0;
  for (long long s : net.supply) total_supply += std::max(0LL, s);
  long long total_demand = 0;
  for (long long s : net.supply) total_demand += std::max(0LL, -s);
  if (total_supply != total_demand) return std::nullopt;

  // Super source/sink absorb the node supplies.
  const int s = n0, t = n0 + 1, n = n0 + 2;
  std::vector<FlowNetwork::Edge> edges = net.edges;
  const int num_orig = static_cast<int>(edges.size());
  for (int v = 0; v < n0; ++v) {
    if (net.supply[v] > 0) edges.push_back({s, v, net.supply[v], 0.0, 0});
    else if (net.supply[v] < 0) edges.push_back({v, t, -net.supply[v], 0.0, 0});
  }

  Graph g;
  g.build(n, edges);

  // Potentials from an all-zero Bellman-Ford pass; an n-th-round improvement
  // means a negative cycle, which callers must never submit.
  std::vector<double> pi(n, 0.0);
  for (int round = 0; round <= n; ++round) {
    bool changed = false;
    for (std::size_t a = 0; a < g.arcs.size(); ++a) {
      if (g.arcs[a].cap <= 0) continue;
      int u = static_cast<int>(a % 2 == 0 ? edges[a / 2].from : edges[a / 2].to);
      double cand = pi[u] + g.arcs[a].cost;
      if (cand < pi[g.arcs[a].to] - kCostEps) {
        pi[g.arcs[a].to] = cand;
        changed = true;
      }
    }
    if (!changed) break;
    ensure(round < n, "mcf: negative-cost cycle in input network");
  }

  std::vector<double> dist(n);
  std::vector<int> prev_arc(n);
  long long remaining = total_supply;
  while (remaining > 0) {
    // Dijkstra on reduced costs; ties pop the smaller node index.
    std::fill(dist.begin(), dist.end(), kBig);
    std::fill(prev_arc.begin(), prev_arc.end(), -1);
    dist[s] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0.0, s});
    std::vector<char> done(n, 0);
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (done[v]) continue;
      done[v] = 1;
      for (int a : g.head[v]) {
        if (g.arcs[a].cap <= 0) continue;
        double rc = g.arcs[a].cost + pi[v] - pi[g.arcs[a].to];
        ensure(rc > -1e-6, "mcf: negative reduced cost");
        if (rc < 0) rc = 0;
        int w = g.arcs[a].to;
        if (!done[w] && dist[v] + rc < dist[w] - 1e-15) {
          dist[w] = dist[v] + rc;
          prev_arc[w] = a;
          pq.push({dist[w], w});
        }
      }
    }
    if (dist[t] == kBig) return std::nullopt;

    long long push = remaining;
    for (int v = t; v != s;) {
      int a = prev_arc[v];
      push = std::min(push, g.arcs[a].cap);
      v = g.arcs[a ^ 1].to;
    }
    for (int v = t; v != s;) {
      int a = prev_arc[v];
      g.arcs[a].cap -= push;
      g.arcs[a ^ 1].cap += push;
      v = g.arcs[a ^ 1].to;
    }
    remaining -= push;
    for (int v = 0; v < n; ++v) pi[v] += std::min(dist[v], dist[t]);
  }

  FlowResult res;
  res.flow.resize(num_orig);
  for (int e = 0; e < num_orig; ++e) {
    long long f = g.arcs[2 * e + 1].cap;  // reverse capacity equals routed flow
    res.flow[e] = f + net.edges[e].lower;
    res.cost += static_cast<double>(res.flow[e]) * net.edges[e].cost;
  }
  return res;
}

bool residual_has_negative_cycle(const FlowNetwork& net, const std::vector<long long>& flow) {
  const int n = net.num_nodes();
  struct RArc {
    int from, to;
    double cost;
  };
  std::vector<RArc> arcs;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    auto& ed = net.edges[e];
    long long routed = flow[e] - ed.lower;
    if (routed < ed.cap) arcs.push_back({ed.from, ed.to, ed.cost});
    if (routed > 0) arcs.push_back({ed.to, ed.from, -ed.cost});
  }
  std::vector<double> d(n, 0.0);
  for (int round = 0; round <= n; ++round) {
    bool changed = false;
    for (auto& a : arcs) {
      if (d[a.from] + a.cost < d[a.to] - kCostEps) {
        d[a.to] = d[a.from] + a.cost;
        changed = true;
      }
    }
    if (!changed) return false;
    if (round == n) return true;
  }
  return true;
}

}  // namespace balcl
