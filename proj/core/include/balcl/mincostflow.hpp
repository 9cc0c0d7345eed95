#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace balcl {

// Directed network with integer capacities, real edge costs, and node
// supplies (positive = source, negative = demand). Supplies must balance.
struct FlowNetwork {
  std::vector<long long> supply;
  struct Edge {
    int from, to;
    long long cap;  // capacity net of any lower bound
    double cost;
    long long lower = 0;
  };
  std::vector<Edge> edges;

  int add_node() {
    supply.push_back(0);
    return static_cast<int>(supply.size()) - 1;
  }
  int num_nodes() const { return static_cast<int>(supply.size()); }
  void add_supply(int v, long long s) { supply[v] += s; }
  // Returns the edge id; per-edge flows in FlowResult use the same ids.
  int add_edge(int from, int to, long long cap, double cost) {
    edges.push_back({from, to, cap, cost});
    return static_cast<int>(edges.size()) - 1;
  }
  // Edge with flow lower bound, via the standard supply transformation.
  int add_edge_bounded(int from, int to, long long lo, long long hi, double cost) {
    supply[from] -= lo;
    supply[to] += lo;
    int id = add_edge(from, to, hi - lo, cost);
    edges[id].lower = lo;
    return id;
  }
};

struct FlowResult {
  std::vector<long long> flow;  // per edge, includes any lower bound
  double cost = 0.0;
};

// Min-cost b-flow by successive shortest augmenting paths: one Bellman-Ford
// pass seeds the potentials (negative costs allowed), Dijkstra with reduced
// costs afterwards. Deterministic: path ties resolve to the smaller node
// index. Returns nullopt when no feasible flow exists; throws InvariantError
// on a negative-cost cycle (caller bug).
std::optional<FlowResult> solve_mcf(const FlowNetwork& net);

// True when the residual graph of `flow` admits a negative-cost cycle, i.e.
// the flow is not cost-optimal.
bool residual_has_negative_cycle(const FlowNetwork& net, const std::vector<long long>& flow);

}  // namespace balcl
