#include <benchmark/benchmark.h>

#include "balcl/mincostflow.hpp"
#include "balcl/rng.hpp"

namespace {

// Layered transportation network: sources -> middle -> sinks.
balcl::FlowNetwork layered_net(int side, std::uint64_t seed) {
  auto rng = balcl::make_rng(seed);
  std::uniform_int_distribution<int> cost(1, 50);
  balcl::FlowNetwork net;
  for (int v = 0; v < 2 * side + 2; ++v) net.add_node();
  int s = 2 * side, t = 2 * side + 1;
  net.add_supply(s, 2LL * side);
  net.add_supply(t, -2LL * side);
  for (int i = 0; i < side; ++i) {
    net.add_edge(s, i, 4, 0.0);
    net.add_edge(side + i, t, 4, 0.0);
    for (int j = 0; j < side; ++j) net.add_edge(i, side + j, 2, cost(rng));
  }
  return net;
}

void BM_MinCostFlow(benchmark::State& state) {
  auto net = layered_net(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    auto res = balcl::solve_mcf(net);
    benchmark::DoNotOptimize(res);
  }
}

}  // namespace

BENCHMARK(BM_MinCostFlow)->Arg(8)->Arg(16)->Arg(32);
