#include <benchmark/benchmark.h>

#include "balcl/bicriteria.hpp"
#include "balcl/instances.hpp"
#include "balcl/kcenter_exact.hpp"
#include "balcl/rng.hpp"

namespace {

balcl::Instance uniform_points(int n, std::uint64_t seed) {
  auto rng = balcl::make_rng(seed);
  return balcl::gen_uniform(n, 2, rng);
}

void BM_BicriteriaKMedian(benchmark::State& state) {
  auto inst = uniform_points(static_cast<int>(state.range(0)), 11);
  balcl::Constraints cons;
  cons.k = 4;
  cons.p = 2;
  cons.ell = 0.1;
  cons.cap_L = 0.6;
  for (auto _ : state) {
    auto res = balcl::bicriteria_cluster(inst, cons, balcl::Objective::KMedian);
    benchmark::DoNotOptimize(res);
  }
}

void BM_KCenterExact(benchmark::State& state) {
  auto inst = uniform_points(static_cast<int>(state.range(0)), 12);
  balcl::Constraints cons;
  cons.k = 3;
  cons.p = 1;
  cons.ell = 0.1;
  cons.cap_L = 1.0;
  for (auto _ : state) {
    auto res = balcl::kcenter_cluster(inst, cons);
    benchmark::DoNotOptimize(res);
  }
}

}  // namespace

BENCHMARK(BM_BicriteriaKMedian)->Arg(12)->Arg(20)->Arg(28);
BENCHMARK(BM_KCenterExact)->Arg(12)->Arg(24)->Arg(48);
