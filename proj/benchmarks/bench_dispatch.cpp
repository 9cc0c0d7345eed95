#include <benchmark/benchmark.h>

#include <vector>

#include "balcl/dispatch.hpp"
#include "balcl/instances.hpp"
#include "balcl/kmeanspp.hpp"
#include "balcl/rng.hpp"

namespace {

balcl::PointSet gaussian_set(int n, int dim, std::uint64_t seed) {
  auto rng = balcl::make_rng(seed);
  auto inst = balcl::gen_gaussian_mixture(8, dim, 0.1, n, rng);
  balcl::PointSet s;
  s.n = inst.n;
  s.dim = inst.dim;
  s.data = inst.points;
  return s;
}

void BM_DSquaredSeeding(benchmark::State& state) {
  auto set = gaussian_set(static_cast<int>(state.range(0)), 16, 21);
  auto inst = balcl::Instance::from_points(std::vector<double>(set.data), set.dim);
  for (auto _ : state) {
    auto rng = balcl::make_rng(5);
    auto seeds = balcl::dsquared_seed(inst, 32, rng);
    benchmark::DoNotOptimize(seeds);
  }
}

void BM_RpTreeQuery(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto set = gaussian_set(n, 16, 22);
  auto rng = balcl::make_rng(6);
  auto tree = balcl::build_rptree(set.data, set.n, set.dim, 32, rng);
  auto queries = gaussian_set(256, 16, 23);
  int q = 0;
  for (auto _ : state) {
    int hit = balcl::nn_query(tree, queries.row(q));
    benchmark::DoNotOptimize(hit);
    q = (q + 1) % queries.n;
  }
}

void BM_ExactNnQuery(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  auto set = gaussian_set(n, 16, 22);
  auto queries = gaussian_set(256, 16, 23);
  int q = 0;
  for (auto _ : state) {
    int hit = balcl::exact_nn(set.data.data(), set.n, set.dim, queries.row(q));
    benchmark::DoNotOptimize(hit);
    q = (q + 1) % queries.n;
  }
}

}  // namespace

BENCHMARK(BM_DSquaredSeeding)->Arg(1000)->Arg(4000);
BENCHMARK(BM_RpTreeQuery)->Arg(1000)->Arg(10000)->Arg(50000);
BENCHMARK(BM_ExactNnQuery)->Arg(1000)->Arg(10000)->Arg(50000);
