#include <benchmark/benchmark.h>

#include "balcl/lp.hpp"
#include "balcl/rng.hpp"

namespace {

// Random dense LP with a guaranteed feasible point at the origin:
// min c.x s.t. A x <= b (b >= 0), 0 <= x <= 10.
balcl::lp::LinearProgram random_lp(int vars, int rows, std::uint64_t seed) {
  auto rng = balcl::make_rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> rhs(0.5, 4.0);
  balcl::lp::LinearProgram prog;
  for (int j = 0; j < vars; ++j) prog.add_var(coef(rng), 10.0);
  for (int i = 0; i < rows; ++i) {
    std::vector<std::pair<int, double>> row(vars);
    for (int j = 0; j < vars; ++j) row[j] = {j, coef(rng)};
    prog.add_row(balcl::lp::Sense::LE, rhs(rng), std::move(row));
  }
  return prog;
}

void BM_LpSolveDense(benchmark::State& state) {
  int vars = static_cast<int>(state.range(0));
  auto prog = random_lp(vars, 2 * vars, 42);
  for (auto _ : state) {
    auto sol = balcl::lp::lp_solve(prog);
    benchmark::DoNotOptimize(sol.objective);
  }
}

}  // namespace

BENCHMARK(BM_LpSolveDense)->Arg(20)->Arg(60)->Arg(120);
