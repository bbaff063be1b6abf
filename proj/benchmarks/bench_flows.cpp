#include <benchmark/benchmark.h>

#include <random>

#include "pmslow/analysis.hpp"
#include "pmslow/discrete_flow.hpp"
#include "pmslow/functionals.hpp"
#include "pmslow/generators.hpp"
#include "pmslow/limit_flow.hpp"

namespace {

using namespace pmslow;

const PlateauFunction kSym2(JumpSet({0.5}), {-1.0, 1.0});
const PlateauFunction kStair3(JumpSet({0.25, 0.6}), {0.0, 1.0, -0.5});

void BM_KEnergyGradient(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto s = random_ps_sample(rng, static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(k_energy_gradient(s.u));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KEnergyGradient)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oN);

void BM_DiscreteSym2(benchmark::State& state) {
  const GridFunction u0 = sample_plateau(kSym2, static_cast<std::size_t>(state.range(0)));
  IntegratorOptions o;
  o.store_states = false;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_discrete(u0, 0.1, o));
}
BENCHMARK(BM_DiscreteSym2)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_DiscreteSym2Rk4(benchmark::State& state) {
  const GridFunction u0 = sample_plateau(kSym2, static_cast<std::size_t>(state.range(0)));
  IntegratorOptions o;
  o.store_states = false;
  o.scheme = TimeScheme::kRk4;
  for (auto _ : state) benchmark::DoNotOptimize(integrate_discrete(u0, 0.1, o));
}
BENCHMARK(BM_DiscreteSym2Rk4)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LimitStair3(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(integrate_limit(kStair3, 1.0));
}
BENCHMARK(BM_LimitStair3)->Unit(benchmark::kMillisecond);

void BM_FundamentalAudits(benchmark::State& state) {
  for (auto _ : state) {
    std::mt19937_64 rng(2);
    benchmark::DoNotOptimize(random_fundamental_audits(rng, 50));
  }
}
BENCHMARK(BM_FundamentalAudits)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
