#include <benchmark/benchmark.h>

#include "occuthresh/cycles.hpp"
#include "occuthresh/moments.hpp"
#include "occuthresh/occupancy.hpp"
#include "occuthresh/sdpi.hpp"

using namespace occuthresh;

static void BM_CountSolutions(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const Configuration cfg = sample_configuration(Params::make(n, 2, 4, 2), 1);
  for (auto _ : state) benchmark::DoNotOptimize(count_solutions(cfg));
}
BENCHMARK(BM_CountSolutions)->Arg(12)->Arg(20)->Arg(28)->Unit(benchmark::kMillisecond);

static void BM_IsSatisfiableAboveThreshold(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const Configuration cfg = sample_configuration(Params::make(n, 3, 4, 2), 2);
  for (auto _ : state) benchmark::DoNotOptimize(is_satisfiable(cfg));
}
BENCHMARK(BM_IsSatisfiableAboveThreshold)->Arg(16)->Arg(24)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_CountCycles(benchmark::State& state) {
  const Configuration cfg = sample_configuration(Params::make(400, 3, 4, 2), 3);
  const auto l_max = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(count_cycles(cfg, l_max));
}
BENCHMARK(BM_CountCycles)->DenseRange(2, 6, 2)->Unit(benchmark::kMicrosecond);

static void BM_SecondMomentExactRatio(benchmark::State& state) {
  const Params p = Params::make(static_cast<std::uint32_t>(state.range(0)), 2, 4, 2);
  for (auto _ : state) benchmark::DoNotOptimize(second_moment_exact_ratio(p));
}
BENCHMARK(BM_SecondMomentExactRatio)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_ContractionOccupation(benchmark::State& state) {
  const auto grid = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(contraction_occupation(4, grid));
}
BENCHMARK(BM_ContractionOccupation)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_VerifyK4(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_k4());
}
BENCHMARK(BM_VerifyK4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
