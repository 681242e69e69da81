#include <benchmark/benchmark.h>

#include <vector>

#include "cogmac/period_optimizer.hpp"
#include "cogmac/renewal.hpp"
#include "cogmac/slotted_sim.hpp"
#include "cogmac/unslotted_sim.hpp"
#include "cogmac/whittle.hpp"

using namespace cogmac;

namespace {

std::vector<UnslottedChannelParams> reference() {
  return {{0.2, 1.0}, {0.17, 0.9}, {0.15, 0.8}, {0.13, 0.7}, {0.11, 0.6}};
}

void BM_WhittleGrid(benchmark::State& state) {
  WhittleConfig cfg;
  cfg.discount = 0.999;
  cfg.grid_points = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(whittle_index(0.4, {0.3, 0.7}, cfg));
}
BENCHMARK(BM_WhittleGrid)->Arg(501)->Arg(2001)->Unit(benchmark::kMillisecond);

void BM_WhittleThreshold(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(threshold_whittle_index(0.4, {0.3, 0.7}, 0.9999));
}
BENCHMARK(BM_WhittleThreshold);

void BM_DeltaClosed(benchmark::State& state) {
  const UnslottedChannelParams p{0.2, 1.0};
  double t = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(delta(p, ChannelState::free, t));
    t += 1e-9;
  }
}
BENCHMARK(BM_DeltaClosed);

void BM_DeltaRenewal(benchmark::State& state) {
  const auto f = Density::exponential(0.2);
  const auto b = Density::exponential(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(delta_numeric(f, b, ChannelState::free, 5.0, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_DeltaRenewal)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_OptimizeTwoPeriods(benchmark::State& state) {
  const auto ch = reference();
  const auto sensing = SensingModel::perfect_sensing(0.01);
  const auto c = InterferenceConstraint::fraction_of_utilization(ch, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(optimize_two_periods(ch, sensing, 0.01, c).objective);
}
BENCHMARK(BM_OptimizeTwoPeriods)->Unit(benchmark::kMillisecond);

void BM_SlottedRun(benchmark::State& state) {
  SlottedConfig cfg;
  cfg.channels = {{0.2, 0.8}, {0.5, 0.4}, {0.3, 0.9}, {0.6, 0.2}, {0.1, 0.7}};
  cfg.policy = static_cast<SlottedPolicy>(state.range(0));
  cfg.sense_count = (cfg.policy == SlottedPolicy::whittle_blind || cfg.policy == SlottedPolicy::whittle_informed) ? 1 : 5;
  cfg.learning_period = 20;
  cfg.horizon = 10000;
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_slotted(cfg, seed++).total_successes);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.horizon));
  state.SetLabel(std::string(to_string(cfg.policy)));
}
BENCHMARK(BM_SlottedRun)
    ->Arg(static_cast<int>(SlottedPolicy::full_sensing_informed))
    ->Arg(static_cast<int>(SlottedPolicy::full_sensing_blind))
    ->Arg(static_cast<int>(SlottedPolicy::whittle_blind))
    ->Unit(benchmark::kMillisecond);

void BM_UnslottedMulti(benchmark::State& state) {
  const auto ch = reference();
  const std::vector<PeriodPair> per(5, PeriodPair{0.6, 0.3});
  const auto sensing = SensingModel::perfect_sensing(0.01);
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_multi(ch, per, sensing, 0.01, 1e4, seed++).throughput);
}
BENCHMARK(BM_UnslottedMulti)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
