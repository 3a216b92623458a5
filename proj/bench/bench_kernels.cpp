// Serial reference against the OpenMP kernels for the two parallel loops:
// Monte Carlo trials and the oracle grid evaluation.

#include <benchmark/benchmark.h>

#include "wpcn/harness.hpp"
#include "wpcn/oracle.hpp"

using namespace wpcn;

namespace {

ExperimentConfig bench_config() {
  ExperimentConfig c;
  c.phy.antennas = 5;
  c.num_wds = 10;
  c.sweep_values = {2.0, 3.0};
  c.placements = 8;
  return c;
}

void BM_TrialsSerial(benchmark::State& state) {
  const auto c = bench_config();
  for (auto _ : state) benchmark::DoNotOptimize(run_trials(c, {false, 1}));
}

void BM_TrialsParallel(benchmark::State& state) {
  const auto c = bench_config();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_trials(c, {true, threads}));
}

void BM_OracleSerial(benchmark::State& state) {
  const auto inst = desk_instance(3);
  const auto pts = oracle::coarse_grid(inst.phy.antennas, 0.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        oracle::evaluate_serial(oracle::Problem::cooperative, inst.chan, inst.phy, pts, 0.0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}

void BM_OracleParallel(benchmark::State& state) {
  const auto inst = desk_instance(3);
  const auto pts = oracle::coarse_grid(inst.phy.antennas, 0.1);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        oracle::evaluate_parallel(oracle::Problem::cooperative, inst.chan, inst.phy, pts, 0.0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}

}  // namespace

BENCHMARK(BM_TrialsSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TrialsParallel)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OracleSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OracleParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
