#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "qbm/dataset.hpp"
#include "qbm/energy_table.hpp"
#include "qbm/metrics.hpp"

static void BM_EnergyTable(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto bm = bench_machine({n, 0, 0});
  for (auto _ : state) {
    qbm::EnergyTable table(bm);
    benchmark::DoNotOptimize(table.min());
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_EnergyTable)->DenseRange(8, 18, 2);

static void BM_Boltzmann(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const qbm::EnergyTable table(bench_machine({n, 0, 0}));
  for (auto _ : state) benchmark::DoNotOptimize(table.boltzmann(2.0));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_Boltzmann)->DenseRange(8, 18, 2);

static void BM_KlBetaSweep(benchmark::State& state) {
  const auto data = qbm::two_phase();
  const qbm::ExactModel model(bench_machine({10, 0, 8}));
  const auto grid = qbm::log_beta_grid(0.1, 100.0, 60);
  for (auto _ : state) {
    for (double b : grid) benchmark::DoNotOptimize(model.kl(data, b));
  }
}
BENCHMARK(BM_KlBetaSweep)->Unit(benchmark::kMillisecond);
