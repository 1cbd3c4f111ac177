#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "qbm/sampler.hpp"

static void BM_GibbsSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto bm = bench_machine({n, 0, 0});
  qbm::SamplerConfig cfg;
  cfg.beta = 2.0;
  cfg.num_reads = 1000;
  cfg.burn_in = 100;
  cfg.thinning = 5;
  for (auto _ : state) benchmark::DoNotOptimize(qbm::gibbs_sample(bm, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.num_reads));
}
BENCHMARK(BM_GibbsSample)->Arg(4)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_ExactSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto bm = bench_machine({n, 0, 0});
  qbm::SamplerConfig cfg;
  cfg.beta = 2.0;
  cfg.num_reads = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(qbm::exact_sample(bm, cfg));
}
BENCHMARK(BM_ExactSample)->DenseRange(4, 16, 4)->Unit(benchmark::kMillisecond);
