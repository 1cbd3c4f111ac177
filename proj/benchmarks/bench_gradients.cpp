#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "qbm/dataset.hpp"
#include "qbm/training.hpp"

static void BM_GradDklExact(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  const auto data = qbm::two_phase();
  const auto bm = bench_machine({10, 0, hidden});
  qbm::SamplerConfig cfg;
  cfg.beta = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qbm::grad_dkl(bm, data, qbm::GradientMode::Exact, cfg));
  }
}
BENCHMARK(BM_GradDklExact)->Arg(0)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_GradDklSampled(benchmark::State& state) {
  const auto data = qbm::logic_gate(qbm::Gate::And);
  const auto bm = bench_machine({3, 0, 1});
  qbm::SamplerConfig cfg;
  cfg.beta = 2.0;
  cfg.backend = qbm::Backend::Gibbs;
  cfg.num_reads = static_cast<std::size_t>(state.range(0));
  cfg.burn_in = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qbm::grad_dkl(bm, data, qbm::GradientMode::Sampled, cfg));
  }
}
BENCHMARK(BM_GradDklSampled)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_GradNcllExact(benchmark::State& state) {
  const auto data = qbm::adder2();
  const auto arch = qbm::parse_architecture("4i3o4h");
  const auto bm = bench_machine(arch.partition);
  qbm::SamplerConfig cfg;
  cfg.beta = 3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qbm::grad_ncll(bm, data, qbm::GradientMode::Exact, cfg));
  }
}
BENCHMARK(BM_GradNcllExact)->Unit(benchmark::kMillisecond);
