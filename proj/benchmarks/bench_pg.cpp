#include <benchmark/benchmark.h>

#include <vector>

#include "ovepg/pg.hpp"

namespace {

void BM_SamplePgOne(benchmark::State& state) {
  const ovepg::TruncationPolicy policy{static_cast<std::size_t>(state.range(0)), true};
  ovepg::Rng rng({1, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(ovepg::sample_pg_one(1.0, 1.5, policy, rng));
  }
}
BENCHMARK(BM_SamplePgOne)->Arg(20)->Arg(200);

void BM_SamplePgBatch(benchmark::State& state) {
  const std::vector<double> tilts(static_cast<std::size_t>(state.range(0)), 0.7);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ovepg::sample_pg(1.0, tilts, {}, {3, stream++}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePgBatch)->Arg(90)->Arg(1000);

void BM_PgMean(benchmark::State& state) {
  double c = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ovepg::pg_mean(1.0, c));
    c += 1e-3;
  }
}
BENCHMARK(BM_PgMean);

}  // namespace
