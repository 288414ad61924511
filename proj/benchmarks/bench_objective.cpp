#include <benchmark/benchmark.h>

#include <vector>

#include "ovepg/objective.hpp"
#include "ovepg/rng.hpp"

namespace {

struct Batch {
  ovepg::Logits mu_theta;
  ovepg::Logits mu;
  ovepg::OneHotLabels labels;
};

Batch make_batch(std::size_t n, std::size_t classes) {
  ovepg::Rng rng({7, 0});
  ovepg::Logits a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(classes));
  ovepg::Logits b(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a.data()[i] = rng.normal();
    b.data()[i] = rng.normal();
  }
  std::vector<std::size_t> y(n);
  for (auto& v : y) v = rng.below(classes);
  return {a, b, ovepg::OneHotLabels(y, classes)};
}

// Arguments: batch size, class count, objective.
void BM_ElboStep(benchmark::State& state) {
  const Batch batch = make_batch(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  ovepg::ObjectiveConfig cfg;
  cfg.objective = static_cast<ovepg::Objective>(state.range(2));
  std::uint64_t step = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ovepg::elbo_step(batch.mu_theta, batch.mu, batch.labels, cfg, {5, step++}));
  }
  state.SetLabel(std::string(ovepg::to_string(cfg.objective)));
}
BENCHMARK(BM_ElboStep)->ArgsProduct({{4, 32}, {3, 10}, {0, 1, 2}});

void BM_ElboStepSampledOmega(benchmark::State& state) {
  const Batch batch = make_batch(4, 10);
  ovepg::ObjectiveConfig cfg;
  cfg.omega_mode = ovepg::OmegaMode::sample;
  cfg.chains = static_cast<std::size_t>(state.range(0));
  std::uint64_t step = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ovepg::elbo_step(batch.mu_theta, batch.mu, batch.labels, cfg, {5, step++}));
  }
}
BENCHMARK(BM_ElboStepSampledOmega)->Arg(1)->Arg(4)->Arg(16);

}  // namespace
