#include <benchmark/benchmark.h>

#include "ovepg/models.hpp"
#include "ovepg/rng.hpp"

namespace {

ovepg::Matrix random_inputs(Eigen::Index n, Eigen::Index width) {
  ovepg::Rng rng({11, 0});
  ovepg::Matrix x(n, width);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  return x;
}

void BM_MlpForward(benchmark::State& state) {
  const ovepg::Model model = ovepg::init_model(ovepg::MlpSpec{{784, 64, 10}, ovepg::Activation::relu}, 1);
  const ovepg::Matrix x = random_inputs(state.range(0), 784);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(4)->Arg(32)->Arg(256);

void BM_MlpForwardBackward(benchmark::State& state) {
  const ovepg::Model model = ovepg::init_model(ovepg::MlpSpec{{784, 64, 10}, ovepg::Activation::relu}, 1);
  const ovepg::Matrix x = random_inputs(state.range(0), 784);
  const ovepg::Matrix upstream = ovepg::Matrix::Constant(state.range(0), 10, 0.1);
  for (auto _ : state) {
    const auto fwd = model.forward(x);
    benchmark::DoNotOptimize(model.backward(fwd.cache, upstream));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(4)->Arg(32);

void BM_PolyForwardBackward(benchmark::State& state) {
  const ovepg::Model model = ovepg::init_model(ovepg::PolySpec{3, 3}, 1);
  const ovepg::Matrix x = random_inputs(state.range(0), 1);
  const ovepg::Matrix upstream = ovepg::Matrix::Constant(state.range(0), 3, 0.1);
  for (auto _ : state) {
    const auto fwd = model.forward(x);
    benchmark::DoNotOptimize(model.backward(fwd.cache, upstream));
  }
}
BENCHMARK(BM_PolyForwardBackward)->Arg(4)->Arg(1500);

}  // namespace
