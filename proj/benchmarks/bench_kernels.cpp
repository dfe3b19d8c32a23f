#include <benchmark/benchmark.h>

#include "minr/minr.hpp"

namespace {

using namespace minr;

Tensor2Df random_tensor(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Tensor2Df t(r, c);
  for (auto& v : t.data()) v = float(rng.uniform(-1, 1));
  return t;
}

void BM_LinearForward(benchmark::State& state) {
  const std::size_t w = state.range(0), batch = state.range(1);
  LinearLayer<float> layer(w, w);
  layer.weight = random_tensor(w, w, 1);
  const auto x = random_tensor(w, batch, 2);
  Tensor2Df y;
  for (auto _ : state) {
    linear_forward_into(layer, x, y);
    benchmark::DoNotOptimize(y.data().data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(batch));
}
BENCHMARK(BM_LinearForward)->Args({64, 4096})->Args({256, 4096})->Args({64, 16384});

void BM_LinearBackward(benchmark::State& state) {
  const std::size_t w = state.range(0), batch = state.range(1);
  LinearLayer<float> layer(w, w);
  layer.weight = random_tensor(w, w, 1);
  const auto x = random_tensor(w, batch, 2);
  const auto up = random_tensor(w, batch, 3);
  Tensor2Df gi;
  for (auto _ : state) {
    linear_backward_into(layer, x, up, layer.grad_weight, layer.grad_bias, &gi);
    benchmark::DoNotOptimize(gi.data().data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(batch));
}
BENCHMARK(BM_LinearBackward)->Args({64, 4096})->Args({256, 4096});

void BM_Activation(benchmark::State& state) {
  const ActivationKind kinds[] = {Sine{}, Gauss{}, Wire{}, Finer{}};
  const auto& kind = kinds[state.range(0)];
  const auto x = random_tensor(64, 4096, 4);
  Tensor2Df y;
  for (auto _ : state) {
    activate_into(kind, x, y);
    benchmark::DoNotOptimize(y.data().data());
  }
  state.SetLabel(activation_name(kind));
  state.SetItemsProcessed(state.iterations() * std::int64_t(x.size()));
}
BENCHMARK(BM_Activation)->DenseRange(0, 3);

void BM_ActivationBackward(benchmark::State& state) {
  const auto pre = random_tensor(64, 4096, 5);
  auto grad = random_tensor(64, 4096, 6);
  for (auto _ : state) {
    scale_by_derivative(ActivationKind{Sine{}}, pre, grad);
    benchmark::DoNotOptimize(grad.data().data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(pre.size()));
}
BENCHMARK(BM_ActivationBackward);

void BM_ActivationWithDerivative(benchmark::State& state) {
  const ActivationKind kinds[] = {Sine{}, Gauss{}, Wire{}, Finer{}};
  const auto& kind = kinds[state.range(0)];
  const auto x = random_tensor(64, 4096, 4);
  Tensor2Df y, d;
  for (auto _ : state) {
    activate_with_derivative(kind, x, y, d);
    benchmark::DoNotOptimize(d.data().data());
  }
  state.SetLabel(activation_name(kind));
  state.SetItemsProcessed(state.iterations() * std::int64_t(x.size()));
}
BENCHMARK(BM_ActivationWithDerivative)->DenseRange(0, 3);

void BM_AdamStep(benchmark::State& state) {
  auto p = random_tensor(256, 256, 7);
  const auto g = random_tensor(256, 256, 8);
  AdamState<float> adam;
  Tensor2Df* params[] = {&p};
  const Tensor2Df* grads[] = {&g};
  const TrainConfig config;
  for (auto _ : state) adam_step<float>(params, grads, adam, config);
  state.SetItemsProcessed(state.iterations() * std::int64_t(p.size()));
}
BENCHMARK(BM_AdamStep);

}  // namespace
