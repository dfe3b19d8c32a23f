#include <benchmark/benchmark.h>

#include "minr/minr.hpp"

namespace {

using namespace minr;

MultiImageDataset random_dataset(std::size_t n, std::size_t side) {
  Rng rng(11);
  MultiImageDataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    ImageBuffer im(side, side);
    for (auto& v : im.data) v = float(rng.uniform(-1, 1));
    ds.images.push_back(std::move(im));
  }
  return ds;
}

NetworkShape shape64() {
  NetworkShape s;
  s.width = 64;
  return s;
}

TrainConfig steps(std::size_t n) {
  TrainConfig c;
  c.steps = n;
  c.threads = 1;
  return c;
}

// Ten optimization steps on four 64x64 images, W = 64.
void BM_SeparateSteps(benchmark::State& state) {
  const auto ds = random_dataset(4, 64);
  for (auto _ : state) benchmark::DoNotOptimize(train_separate<float>(ds, shape64(), steps(10)).report.loss_curve);
}
BENCHMARK(BM_SeparateSteps)->Unit(benchmark::kMillisecond);

void BM_MinrSteps(benchmark::State& state) {
  const auto ds = random_dataset(4, 64);
  const auto config = MinrConfig::canonical(shape64(), 4);
  for (auto _ : state) benchmark::DoNotOptimize(train_minr<float>(ds, config, steps(10)).report.loss_curve);
}
BENCHMARK(BM_MinrSteps)->Unit(benchmark::kMillisecond);

void BM_GridBaselineSteps(benchmark::State& state) {
  const auto ds = random_dataset(4, 64);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        train_concat_baseline<float>(ds, BaselineMode::Grid, shape64(), steps(10)).report.loss_curve);
}
BENCHMARK(BM_GridBaselineSteps)->Unit(benchmark::kMillisecond);

void BM_CheckpointRoundTrip(benchmark::State& state) {
  NetworkShape s;
  const auto model = init_minr<float>(MinrConfig::canonical(s, 4), 1);
  for (auto _ : state) benchmark::DoNotOptimize(decode_checkpoint(encode_checkpoint(model)));
}
BENCHMARK(BM_CheckpointRoundTrip)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
