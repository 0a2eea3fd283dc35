// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <array>
#include <random>

#include "nre/core/network.hpp"
#include "nre/similarity/similarity.hpp"
#include "nre/train/loss.hpp"

namespace {

using namespace nre;

Tensor<float> uniform(Shape shape, std::uint64_t seed) {
  Tensor<float> t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

Network<float> mlp(std::span<const std::size_t> dims, std::uint64_t seed) {
  auto net = Network<float>::mlp(dims, LayerKind::relu, LayerKind::relu);
  net.init_glorot(seed);
  return net;
}

constexpr std::array<std::size_t, 4> kEncoder{784, 256, 64, 32};
constexpr std::array<std::size_t, 4> kDecoder{32, 64, 256, 784};

void BM_ForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  auto enc = mlp(kEncoder, 1);
  const auto x = uniform({batch, 784}, 2);
  for (auto _ : state) {
    auto z = enc.forward(x);
    auto g = enc.backward(Tensor<float>(z.shape(), 1.0f));
    benchmark::DoNotOptimize(g.params.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(128)->Arg(512);

void BM_NreLoss(benchmark::State& state) {
  const std::size_t batch = 64, t = static_cast<std::size_t>(state.range(0));
  auto enc = mlp(kEncoder, 1);
  auto dec = Network<float>::mlp(kDecoder, LayerKind::relu, LayerKind::sigmoid);
  dec.init_glorot(3);
  auto sim = mlp(kEncoder, 4);
  sim.freeze();
  const auto x = uniform({batch, 784}, 5);
  const auto near = uniform({batch * t, 32}, 6);
  const auto far = uniform({batch * t, 32}, 7);
  const train::LossWeights w(0.5, 0.2, 0.3);
  for (auto _ : state) {
    auto r = train::nre_loss(x, enc, dec, sim, near, far, t, w);
    benchmark::DoNotOptimize(r.loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_NreLoss)->Arg(1)->Arg(5)->Arg(20);

similarity::LatentTable table(std::size_t rows, std::size_t dim) {
  return similarity::LatentTable(uniform({rows, dim}, 11), "bench", 0);
}

void BM_KMeans(benchmark::State& state) {
  const auto tab = table(static_cast<std::size_t>(state.range(0)), 32);
  const auto k = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto m = similarity::kmeans(tab, k, 0);
    benchmark::DoNotOptimize(m.iterations);
  }
}
BENCHMARK(BM_KMeans)->Args({10000, 10})->Args({10000, 50})->Unit(benchmark::kMillisecond);

void BM_Mine(benchmark::State& state) {
  const auto tab = table(60000, 32);
  const auto clusters = state.range(0) == 1 ? similarity::single_cluster(tab) : similarity::kmeans(tab, 50, 0);
  auto rng = make_rng(0);
  std::size_t q = 0;
  for (auto _ : state) {
    auto r = similarity::mine(tab.row(q), tab, clusters, 10, rng, q);
    benchmark::DoNotOptimize(r.neighbors.data());
    q = (q + 7919) % tab.size();
  }
}
BENCHMARK(BM_Mine)->Arg(1)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
