#include <benchmark/benchmark.h>

#include "fpp/net.hpp"
#include "fpp/ops.hpp"
#include "fpp/rng.hpp"
#include "fpp/selfsup.hpp"

using namespace fpp;
using namespace fpp::nn;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed,
                     bool requires_grad = false) {
  Rng rng(seed);
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

}  // namespace

static void BM_Conv2dForward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Tensor x = random_tensor({8, side, side}, 1);
  const Tensor w = random_tensor({16, 8, 3, 3}, 2);
  const Tensor b = random_tensor({16}, 3);
  for (auto _ : state) {
    Tensor y = conv2d(x, w, b);
    benchmark::DoNotOptimize(y.data().data());
  }
  state.SetItemsProcessed(state.iterations() * side * side * 16 * 8 * 9);
}
BENCHMARK(BM_Conv2dForward)->Arg(64)->Arg(128);

static void BM_NetworkForward(benchmark::State& state) {
  NetworkConfig config;
  const Network net(config, 7);
  const Tensor input = random_tensor({1, 64, 64}, 4);
  for (auto _ : state) {
    Tensor k_o = net.forward(input);
    benchmark::DoNotOptimize(k_o.data().data());
  }
}
BENCHMARK(BM_NetworkForward);

static void BM_NetworkTrainStep(benchmark::State& state) {
  NetworkConfig config;
  Network net(config, 7);
  const Tensor input = random_tensor({1, 64, 64}, 4);
  const Grid target(64, 64, 0.5);
  const Mask mask(64, 64, 1);
  for (auto _ : state) {
    for (Tensor& p : net.parameters()) p.grad().clear();
    Tensor loss = masked_l1_mean(net.forward(input), target, mask, false);
    backward(loss);
    benchmark::DoNotOptimize(net.parameters()[0].grad().data());
  }
}
BENCHMARK(BM_NetworkTrainStep);

static void BM_CircularBilinearSample(benchmark::State& state) {
  SystemGeometry geom;
  geom.period_number = 64;
  const selfsup::ProjectorTables tables = selfsup::ProjectorTables::build(geom);
  Rng rng(5);
  Tensor x_p = Tensor::zeros({1, 128, 128});
  for (double& v : x_p.data()) v = rng.uniform(0.0, 683.0);
  const Grid y_p(128, 128, 31.7);
  const Mask mask(128, 128, 1);
  for (auto _ : state) {
    Tensor s = circular_bilinear_sample(tables.phase_high, x_p, y_p, mask);
    benchmark::DoNotOptimize(s.data().data());
  }
  state.SetItemsProcessed(state.iterations() * 128 * 128);
}
BENCHMARK(BM_CircularBilinearSample);

BENCHMARK_MAIN();
