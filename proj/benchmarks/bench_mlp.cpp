#include <benchmark/benchmark.h>

#include "ratio_lab/mlp.hpp"

using namespace ratio_lab;

namespace {

void BM_MlpForward(benchmark::State& state) {
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  const int hidden = static_cast<int>(state.range(1));
  Rng rng(1);
  const Mlp net = Mlp::he_init({3, hidden, hidden, hidden, 1}, rng);
  const Eigen::MatrixXd x = rng.normal_matrix(batch, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(x));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForward)->Args({1024, 400})->Args({1024, 128})->Args({256, 64});

void BM_MlpVjp(benchmark::State& state) {
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  const int hidden = static_cast<int>(state.range(1));
  Rng rng(2);
  const Mlp net = Mlp::he_init({3, hidden, hidden, hidden, 1}, rng);
  const Eigen::MatrixXd x = rng.normal_matrix(batch, 3);
  const Eigen::MatrixXd upstream = rng.normal_matrix(batch, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.vjp(x, upstream, true, true));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpVjp)->Args({1024, 400})->Args({1024, 128})->Args({256, 64});

void BM_MlpInputGrad(benchmark::State& state) {
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  Rng rng(3);
  const Mlp net = Mlp::he_init({3, 400, 400, 400, 1}, rng);
  const Eigen::MatrixXd x = rng.normal_matrix(batch, 3);
  const Eigen::MatrixXd upstream = Eigen::MatrixXd::Constant(batch, 1, -1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.input_grad(x, upstream));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpInputGrad)->Arg(1024);

}  // namespace
