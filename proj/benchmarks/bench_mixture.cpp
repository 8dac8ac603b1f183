#include <benchmark/benchmark.h>

#include <cmath>

#include "ratio_lab/gaussian_mixture.hpp"

using namespace ratio_lab;

namespace {

GaussianMixture bench_mixture() {
  return make_paper_mixture(7, 40, {-40.0, 40.0}, {std::log(0.3), std::log(3.0)});
}

void BM_MixtureLogDensity(benchmark::State& state) {
  const GaussianMixture m = bench_mixture();
  Rng rng(1);
  const Eigen::MatrixXd xs = m.sample(1000, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.log_density_batch(xs));
  }
  state.SetItemsProcessed(state.iterations() * xs.rows());
}
BENCHMARK(BM_MixtureLogDensity);

void BM_MixtureScore(benchmark::State& state) {
  const GaussianMixture m = bench_mixture().noised(1.0);
  Rng rng(2);
  const Eigen::MatrixXd xs = m.sample(1000, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.score_batch(xs));
  }
  state.SetItemsProcessed(state.iterations() * xs.rows());
}
BENCHMARK(BM_MixtureScore);

void BM_MixtureSample(benchmark::State& state) {
  const GaussianMixture m = bench_mixture();
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.sample(1024, rng));
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_MixtureSample);

}  // namespace
