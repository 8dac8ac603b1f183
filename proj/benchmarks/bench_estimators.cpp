#include <benchmark/benchmark.h>

#include <cmath>

#include "ratio_lab/kde.hpp"
#include "ratio_lab/metrics.hpp"
#include "ratio_lab/ratio_estimator.hpp"

using namespace ratio_lab;

namespace {

const NoiseSchedule kSchedule(0.1, 20.0, 1.5);

void BM_ClassifierStep(benchmark::State& state) {
  const auto half = static_cast<Eigen::Index>(state.range(0)) / 2;
  Rng init(1);
  RatioEstimator est(2, {400, 400, 400}, 1e-4, kSchedule, init);
  Rng rng(2);
  const Eigen::MatrixXd xd = rng.normal_matrix(half, 2);
  const Eigen::MatrixXd xm = 1.0 + rng.normal_matrix(half, 2).array();
  for (auto _ : state) {
    benchmark::DoNotOptimize(est.train_step(xd, xm, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * 2 * half);
}
BENCHMARK(BM_ClassifierStep)->Arg(1024);

void BM_ScoreDiffDikl(benchmark::State& state) {
  Rng init(3);
  const RatioEstimator est(2, {400, 400, 400}, 1e-4, kSchedule, init);
  Rng rng(4);
  const Eigen::MatrixXd x = rng.normal_matrix(1024, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(est.score_diff_dikl(x, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_ScoreDiffDikl);

void BM_KdeScoreBatch(benchmark::State& state) {
  const GaussianMixture m = make_paper_mixture(5, 40, {-40.0, 40.0}, {std::log(0.3), std::log(3.0)});
  Rng rng(6);
  const KdeOracle oracle = KdeOracle::from_samples(m.sample(10000, rng));
  const Eigen::MatrixXd probes = m.sample(1000, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle.score_batch(probes, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * probes.rows());
}
BENCHMARK(BM_KdeScoreBatch);

void BM_MmdUnbiased(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Rng rng(7);
  const Eigen::MatrixXd x = rng.normal_matrix(n, 2);
  const Eigen::MatrixXd y = rng.normal_matrix(n, 2);
  const RbfKernel kernel{1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mmd2_unbiased(x, y, kernel));
  }
}
BENCHMARK(BM_MmdUnbiased)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
