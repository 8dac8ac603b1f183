#ifndef RATIO_LAB_METRICS_HPP_
#define RATIO_LAB_METRICS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ratio_lab/gaussian_mixture.hpp"
#include "ratio_lab/generator.hpp"
#include "ratio_lab/kde.hpp"
#include "ratio_lab/noise_schedule.hpp"
#include "ratio_lab/ratio_estimator.hpp"

namespace ratio_lab {

struct BiasMetrics {
  double rel_l2 = 0.0;
  double cosine = 0.0;
};

enum class PointAggregation { kStacked, kPerPointMean };

/// rel_l2 = |est - truth| / |truth| and cosine = <est,truth>/(|est||truth|),
/// both over the stacked (flattened) batch by default. Per-point means are
/// available behind the aggregation flag.
BiasMetrics bias_metrics(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
                         PointAggregation agg = PointAggregation::kStacked);

struct RbfKernel {
  double bandwidth = 1.0;  // k(a,b) = exp(-|a-b|^2 / (2 bandwidth^2))
};

/// Median pairwise distance over the pooled sample (median heuristic). For
/// large pools the median is taken over an evenly strided subset of at most
/// max_points rows.
double median_pairwise_distance(const Eigen::MatrixXd& pooled, Eigen::Index max_points = 4096);

/// Unbiased U-statistic estimate of squared MMD.
double mmd2_unbiased(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const RbfKernel& kernel);

/// Biased V-statistic (diagonal terms kept); nonnegative, used for
/// cross-checks.
double mmd2_biased(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const RbfKernel& kernel);

/// log of max(mmd2, floor); the floor keeps reports finite.
double log_mmd(double mmd2, double floor = 1e-12);

/// Mean target log-density over sample rows.
double avg_log_density(const GaussianMixture& target, const Eigen::MatrixXd& samples);

struct GenReport {
  double log_mmd = 0.0;
  double avg_log_density = 0.0;
  long n = 0;
  RbfKernel kernel;
  std::string kernel_selection = "median";

  std::string to_json_string() const;
};

/// Two-sample generator quality report against exact target samples, with a
/// median-heuristic RBF kernel chosen on the pooled sample.
GenReport evaluate_samples(const GaussianMixture& target, const Eigen::MatrixXd& target_samples,
                           const Eigen::MatrixXd& generated_samples);

struct RatioHistogram {
  Eigen::VectorXd bin_edges;  // n_bins + 1, shared by both populations
  Eigen::VectorXi count_real;
  Eigen::VectorXi count_generated;
  double mean_real = 0.0;
  double mean_generated = 0.0;
};

/// Learned-ratio histograms at the smallest noise level: both populations are
/// noised to t_min and scored by ratio_weight, then binned over shared fixed
/// edges.
RatioHistogram ratio_histogram(const RatioEstimator& est, const Eigen::MatrixXd& real,
                               const Eigen::MatrixXd& generated, double t_min, Rng& rng,
                               int n_bins = 50);

/// Writes "bin_left,bin_right,count_real,count_generated".
void write_histogram_csv(const RatioHistogram& hist, const std::string& path);

struct BiasRow {
  double noise_level = 0.0;
  std::string method;
  double rel_l2 = 0.0;
  double cosine = 0.0;
  std::uint64_t seed = 0;
};

struct BiasReport {
  std::vector<BiasRow> rows;
  int probes_per_level = 0;
};

/// Writes "noise_level,method,rel_l2,cosine,seed".
void write_bias_csv(const BiasReport& report, const std::string& path);

struct BiasMethod {
  std::string name;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, double)> score_diff;
};

struct BiasBenchmarkConfig {
  int n_levels = 10;
  int probes_per_level = 1000;
  Eigen::Index kde_samples = 10000;
  std::uint64_t seed = 0;
  NoiseSchedule schedule;
};

/// The gradient-bias benchmark: builds a KDE oracle over frozen-generator
/// samples, forms the ground-truth score difference per noise level, and
/// scores every method's field estimate at probes drawn from the noised
/// generator distribution.
BiasReport run_bias_benchmark(const GaussianMixture& target, const Generator& model,
                              const std::vector<BiasMethod>& methods,
                              const BiasBenchmarkConfig& cfg);

}  // namespace ratio_lab

#endif  // RATIO_LAB_METRICS_HPP_
