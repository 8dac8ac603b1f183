#include "ratio_lab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "ratio_lab/errors.hpp"
#include "ratio_lab/format.hpp"

namespace ratio_lab {

BiasMetrics bias_metrics(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
                         PointAggregation agg) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw ShapeError("bias_metrics: estimate/truth shapes differ");
  const double truth_norm = truth.norm();
  if (!(truth_norm > 0.0)) throw EvalError("bias_metrics: zero-norm truth is undefined");

  BiasMetrics out;
  if (agg == PointAggregation::kStacked) {
    out.rel_l2 = (estimate - truth).norm() / truth_norm;
    const double est_norm = estimate.norm();
    out.cosine = est_norm > 0.0
                     ? (estimate.array() * truth.array()).sum() / (est_norm * truth_norm)
                     : 0.0;
    return out;
  }

  double rel_sum = 0.0, cos_sum = 0.0;
  for (Eigen::Index r = 0; r < truth.rows(); ++r) {
    const double tn = truth.row(r).norm();
    if (!(tn > 0.0)) throw EvalError("bias_metrics: zero-norm truth row is undefined");
    rel_sum += (estimate.row(r) - truth.row(r)).norm() / tn;
    const double en = estimate.row(r).norm();
    cos_sum += en > 0.0 ? estimate.row(r).dot(truth.row(r)) / (en * tn) : 0.0;
  }
  out.rel_l2 = rel_sum / static_cast<double>(truth.rows());
  out.cosine = cos_sum / static_cast<double>(truth.rows());
  return out;
}

double median_pairwise_distance(const Eigen::MatrixXd& pooled, Eigen::Index max_points) {
  if (pooled.rows() < 2) throw ConfigError("median_pairwise_distance: need at least two rows");
  const Eigen::Index stride = std::max<Eigen::Index>(1, pooled.rows() / max_points);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < pooled.rows(); i += stride) idx.push_back(i);
  std::vector<double> dists;
  dists.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      dists.push_back((pooled.row(idx[a]) - pooled.row(idx[b])).norm());
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  return *mid;
}

namespace {

// Sum of kernel values over all pairs of rows between a and b, tiled to keep
// memory bounded; fixed traversal order for determinism.
double kernel_pair_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
  constexpr Eigen::Index kTile = 1024;
  double total = 0.0;
  for (Eigen::Index i0 = 0; i0 < a.rows(); i0 += kTile) {
    const Eigen::Index ilen = std::min(kTile, a.rows() - i0);
    const Eigen::MatrixXd ablk = a.middleRows(i0, ilen);
    const Eigen::VectorXd asq = ablk.rowwise().squaredNorm();
    for (Eigen::Index j0 = 0; j0 < b.rows(); j0 += kTile) {
      const Eigen::Index jlen = std::min(kTile, b.rows() - j0);
      const Eigen::MatrixXd bblk = b.middleRows(j0, jlen);
      const Eigen::VectorXd bsq = bblk.rowwise().squaredNorm();
      Eigen::MatrixXd d2 = -2.0 * (ablk * bblk.transpose());
      d2.colwise() += asq;
      d2.rowwise() += bsq.transpose();
      total += (d2.array().max(0.0) * (-gamma)).exp().sum();
    }
  }
  return total;
}

}  // namespace

double mmd2_unbiased(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const RbfKernel& kernel) {
  if (x.rows() < 2 || y.rows() < 2) throw ConfigError("mmd2_unbiased: need two points per side");
  const double gamma = 1.0 / (2.0 * kernel.bandwidth * kernel.bandwidth);
  const double m = static_cast<double>(x.rows());
  const double n = static_cast<double>(y.rows());
  const double sum_xx = kernel_pair_sum(x, x, gamma) - m;  // drop unit diagonal
  const double sum_yy = kernel_pair_sum(y, y, gamma) - n;
  const double sum_xy = kernel_pair_sum(x, y, gamma);
  return sum_xx / (m * (m - 1.0)) + sum_yy / (n * (n - 1.0)) - 2.0 * sum_xy / (m * n);
}

double mmd2_biased(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const RbfKernel& kernel) {
  if (x.rows() < 1 || y.rows() < 1) throw ConfigError("mmd2_biased: need nonempty batches");
  const double gamma = 1.0 / (2.0 * kernel.bandwidth * kernel.bandwidth);
  const double m = static_cast<double>(x.rows());
  const double n = static_cast<double>(y.rows());
  return kernel_pair_sum(x, x, gamma) / (m * m) + kernel_pair_sum(y, y, gamma) / (n * n) -
         2.0 * kernel_pair_sum(x, y, gamma) / (m * n);
}

double log_mmd(double mmd2, double floor) { return std::log(std::max(mmd2, floor)); }

double avg_log_density(const GaussianMixture& target, const Eigen::MatrixXd& samples) {
  if (samples.rows() < 1) throw ConfigError("avg_log_density: empty sample batch");
  return target.log_density_batch(samples).mean();
}

std::string GenReport::to_json_string() const {
  nlohmann::json doc;
  doc["log_mmd"] = log_mmd;
  doc["avg_log_density"] = avg_log_density;
  doc["n"] = n;
  doc["kernel"] = {{"type", "rbf"}, {"bandwidth", kernel.bandwidth}, {"selection", kernel_selection}};
  return doc.dump(2);
}

GenReport evaluate_samples(const GaussianMixture& target, const Eigen::MatrixXd& target_samples,
                           const Eigen::MatrixXd& generated_samples) {
  Eigen::MatrixXd pooled(target_samples.rows() + generated_samples.rows(), target_samples.cols());
  pooled.topRows(target_samples.rows()) = target_samples;
  pooled.bottomRows(generated_samples.rows()) = generated_samples;

  GenReport report;
  report.kernel.bandwidth = median_pairwise_distance(pooled);
  report.kernel_selection = "median";
  report.log_mmd = log_mmd(mmd2_unbiased(generated_samples, target_samples, report.kernel));
  report.avg_log_density = avg_log_density(target, generated_samples);
  report.n = static_cast<long>(generated_samples.rows());
  return report;
}

RatioHistogram ratio_histogram(const RatioEstimator& est, const Eigen::MatrixXd& real,
                               const Eigen::MatrixXd& generated, double t_min, Rng& rng,
                               int n_bins) {
  if (n_bins < 1) throw ConfigError("ratio_histogram: need at least one bin");
  const double sigma = est.schedule().sigma(t_min);
  const Eigen::MatrixXd real_noised = real + sigma * rng.normal_matrix(real.rows(), real.cols());
  const Eigen::MatrixXd gen_noised =
      generated + sigma * rng.normal_matrix(generated.rows(), generated.cols());
  const Eigen::VectorXd w_real = est.ratio_weights(real_noised, t_min);
  const Eigen::VectorXd w_gen = est.ratio_weights(gen_noised, t_min);

  double lo = std::min(w_real.minCoeff(), w_gen.minCoeff());
  double hi = std::max(w_real.maxCoeff(), w_gen.maxCoeff());
  if (hi - lo < 1e-12) {  // degenerate spread (e.g. untrained classifier)
    lo -= 0.5;
    hi += 0.5;
  }

  RatioHistogram hist;
  hist.bin_edges.resize(n_bins + 1);
  for (int i = 0; i <= n_bins; ++i)
    hist.bin_edges[i] = lo + (hi - lo) * static_cast<double>(i) / n_bins;
  hist.count_real = Eigen::VectorXi::Zero(n_bins);
  hist.count_generated = Eigen::VectorXi::Zero(n_bins);
  auto bin_of = [&](double v) {
    int b = static_cast<int>((v - lo) / (hi - lo) * n_bins);
    return std::clamp(b, 0, n_bins - 1);
  };
  for (Eigen::Index i = 0; i < w_real.size(); ++i) ++hist.count_real[bin_of(w_real[i])];
  for (Eigen::Index i = 0; i < w_gen.size(); ++i) ++hist.count_generated[bin_of(w_gen[i])];
  hist.mean_real = w_real.mean();
  hist.mean_generated = w_gen.mean();
  return hist;
}

void write_histogram_csv(const RatioHistogram& hist, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_histogram_csv: cannot open " + path);
  out << "bin_left,bin_right,count_real,count_generated\n";
  for (Eigen::Index b = 0; b + 1 < hist.bin_edges.size(); ++b) {
    out << format_double(hist.bin_edges[b]) << ',' << format_double(hist.bin_edges[b + 1]) << ','
        << hist.count_real[b] << ',' << hist.count_generated[b] << '\n';
  }
}

void write_bias_csv(const BiasReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_bias_csv: cannot open " + path);
  out << "noise_level,method,rel_l2,cosine,seed\n";
  for (const auto& row : report.rows) {
    out << format_double(row.noise_level) << ',' << row.method << ','
        << format_double(row.rel_l2) << ',' << format_double(row.cosine) << ',' << row.seed
        << '\n';
  }
}

BiasReport run_bias_benchmark(const GaussianMixture& target, const Generator& model,
                              const std::vector<BiasMethod>& methods,
                              const BiasBenchmarkConfig& cfg) {
  Rng rng(substream_seed(cfg.seed, "bias-bench"));
  const KdeOracle oracle = KdeOracle::from_samples(model.generate(cfg.kde_samples, rng));
  const std::vector<double> levels = cfg.schedule.eval_grid(cfg.n_levels);

  BiasReport report;
  report.probes_per_level = cfg.probes_per_level;
  for (const double t : levels) {
    const Eigen::MatrixXd x0 = model.generate(cfg.probes_per_level, rng);
    const Eigen::MatrixXd probes =
        x0 + cfg.schedule.sigma(t) * rng.normal_matrix(x0.rows(), x0.cols());
    const Eigen::MatrixXd truth = true_score_diff(target, oracle, probes, t);
    for (const auto& method : methods) {
      const BiasMetrics m = bias_metrics(method.score_diff(probes, t), truth);
      report.rows.push_back({t, method.name, m.rel_l2, m.cosine, cfg.seed});
    }
  }
  return report;
}

}  // namespace ratio_lab
