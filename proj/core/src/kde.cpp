#include "ratio_lab/kde.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>

#include "ratio_lab/errors.hpp"

namespace ratio_lab {

double scott_bandwidth(Eigen::Index n, int dim, const Eigen::VectorXd& per_dim_std) {
  if (n < 2) throw ConfigError("scott_bandwidth: need n >= 2");
  if (per_dim_std.size() != dim) throw ShapeError("scott_bandwidth: std length != dim");
  const double mean_std = per_dim_std.mean();
  if (!(mean_std > 0.0)) throw ConfigError("scott_bandwidth: degenerate zero-variance support");
  return mean_std * std::pow(static_cast<double>(n), -1.0 / (dim + 4));
}

KdeOracle::KdeOracle(Eigen::MatrixXd support, double bandwidth)
    : support_(std::move(support)), bandwidth_(bandwidth) {
  if (support_.rows() < 2) throw ConfigError("kde: support needs at least two points");
  if (!(bandwidth_ > 0.0)) throw ConfigError("kde: bandwidth must be positive");
}

KdeOracle KdeOracle::from_samples(Eigen::MatrixXd samples) {
  if (samples.rows() < 2) throw ConfigError("kde: support needs at least two points");
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::VectorXd var =
      (samples.rowwise() - mean).array().square().colwise().sum().transpose() /
      static_cast<double>(samples.rows() - 1);
  const double h = scott_bandwidth(samples.rows(), static_cast<int>(samples.cols()),
                                   var.array().sqrt().matrix());
  return KdeOracle(std::move(samples), h);
}

Eigen::VectorXd KdeOracle::score(const Eigen::VectorXd& x, double sigma_extra) const {
  if (x.size() != support_.cols()) throw ShapeError("kde score: point dimension mismatch");
  if (sigma_extra < 0.0) throw DomainError("kde score: sigma_extra must be nonnegative");
  const double var = bandwidth_ * bandwidth_ + sigma_extra * sigma_extra;
  const Eigen::MatrixXd diffs = support_.rowwise() - x.transpose();
  const Eigen::VectorXd neg_sq = -diffs.rowwise().squaredNorm() / (2.0 * var);
  const double m = neg_sq.maxCoeff();
  Eigen::VectorXd resp = (neg_sq.array() - m).exp().matrix();
  resp /= resp.sum();
  const Eigen::VectorXd weighted_mean = support_.transpose() * resp;
  return (weighted_mean - x) / var;
}

Eigen::MatrixXd KdeOracle::score_batch(const Eigen::MatrixXd& xs, double sigma_extra) const {
  Eigen::MatrixXd out(xs.rows(), xs.cols());
  for (Eigen::Index r = 0; r < xs.rows(); ++r)
    out.row(r) = score(xs.row(r).transpose(), sigma_extra).transpose();
  return out;
}

double KdeOracle::log_density(const Eigen::VectorXd& x, double sigma_extra) const {
  if (x.size() != support_.cols()) throw ShapeError("kde log_density: point dimension mismatch");
  const double var = bandwidth_ * bandwidth_ + sigma_extra * sigma_extra;
  const int d = dim();
  const Eigen::MatrixXd diffs = support_.rowwise() - x.transpose();
  const Eigen::VectorXd neg_sq = -diffs.rowwise().squaredNorm() / (2.0 * var);
  const double m = neg_sq.maxCoeff();
  const double lse = m + std::log((neg_sq.array() - m).exp().sum());
  return lse - std::log(static_cast<double>(support_.rows())) -
         0.5 * d * std::log(2.0 * std::numbers::pi * var);
}

GaussianMixture KdeOracle::as_mixture(double sigma_extra) const {
  const double var = bandwidth_ * bandwidth_ + sigma_extra * sigma_extra;
  const int d = dim();
  std::vector<MixtureComponent> comps(static_cast<std::size_t>(support_.rows()));
  for (Eigen::Index i = 0; i < support_.rows(); ++i) {
    auto& c = comps[static_cast<std::size_t>(i)];
    c.weight = 1.0 / static_cast<double>(support_.rows());
    c.mean = support_.row(i).transpose();
    c.cov = var * Eigen::MatrixXd::Identity(d, d);
  }
  return GaussianMixture(std::move(comps));
}

void KdeOracle::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("kde save: cannot open " + path);
  const std::uint64_t n = static_cast<std::uint64_t>(support_.rows());
  const std::uint64_t d = static_cast<std::uint64_t>(support_.cols());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  out.write(reinterpret_cast<const char*>(&bandwidth_), sizeof(bandwidth_));
  out.write(reinterpret_cast<const char*>(support_.data()),
            static_cast<std::streamsize>(sizeof(double) * n * d));
  if (!out) throw ConfigError("kde save: write failed for " + path);
}

KdeOracle KdeOracle::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("kde load: cannot open " + path);
  std::uint64_t n = 0, d = 0;
  double h = 0.0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  Eigen::MatrixXd support(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  in.read(reinterpret_cast<char*>(support.data()),
          static_cast<std::streamsize>(sizeof(double) * n * d));
  if (!in) throw ConfigError("kde load: truncated file " + path);
  return KdeOracle(std::move(support), h);
}

Eigen::MatrixXd true_score_diff(const GaussianMixture& target, const KdeOracle& model_oracle,
                                const Eigen::MatrixXd& x, double t) {
  const double sigma = t;  // variance-exploding map sigma(t) = t
  return model_oracle.score_batch(x, sigma) - target.noised(sigma).score_batch(x);
}

}  // namespace ratio_lab
