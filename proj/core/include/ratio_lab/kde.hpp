#ifndef RATIO_LAB_KDE_HPP_
#define RATIO_LAB_KDE_HPP_

#include <Eigen/Dense>
#include <string>

#include "ratio_lab/gaussian_mixture.hpp"

namespace ratio_lab {

/// Scott's rule for an isotropic Gaussian KDE: mean per-dimension standard
/// deviation times n^{-1/(d+4)}.
double scott_bandwidth(Eigen::Index n, int dim, const Eigen::VectorXd& per_dim_std);

/// Gaussian kernel density oracle over a fixed support sample. The score of
/// the sigma-noised KDE is evaluated by bandwidth inflation: the density is a
/// uniform-weight Gaussian mixture centered at the support points with
/// isotropic covariance (h^2 + sigma^2) I, which is exactly the KDE convolved
/// with N(0, sigma^2 I).
class KdeOracle {
 public:
  KdeOracle(Eigen::MatrixXd support, double bandwidth);

  /// Support sampled from the distribution of interest; Scott bandwidth.
  static KdeOracle from_samples(Eigen::MatrixXd samples);

  const Eigen::MatrixXd& support() const { return support_; }
  double bandwidth() const { return bandwidth_; }
  int dim() const { return static_cast<int>(support_.cols()); }

  /// Score of the noised KDE density at one point.
  Eigen::VectorXd score(const Eigen::VectorXd& x, double sigma_extra) const;

  /// Row-wise scores for a batch of points.
  Eigen::MatrixXd score_batch(const Eigen::MatrixXd& xs, double sigma_extra) const;

  /// Log-density of the noised KDE (used by finite-difference checks).
  double log_density(const Eigen::VectorXd& x, double sigma_extra) const;

  /// The explicit mixture this oracle's score belongs to: uniform weights
  /// over support points, covariance (h^2 + sigma^2) I.
  GaussianMixture as_mixture(double sigma_extra) const;

  /// Binary persistence: header (n, d, bandwidth), then column-major doubles.
  void save(const std::string& path) const;
  static KdeOracle load(const std::string& path);

 private:
  Eigen::MatrixXd support_;  // n x d
  double bandwidth_ = 0.0;
};

/// Ground-truth score difference for the bias benchmark:
/// KDE score of the model distribution minus the exact noised-target score.
Eigen::MatrixXd true_score_diff(const GaussianMixture& target, const KdeOracle& model_oracle,
                                const Eigen::MatrixXd& x, double t);

}  // namespace ratio_lab

#endif  // RATIO_LAB_KDE_HPP_
