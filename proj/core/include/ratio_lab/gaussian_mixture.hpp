#ifndef RATIO_LAB_GAUSSIAN_MIXTURE_HPP_
#define RATIO_LAB_GAUSSIAN_MIXTURE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ratio_lab/rng.hpp"

namespace ratio_lab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct MixtureComponent {
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Exact Gaussian-mixture distribution with closed-form log-density, score,
/// sampler, and Gaussian-convolution closure. Immutable after construction;
/// components carry precomputed Cholesky factors and log-normalizers so score
/// and density evaluations are O(n_components * d^2).
class GaussianMixture {
 public:
  /// Validates: weights strictly positive and summing to 1 (within 1e-12),
  /// consistent dimensions, symmetric positive-definite covariances.
  explicit GaussianMixture(std::vector<MixtureComponent> components);

  int dim() const { return dim_; }
  std::size_t n_components() const { return components_.size(); }
  const std::vector<MixtureComponent>& components() const { return components_; }

  /// log sum_i w_i N(x | mu_i, Sigma_i), evaluated via log-sum-exp.
  double log_density(const Eigen::VectorXd& x) const;

  /// Gradient of log_density: responsibility-weighted sum of per-component
  /// Gaussian scores -Sigma_i^{-1} (x - mu_i).
  Eigen::VectorXd score(const Eigen::VectorXd& x) const;

  /// Row-wise score over a batch (rows are points).
  Eigen::MatrixXd score_batch(const Eigen::MatrixXd& xs) const;

  /// Row-wise log-density over a batch.
  Eigen::VectorXd log_density_batch(const Eigen::MatrixXd& xs) const;

  /// The mixture convolved with N(0, sigma^2 I): covariances become
  /// Sigma_i + sigma^2 I, weights and means unchanged.
  GaussianMixture noised(double sigma) const;

  /// n i.i.d. draws, one per row: categorical component choice, then a
  /// Gaussian draw through the component's Cholesky factor.
  Eigen::MatrixXd sample(Eigen::Index n, Rng& rng) const;

  /// JSON round-trip; double fields survive exactly.
  std::string to_json_string() const;
  static GaussianMixture from_json_string(const std::string& text);

 private:
  struct ComponentCache {
    Eigen::MatrixXd chol;     // lower-triangular L with L L^T = Sigma
    double log_norm = 0.0;    // log w - d/2 log(2 pi) - sum log L_ii
  };

  // log N(x | mu_i, Sigma_i) + log w_i
  double component_log_term(std::size_t i, const Eigen::VectorXd& x) const;

  std::vector<MixtureComponent> components_;
  std::vector<ComponentCache> cache_;
  int dim_ = 0;
};

/// Random isotropic mixture in the style of the 2D benchmark target:
/// uniform weights 1/n, means i.i.d. uniform over mean_range^2, variances
/// i.i.d. log-uniform over exp(logvar_range).
GaussianMixture make_paper_mixture(std::uint64_t seed, int n_components, Interval mean_range,
                                   Interval logvar_range, int dim = 2);

}  // namespace ratio_lab

#endif  // RATIO_LAB_GAUSSIAN_MIXTURE_HPP_
