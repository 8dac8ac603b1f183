#ifndef RATIO_LAB_NOISE_SCHEDULE_HPP_
#define RATIO_LAB_NOISE_SCHEDULE_HPP_

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ratio_lab/rng.hpp"

namespace ratio_lab {

/// Variance-exploding noise schedule with sigma(t) = t, power-law time
/// sampling and sigma^2 loss weighting. Pure value type.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;
  NoiseSchedule(double t_min, double t_max, double power);

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  double power() const { return power_; }

  double sigma(double t) const { return t; }

  /// Per-time loss weight w(t) = sigma(t)^2.
  double weight(double t) const { return sigma(t) * sigma(t); }

  /// t = t_min + u^power (t_max - t_min) with u ~ U(0,1).
  double sample_time(Rng& rng) const { return time_from_uniform(rng.uniform()); }

  /// Deterministic form of sample_time for tests.
  double time_from_uniform(double u) const;

  /// n geometrically spaced levels from t_min to t_max inclusive.
  std::vector<double> eval_grid(int n) const;

  /// Forward perturbation x_t = x_0 + sigma(t) eps, eps ~ N(0, I); returns
  /// (x_t, eps) so DSM can form its regression target.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> perturb(const Eigen::MatrixXd& x0, double t,
                                                      Rng& rng) const;

  /// Test hook: perturbation with caller-supplied noise.
  Eigen::MatrixXd perturb_with(const Eigen::MatrixXd& x0, double t,
                               const Eigen::MatrixXd& eps) const;

 private:
  double t_min_ = 0.1;
  double t_max_ = 20.0;
  double power_ = 1.5;
};

/// Network time conditioning: noisy inputs carry log sigma(t) as an extra
/// trailing column, which equalizes the [0.1, 20] range.
double time_feature(const NoiseSchedule& schedule, double t);

/// Builds the (x, log sigma(t)) input block for time-conditioned networks.
Eigen::MatrixXd with_time_feature(const Eigen::MatrixXd& x, const NoiseSchedule& schedule, double t);

}  // namespace ratio_lab

#endif  // RATIO_LAB_NOISE_SCHEDULE_HPP_
