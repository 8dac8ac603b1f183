#include "ratio_lab/noise_schedule.hpp"

#include <cmath>

#include "ratio_lab/errors.hpp"

namespace ratio_lab {

NoiseSchedule::NoiseSchedule(double t_min, double t_max, double power)
    : t_min_(t_min), t_max_(t_max), power_(power) {
  if (!(0.0 < t_min_ && t_min_ < t_max_))
    throw ConfigError("schedule: need 0 < t_min < t_max");
  if (!(power_ > 0.0)) throw ConfigError("schedule: power must be positive");
}

double NoiseSchedule::time_from_uniform(double u) const {
  return t_min_ + std::pow(u, power_) * (t_max_ - t_min_);
}

std::vector<double> NoiseSchedule::eval_grid(int n) const {
  if (n < 2) throw ConfigError("eval_grid: need n >= 2");
  std::vector<double> levels(static_cast<std::size_t>(n));
  const double log_ratio = std::log(t_max_ / t_min_);
  for (int i = 0; i < n; ++i) {
    levels[static_cast<std::size_t>(i)] = t_min_ * std::exp(log_ratio * i / (n - 1));
  }
  levels.back() = t_max_;  // endpoint exact
  return levels;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> NoiseSchedule::perturb(const Eigen::MatrixXd& x0,
                                                                   double t, Rng& rng) const {
  Eigen::MatrixXd eps = rng.normal_matrix(x0.rows(), x0.cols());
  return {x0 + sigma(t) * eps, std::move(eps)};
}

Eigen::MatrixXd NoiseSchedule::perturb_with(const Eigen::MatrixXd& x0, double t,
                                            const Eigen::MatrixXd& eps) const {
  if (eps.rows() != x0.rows() || eps.cols() != x0.cols())
    throw ShapeError("perturb_with: eps shape mismatch");
  return x0 + sigma(t) * eps;
}

double time_feature(const NoiseSchedule& schedule, double t) { return std::log(schedule.sigma(t)); }

Eigen::MatrixXd with_time_feature(const Eigen::MatrixXd& x, const NoiseSchedule& schedule,
                                  double t) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setConstant(time_feature(schedule, t));
  return out;
}

}  // namespace ratio_lab
