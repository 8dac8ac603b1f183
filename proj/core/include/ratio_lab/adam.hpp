#ifndef RATIO_LAB_ADAM_HPP_
#define RATIO_LAB_ADAM_HPP_

#include <Eigen/Dense>

namespace ratio_lab {

/// Adam optimizer state with standard bias correction. Fails fast on
/// non-finite gradients instead of clipping, so divergence is never masked.
struct AdamState {
  long step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Eigen::VectorXd m;
  Eigen::VectorXd v;

  AdamState() = default;
  AdamState(Eigen::Index n_params, double learning_rate);

  /// One Adam update in place. Throws DivergenceError on non-finite gradient
  /// entries, ShapeError when lengths disagree.
  void apply(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
};

}  // namespace ratio_lab

#endif  // RATIO_LAB_ADAM_HPP_
