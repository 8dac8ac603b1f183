#include "ratio_lab/adam.hpp"

#include <cmath>

#include "ratio_lab/errors.hpp"

namespace ratio_lab {

AdamState::AdamState(Eigen::Index n_params, double learning_rate)
    : lr(learning_rate), m(Eigen::VectorXd::Zero(n_params)), v(Eigen::VectorXd::Zero(n_params)) {}

void AdamState::apply(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != m.size() || grad.size() != m.size())
    throw ShapeError("adam: parameter/gradient/moment lengths disagree");
  if (!grad.allFinite()) throw DivergenceError("adam: non-finite gradient entries");

  ++step;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double m_corr = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double v_corr = 1.0 - std::pow(beta2, static_cast<double>(step));
  params.array() -=
      lr * (m.array() / m_corr) / ((v.array() / v_corr).sqrt() + eps);
  if (!params.allFinite()) throw DivergenceError("adam: non-finite parameters after update");
}

}  // namespace ratio_lab
