#ifndef RATIO_LAB_RATIO_ESTIMATOR_HPP_
#define RATIO_LAB_RATIO_ESTIMATOR_HPP_

#include <Eigen/Dense>
#include <vector>

#include "ratio_lab/adam.hpp"
#include "ratio_lab/mlp.hpp"
#include "ratio_lab/noise_schedule.hpp"

namespace ratio_lab {

/// Time-conditioned binary classifier estimating the density ratio between
/// model and data distributions in the noisy space.
///
/// The network outputs a raw logit l(x, t); the classifier probability is
/// c = sigmoid(l) with label convention y=1 for data samples and y=0 for
/// model samples. All probability arithmetic (c, log c, log(1-c), the ratio
/// c/(1-c) = exp(l)) is derived from the logit analytically, which keeps the
/// score-difference fields free of cancellation when c saturates:
///
///   logit(1 - c) = -l            =>  dikl field = grad_x(-l)
///   log(1 - c)   = -softplus(l)  =>  dijs field = grad_x(-softplus(l))
///   -log c       = softplus(-l)  =>  dirm field = grad_x(softplus(-l))
class RatioEstimator {
 public:
  /// Network input is (x, log sigma(t)), output a scalar logit.
  RatioEstimator(int data_dim, const std::vector<int>& hidden_dims, double learning_rate,
                 const NoiseSchedule& schedule, Rng& init_rng);

  /// Used by checkpoint loading.
  RatioEstimator(Mlp net, AdamState opt, NoiseSchedule schedule, int data_dim);

  int data_dim() const { return data_dim_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const Mlp& net() const { return net_; }
  const AdamState& optimizer() const { return opt_; }

  /// Raw logits for a batch of points at noise level t.
  Eigen::VectorXd logits(const Eigen::MatrixXd& x, double t) const;
  double logit(const Eigen::VectorXd& x, double t) const;

  /// Classifier probability c = sigmoid(l), strictly in (0,1).
  Eigen::VectorXd probability(const Eigen::MatrixXd& x, double t) const;

  struct LossResult {
    double loss = 0.0;
    Eigen::VectorXd param_grad;
  };

  /// Stable binary cross-entropy on raw logits under the uniform class prior:
  /// mean over all rows of softplus(-l) on data rows and softplus(l) on model
  /// rows. Gradient is w.r.t. classifier parameters only. Batches must have
  /// equal size.
  LossResult classifier_loss(const Eigen::MatrixXd& x_data, const Eigen::MatrixXd& x_model,
                             double t) const;

  /// classifier_loss followed by one Adam update; returns the loss.
  double train_step(const Eigen::MatrixXd& x_data, const Eigen::MatrixXd& x_model, double t);

  /// exp(l) = c/(1-c), the estimate of p_data(x_t)/q_model(x_t).
  double ratio_weight(const Eigen::VectorXd& x, double t) const;
  Eigen::VectorXd ratio_weights(const Eigen::MatrixXd& x, double t) const;

  /// grad_x logit(1-c) = grad_x(-l): estimates grad log (q/p).
  Eigen::MatrixXd score_diff_dikl(const Eigen::MatrixXd& x, double t) const;

  /// grad_x log(1-c) = grad_x(-softplus(l)).
  Eigen::MatrixXd score_diff_dijs(const Eigen::MatrixXd& x, double t) const;

  /// -grad_x log c = grad_x softplus(-l).
  Eigen::MatrixXd score_diff_dirm(const Eigen::MatrixXd& x, double t) const;

 private:
  Eigen::MatrixXd field_from_upstream(const Eigen::MatrixXd& x, double t,
                                      const Eigen::VectorXd& upstream) const;

  Mlp net_;
  AdamState opt_;
  NoiseSchedule schedule_;
  int data_dim_ = 0;
};

}  // namespace ratio_lab

#endif  // RATIO_LAB_RATIO_ESTIMATOR_HPP_
