#ifndef RATIO_LAB_SCORE_NET_HPP_
#define RATIO_LAB_SCORE_NET_HPP_

#include <Eigen/Dense>
#include <vector>

#include "ratio_lab/adam.hpp"
#include "ratio_lab/mlp.hpp"
#include "ratio_lab/noise_schedule.hpp"

namespace ratio_lab {

enum class ScoreRole { kTeacher, kStudent };

/// Time-conditioned score network trained by denoising score matching under
/// the variance-exploding kernel: the regression target for a perturbed pair
/// (x_t = x_0 + sigma eps) is -eps / sigma.
///
/// Internally the network predicts the noise, score(x, t) = -net(x, t) /
/// sigma(t), so its raw outputs stay O(1) at every level; the DSM loss and
/// its parameter gradient are algebraically unchanged by this scaling.
class ScoreNet {
 public:
  ScoreNet(int data_dim, const std::vector<int>& hidden_dims, double learning_rate,
           const NoiseSchedule& schedule, ScoreRole role, Rng& init_rng);

  ScoreNet(Mlp net, AdamState opt, NoiseSchedule schedule, ScoreRole role, int data_dim);

  int data_dim() const { return data_dim_; }
  ScoreRole role() const { return role_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const Mlp& net() const { return net_; }
  const AdamState& optimizer() const { return opt_; }

  /// s(x, t) for a batch of points (rows).
  Eigen::MatrixXd score(const Eigen::MatrixXd& x, double t) const;

  struct DsmResult {
    double loss = 0.0;
    Eigen::VectorXd param_grad;
  };

  /// Perturbs clean samples at level t and regresses onto -eps/sigma; the
  /// loss is the batch mean of the squared residual norm.
  DsmResult dsm_loss(const Eigen::MatrixXd& x0, double t, Rng& rng) const;

  /// Test hook: same loss with caller-supplied noise.
  DsmResult dsm_loss_with_eps(const Eigen::MatrixXd& x0, double t,
                              const Eigen::MatrixXd& eps) const;

  /// One training step: expected-loss training over sampled levels, applying
  /// the schedule weight w(t) = sigma^2 to the gradient of dsm_loss. The
  /// weight cancels the 1/sigma^2 scale of the score-space loss, so every
  /// level contributes comparably; per-level optima are unchanged. Returns
  /// the unweighted loss.
  double dsm_step(const Eigen::MatrixXd& x0, double t, Rng& rng);

  /// Copies parameters and resets optimizer moments (used to warm-start the
  /// student from the teacher).
  void copy_params_from(const ScoreNet& other);

  /// Adjusts the optimizer step size (e.g. for a step-down late in training).
  void set_learning_rate(double lr) { opt_.lr = lr; }

 private:
  Mlp net_;
  AdamState opt_;
  NoiseSchedule schedule_;
  ScoreRole role_ = ScoreRole::kTeacher;
  int data_dim_ = 0;
};

/// The two-network score-difference estimator: student minus teacher.
Eigen::MatrixXd vsd_score_diff(const ScoreNet& teacher, const ScoreNet& student,
                               const Eigen::MatrixXd& x, double t);

/// Reverse mean from a marginal score under a variance-preserving step:
/// (x + beta * score) / sqrt(1 - beta). Standalone background utility; not
/// part of the variance-exploding training pipeline.
Eigen::VectorXd tweedie_mean(const Eigen::VectorXd& score, const Eigen::VectorXd& x, double beta);

}  // namespace ratio_lab

#endif  // RATIO_LAB_SCORE_NET_HPP_
