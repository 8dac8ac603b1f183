#include "ratio_lab/score_net.hpp"

#include <cmath>

#include "ratio_lab/errors.hpp"

namespace ratio_lab {

namespace {

std::vector<int> score_dims(int data_dim, const std::vector<int>& hidden_dims) {
  std::vector<int> dims;
  dims.push_back(data_dim + 1);
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(data_dim);
  return dims;
}

}  // namespace

ScoreNet::ScoreNet(int data_dim, const std::vector<int>& hidden_dims, double learning_rate,
                   const NoiseSchedule& schedule, ScoreRole role, Rng& init_rng)
    : net_(Mlp::he_init(score_dims(data_dim, hidden_dims), init_rng)),
      opt_(net_.param_count(), learning_rate),
      schedule_(schedule),
      role_(role),
      data_dim_(data_dim) {}

ScoreNet::ScoreNet(Mlp net, AdamState opt, NoiseSchedule schedule, ScoreRole role, int data_dim)
    : net_(std::move(net)), opt_(std::move(opt)), schedule_(schedule), role_(role),
      data_dim_(data_dim) {
  if (net_.input_dim() != data_dim_ + 1 || net_.output_dim() != data_dim_)
    throw ShapeError("score net: network must map (x, t) to a d-vector");
}

Eigen::MatrixXd ScoreNet::score(const Eigen::MatrixXd& x, double t) const {
  return -net_.forward(with_time_feature(x, schedule_, t)) / schedule_.sigma(t);
}

ScoreNet::DsmResult ScoreNet::dsm_loss(const Eigen::MatrixXd& x0, double t, Rng& rng) const {
  if (x0.cols() != data_dim_) throw ShapeError("dsm_loss: sample width mismatch");
  return dsm_loss_with_eps(x0, t, rng.normal_matrix(x0.rows(), x0.cols()));
}

ScoreNet::DsmResult ScoreNet::dsm_loss_with_eps(const Eigen::MatrixXd& x0, double t,
                                                const Eigen::MatrixXd& eps) const {
  if (x0.cols() != data_dim_) throw ShapeError("dsm_loss: sample width mismatch");
  const double sigma = schedule_.sigma(t);
  const Eigen::MatrixXd xt = schedule_.perturb_with(x0, t, eps);

  // score residual s - (-eps/sigma) expressed through the raw noise
  // prediction: (eps - out) / sigma
  const Eigen::MatrixXd aug = with_time_feature(xt, schedule_, t);
  const Eigen::MatrixXd residual = (net_.forward(aug) - eps) / sigma;

  DsmResult result;
  const double n = static_cast<double>(x0.rows());
  result.loss = residual.squaredNorm() / n;
  result.param_grad = net_.param_grad(aug, (2.0 / (n * sigma)) * residual);
  return result;
}

double ScoreNet::dsm_step(const Eigen::MatrixXd& x0, double t, Rng& rng) {
  DsmResult r = dsm_loss(x0, t, rng);
  const Eigen::VectorXd weighted = schedule_.weight(t) * r.param_grad;
  opt_.apply(net_.params(), weighted);
  return r.loss;
}

void ScoreNet::copy_params_from(const ScoreNet& other) {
  if (other.net_.param_count() != net_.param_count())
    throw ShapeError("copy_params_from: parameter counts differ");
  net_.params() = other.net_.params();
  opt_ = AdamState(net_.param_count(), opt_.lr);
}

Eigen::MatrixXd vsd_score_diff(const ScoreNet& teacher, const ScoreNet& student,
                               const Eigen::MatrixXd& x, double t) {
  if (teacher.data_dim() != student.data_dim())
    throw ShapeError("vsd_score_diff: teacher and student dimensions differ");
  return student.score(x, t) - teacher.score(x, t);
}

Eigen::VectorXd tweedie_mean(const Eigen::VectorXd& score, const Eigen::VectorXd& x, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("tweedie_mean: beta must lie in (0,1)");
  if (score.size() != x.size()) throw ShapeError("tweedie_mean: score/x size mismatch");
  return (x + beta * score) / std::sqrt(1.0 - beta);
}

}  // namespace ratio_lab
