#include "ratio_lab/ratio_estimator.hpp"

#include <cmath>

#include "ratio_lab/errors.hpp"

namespace ratio_lab {

namespace {

std::vector<int> classifier_dims(int data_dim, const std::vector<int>& hidden_dims) {
  std::vector<int> dims;
  dims.push_back(data_dim + 1);  // (x, log sigma(t))
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(1);
  return dims;
}

}  // namespace

RatioEstimator::RatioEstimator(int data_dim, const std::vector<int>& hidden_dims,
                               double learning_rate, const NoiseSchedule& schedule, Rng& init_rng)
    : net_(Mlp::he_init(classifier_dims(data_dim, hidden_dims), init_rng)),
      opt_(net_.param_count(), learning_rate),
      schedule_(schedule),
      data_dim_(data_dim) {}

RatioEstimator::RatioEstimator(Mlp net, AdamState opt, NoiseSchedule schedule, int data_dim)
    : net_(std::move(net)), opt_(std::move(opt)), schedule_(schedule), data_dim_(data_dim) {
  if (net_.input_dim() != data_dim_ + 1 || net_.output_dim() != 1)
    throw ShapeError("ratio estimator: network must map (x, t) to a scalar logit");
}

Eigen::VectorXd RatioEstimator::logits(const Eigen::MatrixXd& x, double t) const {
  return net_.forward(with_time_feature(x, schedule_, t)).col(0);
}

double RatioEstimator::logit(const Eigen::VectorXd& x, double t) const {
  return logits(x.transpose(), t)[0];
}

Eigen::VectorXd RatioEstimator::probability(const Eigen::MatrixXd& x, double t) const {
  return stable_sigmoid(logits(x, t).array()).matrix();
}

RatioEstimator::LossResult RatioEstimator::classifier_loss(const Eigen::MatrixXd& x_data,
                                                           const Eigen::MatrixXd& x_model,
                                                           double t) const {
  if (x_data.rows() != x_model.rows())
    throw ConfigError("classifier_loss: data and model batches must have equal size");
  const Eigen::Index n = x_data.rows();
  Eigen::MatrixXd joint(2 * n, x_data.cols());
  joint.topRows(n) = x_data;
  joint.bottomRows(n) = x_model;

  const Eigen::MatrixXd aug = with_time_feature(joint, schedule_, t);
  const Eigen::VectorXd l = net_.forward(aug).col(0);

  // loss = mean[ softplus(-l) over data rows, softplus(l) over model rows ]
  const double inv_total = 1.0 / static_cast<double>(2 * n);
  double loss = 0.0;
  Eigen::MatrixXd upstream(2 * n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    loss += stable_softplus(-l[i]);
    upstream(i, 0) = -stable_sigmoid(-l[i]) * inv_total;
  }
  for (Eigen::Index i = n; i < 2 * n; ++i) {
    loss += stable_softplus(l[i]);
    upstream(i, 0) = stable_sigmoid(l[i]) * inv_total;
  }
  loss *= inv_total;

  LossResult result;
  result.loss = loss;
  result.param_grad = net_.param_grad(aug, upstream);
  return result;
}

double RatioEstimator::train_step(const Eigen::MatrixXd& x_data, const Eigen::MatrixXd& x_model,
                                  double t) {
  LossResult r = classifier_loss(x_data, x_model, t);
  opt_.apply(net_.params(), r.param_grad);
  return r.loss;
}

double RatioEstimator::ratio_weight(const Eigen::VectorXd& x, double t) const {
  const double l = logit(x, t);
  if (!std::isfinite(l)) throw EvalError("ratio_weight: non-finite logit");
  return std::exp(l);
}

Eigen::VectorXd RatioEstimator::ratio_weights(const Eigen::MatrixXd& x, double t) const {
  const Eigen::VectorXd l = logits(x, t);
  if (!l.allFinite()) throw EvalError("ratio_weights: non-finite logit");
  return l.array().exp().matrix();
}

Eigen::MatrixXd RatioEstimator::field_from_upstream(const Eigen::MatrixXd& x, double t,
                                                    const Eigen::VectorXd& upstream) const {
  const Eigen::MatrixXd grad =
      net_.input_grad(with_time_feature(x, schedule_, t), upstream);
  return grad.leftCols(data_dim_);  // gradient w.r.t. x only, not the time feature
}

Eigen::MatrixXd RatioEstimator::score_diff_dikl(const Eigen::MatrixXd& x, double t) const {
  return field_from_upstream(x, t, Eigen::VectorXd::Constant(x.rows(), -1.0));
}

Eigen::MatrixXd RatioEstimator::score_diff_dijs(const Eigen::MatrixXd& x, double t) const {
  const Eigen::VectorXd l = logits(x, t);
  const Eigen::VectorXd upstream = (-stable_sigmoid(l.array())).matrix();
  return field_from_upstream(x, t, upstream);
}

Eigen::MatrixXd RatioEstimator::score_diff_dirm(const Eigen::MatrixXd& x, double t) const {
  const Eigen::VectorXd l = logits(x, t);
  const Eigen::VectorXd upstream = (-stable_sigmoid((-l).array())).matrix();
  return field_from_upstream(x, t, upstream);
}

}  // namespace ratio_lab
