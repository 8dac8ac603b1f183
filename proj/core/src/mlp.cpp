#include "ratio_lab/mlp.hpp"

#include <cmath>

#include "ratio_lab/errors.hpp"

namespace ratio_lab {

Eigen::ArrayXXd stable_sigmoid(const Eigen::ArrayXXd& z) {
  const Eigen::ArrayXXd e = (-z.abs()).exp();  // in (0, 1]
  return (z >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e));
}

double stable_sigmoid(double z) {
  const double e = std::exp(-std::abs(z));
  return z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Eigen::ArrayXd stable_softplus(const Eigen::ArrayXd& x) {
  return x.max(0.0) + (-x.abs()).exp().log1p();
}

Eigen::ArrayXXd silu(const Eigen::ArrayXXd& z) { return z * stable_sigmoid(z); }

Mlp::Mlp(std::vector<int> layer_dims) : layer_dims_(std::move(layer_dims)) {
  if (layer_dims_.size() < 2) throw ConfigError("mlp: need at least input and output dims");
  Eigen::Index total = 0;
  for (std::size_t k = 0; k + 1 < layer_dims_.size(); ++k) {
    const int in = layer_dims_[k];
    const int out = layer_dims_[k + 1];
    if (in < 1 || out < 1) throw ConfigError("mlp: layer dims must be positive");
    w_offset_.push_back(total);
    total += static_cast<Eigen::Index>(in) * out;
    b_offset_.push_back(total);
    total += out;
  }
  params_ = Eigen::VectorXd::Zero(total);
}

Mlp Mlp::he_init(std::vector<int> layer_dims, Rng& rng) {
  Mlp net(std::move(layer_dims));
  for (std::size_t k = 0; k + 1 < net.layer_dims_.size(); ++k) {
    const int in = net.layer_dims_[k];
    const int out = net.layer_dims_[k + 1];
    const double std_dev = std::sqrt(2.0 / in);
    double* w = net.params_.data() + net.w_offset_[k];
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(in) * out; ++i) w[i] = std_dev * rng.normal();
    // biases stay zero
  }
  return net;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  if (x.cols() != input_dim()) throw ShapeError("mlp forward: input width mismatch");
  const std::size_t n_layers = layer_dims_.size() - 1;
  Eigen::MatrixXd a = x;
  for (std::size_t k = 0; k < n_layers; ++k) {
    const int in = layer_dims_[k];
    const int out = layer_dims_[k + 1];
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + w_offset_[k], in, out);
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + b_offset_[k], out);
    Eigen::MatrixXd z = a * w;
    z.rowwise() += b.transpose();
    if (k + 1 < n_layers) {
      a = silu(z.array()).matrix();
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Mlp::VjpResult Mlp::vjp(const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream, bool want_params,
                        bool want_input) const {
  if (x.cols() != input_dim()) throw ShapeError("mlp vjp: input width mismatch");
  if (upstream.rows() != x.rows() || upstream.cols() != output_dim())
    throw ShapeError("mlp vjp: upstream shape mismatch");

  const std::size_t n_layers = layer_dims_.size() - 1;

  // Forward, caching layer inputs and hidden pre-activation sigmoids.
  std::vector<Eigen::MatrixXd> inputs(n_layers);   // a_{k-1}, input to layer k
  std::vector<Eigen::MatrixXd> pre(n_layers);      // z_k for hidden layers
  std::vector<Eigen::MatrixXd> sig(n_layers);      // sigmoid(z_k) for hidden layers
  Eigen::MatrixXd a = x;
  for (std::size_t k = 0; k < n_layers; ++k) {
    inputs[k] = a;
    const int in = layer_dims_[k];
    const int out = layer_dims_[k + 1];
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + w_offset_[k], in, out);
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + b_offset_[k], out);
    Eigen::MatrixXd z = a * w;
    z.rowwise() += b.transpose();
    if (k + 1 < n_layers) {
      sig[k] = stable_sigmoid(z.array()).matrix();
      a = (z.array() * sig[k].array()).matrix();
      pre[k] = std::move(z);
    } else {
      a = std::move(z);
    }
  }

  VjpResult result;
  if (want_params) result.param_grad = Eigen::VectorXd::Zero(params_.size());

  Eigen::MatrixXd dz = upstream;
  for (std::size_t k = n_layers; k-- > 0;) {
    const int in = layer_dims_[k];
    const int out = layer_dims_[k + 1];
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + w_offset_[k], in, out);
    if (want_params) {
      Eigen::Map<Eigen::MatrixXd> dw(result.param_grad.data() + w_offset_[k], in, out);
      Eigen::Map<Eigen::VectorXd> db(result.param_grad.data() + b_offset_[k], out);
      dw.noalias() = inputs[k].transpose() * dz;
      db = dz.colwise().sum().transpose();
    }
    const bool need_da = (k > 0) || want_input;
    if (!need_da) break;
    Eigen::MatrixXd da = dz * w.transpose();
    if (k > 0) {
      // d silu(z) = s + z s (1 - s), with s = sigmoid(z)
      const auto s = sig[k - 1].array();
      const auto z = pre[k - 1].array();
      dz = (da.array() * (s + z * s * (1.0 - s))).matrix();
    } else {
      result.input_grad = std::move(da);
    }
  }
  return result;
}

Eigen::VectorXd Mlp::param_grad(const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream) const {
  return vjp(x, upstream, true, false).param_grad;
}

Eigen::MatrixXd Mlp::input_grad(const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream) const {
  return vjp(x, upstream, false, true).input_grad;
}

}  // namespace ratio_lab
