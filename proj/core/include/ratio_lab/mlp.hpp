#ifndef RATIO_LAB_MLP_HPP_
#define RATIO_LAB_MLP_HPP_

#include <Eigen/Dense>
#include <vector>

#include "ratio_lab/rng.hpp"

namespace ratio_lab {

/// Multilayer perceptron with SiLU hidden activations and an identity final
/// layer. Parameters live in one flat vector (per layer: column-major W of
/// shape in x out, then bias of length out), which is what the optimizer and
/// the checkpoint format operate on. Forward and the two vector-Jacobian
/// products are pure functions of (params, input) and deterministic.
class Mlp {
 public:
  /// Zero-initialized network. layer_dims = {input, hidden..., output}.
  explicit Mlp(std::vector<int> layer_dims);

  /// He-style fan-in init: W ~ N(0, 2/fan_in), biases zero. Deterministic
  /// per rng state; weights are drawn layer by layer in storage order.
  static Mlp he_init(std::vector<int> layer_dims, Rng& rng);

  const std::vector<int>& layer_dims() const { return layer_dims_; }
  int input_dim() const { return layer_dims_.front(); }
  int output_dim() const { return layer_dims_.back(); }
  Eigen::Index param_count() const { return params_.size(); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  /// Batched forward pass; rows are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  /// Gradient of sum_rows <upstream_row, forward(x)_row> w.r.t. the flat
  /// parameter vector.
  Eigen::VectorXd param_grad(const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream) const;

  /// Same cotangent contraction w.r.t. the inputs; row-wise independent.
  Eigen::MatrixXd input_grad(const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream) const;

  struct VjpResult {
    Eigen::VectorXd param_grad;
    Eigen::MatrixXd input_grad;
  };

  /// One backward pass computing either or both gradients.
  VjpResult vjp(const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream, bool want_params,
                bool want_input) const;

 private:
  std::vector<int> layer_dims_;
  std::vector<Eigen::Index> w_offset_;
  std::vector<Eigen::Index> b_offset_;
  Eigen::VectorXd params_;
};

/// x * sigmoid(x), evaluated with a single overflow-safe exp.
Eigen::ArrayXXd silu(const Eigen::ArrayXXd& z);

/// Numerically stable logistic sigmoid.
Eigen::ArrayXXd stable_sigmoid(const Eigen::ArrayXXd& z);
double stable_sigmoid(double z);

/// log(1 + exp(x)) without overflow.
double stable_softplus(double x);
Eigen::ArrayXd stable_softplus(const Eigen::ArrayXd& x);

}  // namespace ratio_lab

#endif  // RATIO_LAB_MLP_HPP_
