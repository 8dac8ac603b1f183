#ifndef RATIO_LAB_GENERATOR_HPP_
#define RATIO_LAB_GENERATOR_HPP_

#include <Eigen/Dense>
#include <vector>

#include "ratio_lab/adam.hpp"
#include "ratio_lab/mlp.hpp"
#include "ratio_lab/rng.hpp"

namespace ratio_lab {

/// One-step implicit generative model: a deterministic MLP mapping standard
/// normal latents z to data space. Sampling is a single forward pass.
class Generator {
 public:
  Generator(int latent_dim, int data_dim, const std::vector<int>& hidden_dims,
            double learning_rate, Rng& init_rng);

  Generator(Mlp net, AdamState opt, int latent_dim);

  int latent_dim() const { return latent_dim_; }
  int data_dim() const { return net_.output_dim(); }
  const Mlp& net() const { return net_; }
  const AdamState& optimizer() const { return opt_; }

  Eigen::MatrixXd sample_latent(Eigen::Index n, Rng& rng) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& z) const { return net_.forward(z); }
  Eigen::MatrixXd generate(Eigen::Index n, Rng& rng) const;

  Eigen::VectorXd param_grad(const Eigen::MatrixXd& z, const Eigen::MatrixXd& upstream) const {
    return net_.param_grad(z, upstream);
  }

  /// One Adam update of the generator parameters.
  void apply_gradient(const Eigen::VectorXd& grad) { opt_.apply(net_.params(), grad); }

 private:
  Mlp net_;
  AdamState opt_;
  int latent_dim_ = 0;
};

}  // namespace ratio_lab

#endif  // RATIO_LAB_GENERATOR_HPP_
