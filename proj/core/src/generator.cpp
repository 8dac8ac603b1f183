#include "ratio_lab/generator.hpp"

#include "ratio_lab/errors.hpp"

namespace ratio_lab {

namespace {

std::vector<int> generator_dims(int latent_dim, int data_dim, const std::vector<int>& hidden) {
  std::vector<int> dims;
  dims.push_back(latent_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(data_dim);
  return dims;
}

}  // namespace

Generator::Generator(int latent_dim, int data_dim, const std::vector<int>& hidden_dims,
                     double learning_rate, Rng& init_rng)
    : net_(Mlp::he_init(generator_dims(latent_dim, data_dim, hidden_dims), init_rng)),
      opt_(net_.param_count(), learning_rate),
      latent_dim_(latent_dim) {}

Generator::Generator(Mlp net, AdamState opt, int latent_dim)
    : net_(std::move(net)), opt_(std::move(opt)), latent_dim_(latent_dim) {
  if (net_.input_dim() != latent_dim_)
    throw ShapeError("generator: network input must equal the latent dimension");
}

Eigen::MatrixXd Generator::sample_latent(Eigen::Index n, Rng& rng) const {
  return rng.normal_matrix(n, latent_dim_);
}

Eigen::MatrixXd Generator::generate(Eigen::Index n, Rng& rng) const {
  return forward(sample_latent(n, rng));
}

}  // namespace ratio_lab
