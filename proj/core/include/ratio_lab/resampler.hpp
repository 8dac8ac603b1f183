#ifndef RATIO_LAB_RESAMPLER_HPP_
#define RATIO_LAB_RESAMPLER_HPP_

#include <Eigen/Dense>

#include "ratio_lab/generator.hpp"
#include "ratio_lab/ratio_estimator.hpp"

namespace ratio_lab {

struct CandidateSet {
  Eigen::MatrixXd candidates;  // M x d
  Eigen::VectorXd weights;     // nonnegative, finite
  bool normalized = false;
};

/// Importance weights for a candidate batch: each candidate is noised to
/// t_min (k_noise_draws fresh draws, ratio averaged over them) and scored by
/// the learned ratio c/(1-c) = exp(logit). Throws on non-finite weights.
Eigen::VectorXd compute_weights(const RatioEstimator& est, const Eigen::MatrixXd& candidates,
                                double t_min, Rng& noise_rng, int k_noise_draws = 1);

/// Log-weight variant used internally; safe for any logit magnitude.
Eigen::VectorXd compute_log_weights(const RatioEstimator& est, const Eigen::MatrixXd& candidates,
                                    double t_min, Rng& noise_rng, int k_noise_draws = 1);

/// Normalizes in place (weights sum to one) and returns the set.
CandidateSet& normalize(CandidateSet& cs);

/// One categorical draw by inverse CDF over the normalized weights; ties at
/// exact CDF boundaries resolve to the lowest index. Throws on all-zero
/// weights.
Eigen::Index resample_index(const Eigen::VectorXd& weights, Rng& rng);

/// Inverse-CDF selection from log-weights via a max-shift (softmax-style)
/// normalization, immune to overflow for large |logit|.
Eigen::Index resample_index_log(const Eigen::VectorXd& log_weights, Rng& rng);

struct ScaledGenerateResult {
  Eigen::MatrixXd samples;            // n_outputs x d
  double mean_weight_selected = 0.0;  // mean ratio weight of the chosen candidates
  double mean_ess = 0.0;              // mean effective sample size over outputs
};

/// Inference-time parallel scaling: for each output draw M candidates from
/// the generator, weight them with the learned ratio at t_min, and keep one
/// by importance resampling. Candidate generation consumes only cand_rng, so
/// the candidate stream is reproducible independently of M; noising and
/// selection consume select_rng.
ScaledGenerateResult scaled_generate(const Generator& gen, const RatioEstimator& est, int M,
                                     Eigen::Index n_outputs, double t_min, Rng& cand_rng,
                                     Rng& select_rng, int k_noise_draws = 1);

/// (sum w)^2 / sum w^2, the weight-degeneracy diagnostic.
double effective_sample_size(const Eigen::VectorXd& weights);

}  // namespace ratio_lab

#endif  // RATIO_LAB_RESAMPLER_HPP_
