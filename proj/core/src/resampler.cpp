#include "ratio_lab/resampler.hpp"

#include <cmath>

#include "ratio_lab/errors.hpp"

namespace ratio_lab {

Eigen::VectorXd compute_log_weights(const RatioEstimator& est, const Eigen::MatrixXd& candidates,
                                    double t_min, Rng& noise_rng, int k_noise_draws) {
  if (candidates.rows() < 1) throw ConfigError("compute_weights: need at least one candidate");
  if (k_noise_draws < 1) throw ConfigError("compute_weights: k_noise_draws must be >= 1");
  const double sigma = est.schedule().sigma(t_min);

  // log of the k-draw average ratio, via log-sum-exp over draws
  Eigen::MatrixXd logits(candidates.rows(), k_noise_draws);
  for (int k = 0; k < k_noise_draws; ++k) {
    const Eigen::MatrixXd noised =
        candidates + sigma * noise_rng.normal_matrix(candidates.rows(), candidates.cols());
    const Eigen::VectorXd l = est.logits(noised, t_min);
    if (!l.allFinite()) throw EvalError("compute_weights: non-finite verifier logit");
    logits.col(k) = l;
  }
  Eigen::VectorXd out(candidates.rows());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double m = logits.row(i).maxCoeff();
    out[i] = m + std::log((logits.row(i).array() - m).exp().sum()) -
             std::log(static_cast<double>(k_noise_draws));
  }
  return out;
}

Eigen::VectorXd compute_weights(const RatioEstimator& est, const Eigen::MatrixXd& candidates,
                                double t_min, Rng& noise_rng, int k_noise_draws) {
  const Eigen::VectorXd lw = compute_log_weights(est, candidates, t_min, noise_rng, k_noise_draws);
  const Eigen::VectorXd w = lw.array().exp().matrix();
  if (!w.allFinite()) throw EvalError("compute_weights: ratio weight overflow");
  return w;
}

CandidateSet& normalize(CandidateSet& cs) {
  if (cs.weights.size() != cs.candidates.rows())
    throw ShapeError("normalize: weight/candidate count mismatch");
  if (!cs.weights.allFinite() || (cs.weights.array() < 0.0).any())
    throw EvalError("normalize: weights must be finite and nonnegative");
  const double total = cs.weights.sum();
  if (!(total > 0.0)) throw EvalError("normalize: degenerate all-zero weights");
  cs.weights /= total;
  cs.normalized = true;
  return cs;
}

Eigen::Index resample_index(const Eigen::VectorXd& weights, Rng& rng) {
  if (weights.size() < 1) throw ConfigError("resample_index: empty weight vector");
  if (!weights.allFinite() || (weights.array() < 0.0).any())
    throw EvalError("resample_index: weights must be finite and nonnegative");
  const double total = weights.sum();
  if (!(total > 0.0)) throw EvalError("resample_index: degenerate all-zero weights");
  const double u = rng.uniform() * total;
  double cum = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u <= cum) return i;  // ties at exact boundaries go to the lowest index
  }
  return weights.size() - 1;
}

Eigen::Index resample_index_log(const Eigen::VectorXd& log_weights, Rng& rng) {
  if (log_weights.size() < 1) throw ConfigError("resample_index_log: empty weight vector");
  const double m = log_weights.maxCoeff();
  if (!std::isfinite(m)) throw EvalError("resample_index_log: non-finite log-weights");
  const Eigen::VectorXd w = (log_weights.array() - m).exp().matrix();
  return resample_index(w, rng);
}

ScaledGenerateResult scaled_generate(const Generator& gen, const RatioEstimator& est, int M,
                                     Eigen::Index n_outputs, double t_min, Rng& cand_rng,
                                     Rng& select_rng, int k_noise_draws) {
  if (M < 1) throw ConfigError("scaled_generate: M must be >= 1");
  if (n_outputs < 1) throw ConfigError("scaled_generate: need at least one output");

  ScaledGenerateResult result;
  result.samples.resize(n_outputs, gen.data_dim());
  double weight_sum = 0.0;
  double ess_sum = 0.0;
  for (Eigen::Index i = 0; i < n_outputs; ++i) {
    const Eigen::MatrixXd candidates = gen.generate(M, cand_rng);
    const Eigen::VectorXd lw =
        compute_log_weights(est, candidates, t_min, select_rng, k_noise_draws);
    const Eigen::Index pick = resample_index_log(lw, select_rng);
    result.samples.row(i) = candidates.row(pick);
    weight_sum += std::exp(lw[pick]);
    const Eigen::VectorXd shifted = (lw.array() - lw.maxCoeff()).exp().matrix();
    ess_sum += effective_sample_size(shifted);
  }
  result.mean_weight_selected = weight_sum / static_cast<double>(n_outputs);
  result.mean_ess = ess_sum / static_cast<double>(n_outputs);
  return result;
}

double effective_sample_size(const Eigen::VectorXd& weights) {
  const double s1 = weights.sum();
  const double s2 = weights.squaredNorm();
  if (!(s2 > 0.0)) throw EvalError("effective_sample_size: all-zero weights");
  return s1 * s1 / s2;
}

}  // namespace ratio_lab
