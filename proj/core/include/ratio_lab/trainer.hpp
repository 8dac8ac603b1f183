#ifndef RATIO_LAB_TRAINER_HPP_
#define RATIO_LAB_TRAINER_HPP_

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "ratio_lab/gaussian_mixture.hpp"
#include "ratio_lab/generator.hpp"
#include "ratio_lab/noise_schedule.hpp"
#include "ratio_lab/ratio_estimator.hpp"
#include "ratio_lab/score_net.hpp"

namespace ratio_lab {

enum class Criterion { kDikl, kDijs, kDirm, kVsd };

std::string criterion_name(Criterion c);
Criterion criterion_from_name(const std::string& name);

struct NetworkShapes {
  int latent_dim = 2;
  std::vector<int> generator_hidden{400, 400, 400};
  std::vector<int> classifier_hidden{400, 400, 400};
  std::vector<int> score_hidden{400, 400, 400};
};

struct TrainLoopConfig {
  Criterion criterion = Criterion::kDikl;
  long steps = 10000;
  int batch = 1024;  // split across the two classifier populations
  double generator_lr = 1e-4;
  double aux_lr = 1e-4;  // classifier / score-network learning rate
  int classifier_inner_steps = 1;
  int student_inner_steps = 1;
  long teacher_pretrain_steps = 10000;
  NoiseSchedule schedule;
  NetworkShapes shapes;
  long eval_interval = 0;  // 0: trace carries losses only
  int eval_samples = 2048;
  long checkpoint_interval = 0;

  void validate() const;
};

struct StepRecord {
  long step = 0;
  std::string criterion;
  double classifier_loss = 0.0;  // student DSM loss for the vsd criterion
  double generator_surrogate = 0.0;
  double grad_norm = 0.0;
  double t_sampled = 0.0;
};

struct EvalRecord {
  long step = 0;
  double log_mmd = 0.0;
  double avg_log_density = 0.0;
};

struct TrainTrace {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
};

/// Writes "step,criterion,classifier_loss,generator_surrogate,grad_norm,t_sampled".
void write_trace_csv(const TrainTrace& trace, const std::string& path);

/// Writes "step,log_mmd,avg_log_density" for periodic evals.
void write_eval_csv(const TrainTrace& trace, const std::string& path);

struct GeneratorStepInfo {
  double surrogate = 0.0;
  double grad_norm = 0.0;
  double t = 0.0;
};

/// One pathwise generator update against a fixed ratio estimator. Draws a
/// latent batch, noises the generated points at a sampled t, evaluates the
/// detached score-difference field for cfg.criterion, and descends the
/// surrogate w(t) <stop-grad(field), x_t> averaged over the batch.
GeneratorStepInfo generator_step_ratio(Generator& gen, const RatioEstimator& est,
                                       const TrainLoopConfig& cfg, Rng& rng);

/// Same update with the two-network field: student score minus teacher score.
GeneratorStepInfo generator_step_vsd(Generator& gen, const ScoreNet& teacher,
                                     const ScoreNet& student, const TrainLoopConfig& cfg,
                                     Rng& rng);

/// One DSM step of the student network on fresh generator samples.
double student_step(ScoreNet& student, const Generator& gen, const TrainLoopConfig& cfg, Rng& rng);

struct DiffRatioResult {
  Generator generator;
  RatioEstimator estimator;
  TrainTrace trace;
};

/// Interleaved classifier/generator training (criteria dikl, dijs, dirm).
/// Within each iteration the classifier consumes generator samples produced
/// before the generator update. Deterministic per seed on one thread.
DiffRatioResult run_diffratio(
    const TrainLoopConfig& cfg, const GaussianMixture& target, Rng& rng,
    const std::function<void(long, const Generator&, const RatioEstimator&)>& checkpoint_hook = {});

struct VsdResult {
  Generator generator;
  ScoreNet teacher;
  ScoreNet student;
  TrainTrace trace;
};

/// Two-stage baseline: stage 1 pretrains the teacher by DSM on target data;
/// stage 2 interleaves student DSM steps with generator updates driven by the
/// student-minus-teacher field. Stage 2 never touches teacher parameters.
VsdResult run_vsd(const TrainLoopConfig& cfg, const GaussianMixture& target, Rng& rng,
                  const std::function<void(long, const Generator&, const ScoreNet&,
                                           const ScoreNet&)>& checkpoint_hook = {});

/// Classifier-only training against a frozen generator: per step, equal
/// fresh data/model batches are noised at a sampled t' and the classifier
/// takes one (or cfg.classifier_inner_steps) gradient steps. Used by the
/// bias benchmark, where the generator never updates.
RatioEstimator train_ratio_estimator_frozen(const TrainLoopConfig& cfg,
                                            const GaussianMixture& target,
                                            const Generator& frozen_model, Rng& rng);

/// DSM training of a fresh score network on batches from `sampler`
/// (the data distribution for the teacher role, frozen generator samples for
/// the student role in the bias benchmark).
ScoreNet train_score_net(const TrainLoopConfig& cfg, ScoreRole role, int data_dim,
                         const std::function<Eigen::MatrixXd(Eigen::Index, Rng&)>& sampler,
                         Rng& rng);

struct PretrainConfig {
  long steps = 6000;
  int batch = 512;
  double generator_lr = 1e-3;
  double classifier_lr = 1e-3;
  NoiseSchedule schedule;
  NetworkShapes shapes{.latent_dim = 2,
                       .generator_hidden = {128, 128, 128},
                       .classifier_hidden = {128, 128, 128},
                       .score_hidden = {128, 128, 128}};
};

/// Produces the frozen approximate generator used by the bias benchmark: a
/// short dijs run with deliberately small networks, so the result tracks the
/// target while keeping a measurable residual mismatch.
Generator pretrain_generator_bias_mode(const GaussianMixture& target, const PretrainConfig& cfg,
                                       Rng& rng);

/// Nearest-component-mean assignment counts for a sample cloud.
Eigen::VectorXi mode_occupancy(const GaussianMixture& target, const Eigen::MatrixXd& samples);

/// Number of components whose occupancy reaches min_count.
int covered_modes(const Eigen::VectorXi& occupancy, long min_count);

/// Default occupancy threshold: max(1, n_samples / 2000).
long coverage_min_count(Eigen::Index n_samples);

}  // namespace ratio_lab

#endif  // RATIO_LAB_TRAINER_HPP_
