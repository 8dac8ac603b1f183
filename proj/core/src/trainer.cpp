#include "ratio_lab/trainer.hpp"

#include <cmath>
#include <fstream>

#include "ratio_lab/errors.hpp"
#include "ratio_lab/format.hpp"
#include "ratio_lab/metrics.hpp"

namespace ratio_lab {

std::string criterion_name(Criterion c) {
  switch (c) {
    case Criterion::kDikl: return "dikl";
    case Criterion::kDijs: return "dijs";
    case Criterion::kDirm: return "dirm";
    case Criterion::kVsd: return "vsd";
  }
  throw ConfigError("criterion_name: unknown criterion");
}

Criterion criterion_from_name(const std::string& name) {
  if (name == "dikl") return Criterion::kDikl;
  if (name == "dijs") return Criterion::kDijs;
  if (name == "dirm") return Criterion::kDirm;
  if (name == "vsd") return Criterion::kVsd;
  throw ConfigError("criterion: expected one of dikl|dijs|dirm|vsd, got '" + name + "'");
}

void TrainLoopConfig::validate() const {
  if (steps < 1) throw ConfigError("training.steps must be >= 1");
  if (batch < 2 || batch % 2 != 0)
    throw ConfigError("training.batch must be even (split across the two classifier populations)");
  if (!(generator_lr > 0.0) || !(aux_lr > 0.0))
    throw ConfigError("training: learning rates must be positive");
  if (classifier_inner_steps < 1 || student_inner_steps < 1)
    throw ConfigError("training: inner step counts must be >= 1");
  if (teacher_pretrain_steps < 0) throw ConfigError("training.teacher_pretrain_steps must be >= 0");
  if (eval_interval < 0 || checkpoint_interval < 0)
    throw ConfigError("training: intervals must be >= 0");
  if (shapes.latent_dim < 1) throw ConfigError("networks.latent_dim must be >= 1");
}

void write_trace_csv(const TrainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_trace_csv: cannot open " + path);
  out << "step,criterion,classifier_loss,generator_surrogate,grad_norm,t_sampled\n";
  for (const auto& r : trace.steps) {
    out << r.step << ',' << r.criterion << ',' << format_double(r.classifier_loss) << ','
        << format_double(r.generator_surrogate) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.t_sampled) << '\n';
  }
}

void write_eval_csv(const TrainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_eval_csv: cannot open " + path);
  out << "step,log_mmd,avg_log_density\n";
  for (const auto& r : trace.evals) {
    out << r.step << ',' << format_double(r.log_mmd) << ',' << format_double(r.avg_log_density)
        << '\n';
  }
}

namespace {

GeneratorStepInfo generator_step_with_field(
    Generator& gen, const TrainLoopConfig& cfg, Rng& rng,
    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, double)>& field) {
  const Eigen::Index batch = cfg.batch;
  const Eigen::MatrixXd z = gen.sample_latent(batch, rng);
  const Eigen::MatrixXd x0 = gen.forward(z);
  const double t = cfg.schedule.sample_time(rng);
  const Eigen::MatrixXd eps = rng.normal_matrix(x0.rows(), x0.cols());
  const Eigen::MatrixXd xt = x0 + cfg.schedule.sigma(t) * eps;

  const Eigen::MatrixXd v = field(xt, t);  // detached: no gradient flows into the field
  if (!v.allFinite())
    throw DivergenceError("generator step: non-finite score-difference field");

  const double w = cfg.schedule.weight(t);
  const double scale = w / static_cast<double>(batch);
  const Eigen::VectorXd grad = gen.param_grad(z, scale * v);
  gen.apply_gradient(grad);

  GeneratorStepInfo info;
  info.surrogate = scale * (v.array() * xt.array()).sum();
  info.grad_norm = grad.norm();
  info.t = t;
  return info;
}

EvalRecord eval_snapshot(long step, const Generator& gen, const GaussianMixture& target,
                         int n_samples, Rng& eval_rng) {
  const Eigen::MatrixXd target_samples = target.sample(n_samples, eval_rng);
  const Eigen::MatrixXd gen_samples = gen.generate(n_samples, eval_rng);
  const GenReport report = evaluate_samples(target, target_samples, gen_samples);
  return {step, report.log_mmd, report.avg_log_density};
}

}  // namespace

GeneratorStepInfo generator_step_ratio(Generator& gen, const RatioEstimator& est,
                                       const TrainLoopConfig& cfg, Rng& rng) {
  switch (cfg.criterion) {
    case Criterion::kDikl:
      return generator_step_with_field(
          gen, cfg, rng, [&](const Eigen::MatrixXd& x, double t) { return est.score_diff_dikl(x, t); });
    case Criterion::kDijs:
      return generator_step_with_field(
          gen, cfg, rng, [&](const Eigen::MatrixXd& x, double t) { return est.score_diff_dijs(x, t); });
    case Criterion::kDirm:
      return generator_step_with_field(
          gen, cfg, rng, [&](const Eigen::MatrixXd& x, double t) { return est.score_diff_dirm(x, t); });
    case Criterion::kVsd:
      throw ConfigError("generator_step_ratio: vsd criterion uses generator_step_vsd");
  }
  throw ConfigError("generator_step_ratio: unknown criterion");
}

GeneratorStepInfo generator_step_vsd(Generator& gen, const ScoreNet& teacher,
                                     const ScoreNet& student, const TrainLoopConfig& cfg,
                                     Rng& rng) {
  return generator_step_with_field(gen, cfg, rng, [&](const Eigen::MatrixXd& x, double t) {
    return vsd_score_diff(teacher, student, x, t);
  });
}

double student_step(ScoreNet& student, const Generator& gen, const TrainLoopConfig& cfg,
                    Rng& rng) {
  const Eigen::MatrixXd x0 = gen.generate(cfg.batch, rng);
  const double t = cfg.schedule.sample_time(rng);
  return student.dsm_step(x0, t, rng);
}

DiffRatioResult run_diffratio(
    const TrainLoopConfig& cfg, const GaussianMixture& target, Rng& rng,
    const std::function<void(long, const Generator&, const RatioEstimator&)>& checkpoint_hook) {
  cfg.validate();
  if (cfg.criterion == Criterion::kVsd)
    throw ConfigError("run_diffratio: vsd criterion uses run_vsd");

  Rng init_rng(rng.next_u64());
  Rng train_rng(rng.next_u64());
  Rng eval_rng(rng.next_u64());

  const int d = target.dim();
  RatioEstimator est(d, cfg.shapes.classifier_hidden, cfg.aux_lr, cfg.schedule, init_rng);
  Generator gen(cfg.shapes.latent_dim, d, cfg.shapes.generator_hidden, cfg.generator_lr, init_rng);

  TrainTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(cfg.steps));
  const std::string crit = criterion_name(cfg.criterion);
  const Eigen::Index half = cfg.batch / 2;

  for (long step = 1; step <= cfg.steps; ++step) {
    try {
      double classifier_loss = 0.0;
      for (int j = 0; j < cfg.classifier_inner_steps; ++j) {
        const double t_cls = cfg.schedule.sample_time(train_rng);
        // classifier consumes generator samples produced before the update
        const Eigen::MatrixXd x_data = target.sample(half, train_rng);
        const Eigen::MatrixXd x_model = gen.generate(half, train_rng);
        const Eigen::MatrixXd xd = cfg.schedule.perturb(x_data, t_cls, train_rng).first;
        const Eigen::MatrixXd xm = cfg.schedule.perturb(x_model, t_cls, train_rng).first;
        classifier_loss = est.train_step(xd, xm, t_cls);
      }
      const GeneratorStepInfo info = generator_step_ratio(gen, est, cfg, train_rng);
      trace.steps.push_back(
          {step, crit, classifier_loss, info.surrogate, info.grad_norm, info.t});
      if (cfg.eval_interval > 0 && step % cfg.eval_interval == 0)
        trace.evals.push_back(eval_snapshot(step, gen, target, cfg.eval_samples, eval_rng));
      if (checkpoint_hook && cfg.checkpoint_interval > 0 && step % cfg.checkpoint_interval == 0)
        checkpoint_hook(step, gen, est);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " [training step " + std::to_string(step) +
                            "]");
    }
  }
  return {std::move(gen), std::move(est), std::move(trace)};
}

VsdResult run_vsd(const TrainLoopConfig& cfg, const GaussianMixture& target, Rng& rng,
                  const std::function<void(long, const Generator&, const ScoreNet&,
                                           const ScoreNet&)>& checkpoint_hook) {
  cfg.validate();
  Rng init_rng(rng.next_u64());
  Rng train_rng(rng.next_u64());
  Rng eval_rng(rng.next_u64());

  const int d = target.dim();
  ScoreNet teacher(d, cfg.shapes.score_hidden, cfg.aux_lr, cfg.schedule, ScoreRole::kTeacher,
                   init_rng);
  ScoreNet student(d, cfg.shapes.score_hidden, cfg.aux_lr, cfg.schedule, ScoreRole::kStudent,
                   init_rng);
  Generator gen(cfg.shapes.latent_dim, d, cfg.shapes.generator_hidden, cfg.generator_lr, init_rng);

  // Stage 1: teacher DSM on target data until the pretraining budget is spent.
  for (long step = 1; step <= cfg.teacher_pretrain_steps; ++step) {
    try {
      const Eigen::MatrixXd x0 = target.sample(cfg.batch, train_rng);
      const double t = cfg.schedule.sample_time(train_rng);
      teacher.dsm_step(x0, t, train_rng);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " [teacher pretraining step " +
                            std::to_string(step) + "]");
    }
  }
  student.copy_params_from(teacher);  // warm start; teacher stays frozen from here on

  TrainTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(cfg.steps));

  // Stage 2: interleave student DSM with generator updates.
  for (long step = 1; step <= cfg.steps; ++step) {
    try {
      double student_loss = 0.0;
      for (int j = 0; j < cfg.student_inner_steps; ++j)
        student_loss = student_step(student, gen, cfg, train_rng);
      const GeneratorStepInfo info = generator_step_vsd(gen, teacher, student, cfg, train_rng);
      trace.steps.push_back({step, "vsd", student_loss, info.surrogate, info.grad_norm, info.t});
      if (cfg.eval_interval > 0 && step % cfg.eval_interval == 0)
        trace.evals.push_back(eval_snapshot(step, gen, target, cfg.eval_samples, eval_rng));
      if (checkpoint_hook && cfg.checkpoint_interval > 0 && step % cfg.checkpoint_interval == 0)
        checkpoint_hook(step, gen, teacher, student);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " [training step " + std::to_string(step) +
                            "]");
    }
  }
  return {std::move(gen), std::move(teacher), std::move(student), std::move(trace)};
}

RatioEstimator train_ratio_estimator_frozen(const TrainLoopConfig& cfg,
                                            const GaussianMixture& target,
                                            const Generator& frozen_model, Rng& rng) {
  cfg.validate();
  Rng init_rng(rng.next_u64());
  Rng train_rng(rng.next_u64());
  RatioEstimator est(target.dim(), cfg.shapes.classifier_hidden, cfg.aux_lr, cfg.schedule,
                     init_rng);
  const Eigen::Index half = cfg.batch / 2;
  for (long step = 1; step <= cfg.steps; ++step) {
    try {
      for (int j = 0; j < cfg.classifier_inner_steps; ++j) {
        const double t = cfg.schedule.sample_time(train_rng);
        const Eigen::MatrixXd xd =
            cfg.schedule.perturb(target.sample(half, train_rng), t, train_rng).first;
        const Eigen::MatrixXd xm =
            cfg.schedule.perturb(frozen_model.generate(half, train_rng), t, train_rng).first;
        est.train_step(xd, xm, t);
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " [classifier step " + std::to_string(step) +
                            "]");
    }
  }
  return est;
}

ScoreNet train_score_net(const TrainLoopConfig& cfg, ScoreRole role, int data_dim,
                         const std::function<Eigen::MatrixXd(Eigen::Index, Rng&)>& sampler,
                         Rng& rng) {
  cfg.validate();
  Rng init_rng(rng.next_u64());
  Rng train_rng(rng.next_u64());
  ScoreNet net(data_dim, cfg.shapes.score_hidden, cfg.aux_lr, cfg.schedule, role, init_rng);
  for (long step = 1; step <= cfg.steps; ++step) {
    try {
      const Eigen::MatrixXd x0 = sampler(cfg.batch, train_rng);
      const double t = cfg.schedule.sample_time(train_rng);
      net.dsm_step(x0, t, train_rng);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " [dsm step " + std::to_string(step) + "]");
    }
  }
  return net;
}

Generator pretrain_generator_bias_mode(const GaussianMixture& target, const PretrainConfig& cfg,
                                       Rng& rng) {
  TrainLoopConfig loop;
  loop.criterion = Criterion::kDijs;
  loop.steps = cfg.steps;
  loop.batch = cfg.batch;
  loop.generator_lr = cfg.generator_lr;
  loop.aux_lr = cfg.classifier_lr;
  loop.schedule = cfg.schedule;
  loop.shapes = cfg.shapes;
  DiffRatioResult result = run_diffratio(loop, target, rng);
  return std::move(result.generator);
}

Eigen::VectorXi mode_occupancy(const GaussianMixture& target, const Eigen::MatrixXd& samples) {
  const auto& comps = target.components();
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(comps.size()));
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    Eigen::Index best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const double d2 = (samples.row(r).transpose() - comps[k].mean).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<Eigen::Index>(k);
      }
    }
    ++counts[best];
  }
  return counts;
}

int covered_modes(const Eigen::VectorXi& occupancy, long min_count) {
  int covered = 0;
  for (Eigen::Index i = 0; i < occupancy.size(); ++i)
    if (occupancy[i] >= min_count) ++covered;
  return covered;
}

long coverage_min_count(Eigen::Index n_samples) {
  return std::max<long>(1, static_cast<long>(n_samples / 2000));
}

}  // namespace ratio_lab
