#include <cmath>

#include "doctest.h"
#include "ratio_lab/errors.hpp"
#include "ratio_lab/trainer.hpp"

using namespace ratio_lab;

namespace {

const NoiseSchedule kSchedule(0.1, 20.0, 1.5);

GaussianMixture small_mixture(std::uint64_t seed) {
  return make_paper_mixture(seed, 4, {-4.0, 4.0}, {std::log(0.5), std::log(1.0)});
}

TrainLoopConfig tiny_config(Criterion criterion) {
  TrainLoopConfig cfg;
  cfg.criterion = criterion;
  cfg.steps = 10;
  cfg.batch = 32;
  cfg.generator_lr = 1e-3;
  cfg.aux_lr = 1e-3;
  cfg.teacher_pretrain_steps = 10;
  cfg.schedule = kSchedule;
  cfg.shapes.generator_hidden = {16, 16};
  cfg.shapes.classifier_hidden = {16, 16};
  cfg.shapes.score_hidden = {16, 16};
  return cfg;
}

// Bayes logit for q = N(delta, I) vs p = N(0, I), both noised at sigma,
// as a linear network over (x, log sigma) with the time weight zeroed.
RatioEstimator bayes_pair_classifier(const Eigen::Vector2d& delta, double sigma,
                                     const NoiseSchedule& schedule) {
  Mlp net({3, 1});
  const double denom = 2.0 * (1.0 + sigma * sigma);
  net.params() << -2.0 * delta[0] / denom, -2.0 * delta[1] / denom, 0.0,
      delta.squaredNorm() / denom;
  return RatioEstimator(std::move(net), AdamState(4, 1e-3), schedule, 2);
}

}  // namespace

TEST_CASE("config validation rejects odd batches and bad rates") {
  TrainLoopConfig cfg = tiny_config(Criterion::kDikl);
  cfg.batch = 33;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config(Criterion::kDikl);
  cfg.steps = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config(Criterion::kDikl);
  cfg.generator_lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("criterion names round-trip") {
  for (const Criterion c :
       {Criterion::kDikl, Criterion::kDijs, Criterion::kDirm, Criterion::kVsd})
    CHECK(criterion_from_name(criterion_name(c)) == c);
  CHECK_THROWS_AS(criterion_from_name("nope"), ConfigError);
}

TEST_CASE("generator surrogate gradient matches finite differences of the detached scalar") {
  Rng init(3);
  const Generator gen(2, 2, {3}, 1e-3, init);
  RatioEstimator est = bayes_pair_classifier({1.0, 0.5}, 1.0, kSchedule);

  Rng rng(5);
  const Eigen::Index batch = 4;
  const Eigen::MatrixXd z = rng.normal_matrix(batch, 2);
  const double t = 1.0;
  const Eigen::MatrixXd eps = rng.normal_matrix(batch, 2);
  const Eigen::MatrixXd xt = gen.forward(z) + t * eps;
  const Eigen::MatrixXd v = est.score_diff_dikl(xt, t);  // held fixed below
  const double w = kSchedule.weight(t);
  const double scale = w / static_cast<double>(batch);

  const Eigen::VectorXd analytic = gen.param_grad(z, scale * v);

  auto surrogate = [&](const Eigen::VectorXd& params) {
    Mlp net({2, 3, 2});
    net.params() = params;
    const Eigen::MatrixXd x0 = net.forward(z);
    return scale * (v.array() * (x0 + t * eps).array()).sum();
  };
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < gen.net().param_count(); ++k) {
    Eigen::VectorXd hi = gen.net().params(), lo = gen.net().params();
    hi[k] += h;
    lo[k] -= h;
    const double numeric = (surrogate(hi) - surrogate(lo)) / (2 * h);
    CHECK(std::abs(analytic[k] - numeric) <= 1e-8 * std::max(1.0, std::abs(numeric)));
  }
}

TEST_CASE("zero field means zero generator update") {
  Rng init(7);
  Generator gen(2, 2, {8}, 1e-3, init);
  const Eigen::VectorXd before = gen.net().params();
  // zero-weight classifier: every field is identically zero
  RatioEstimator zero(Mlp({3, 8, 1}), AdamState(0, 1e-3), kSchedule, 2);
  TrainLoopConfig cfg = tiny_config(Criterion::kDikl);
  cfg.shapes.generator_hidden = {8};
  Rng rng(9);
  const GeneratorStepInfo info = generator_step_ratio(gen, zero, cfg, rng);
  CHECK(info.grad_norm == 0.0);
  CHECK(info.surrogate == 0.0);
  CHECK(gen.net().params() == before);  // adam moves nothing on a zero gradient
}

TEST_CASE("generator mean drifts toward the target under a frozen Bayes classifier") {
  // q starts at N(delta, ~0), p = N(0, I); the dikl field is ~delta/(1+sigma^2)
  const Eigen::Vector2d delta(3.0, 0.0);
  const NoiseSchedule narrow(1.0, 1.0 + 1e-7, 1.0);  // t is effectively 1
  RatioEstimator est = bayes_pair_classifier(delta, 1.0, narrow);

  Mlp gnet({2, 2});  // zero weights, bias = delta: a point mass at delta
  gnet.params().tail(2) = delta;
  Generator gen(std::move(gnet), AdamState(6, 5e-2), 2);

  TrainLoopConfig cfg = tiny_config(Criterion::kDikl);
  cfg.schedule = narrow;
  cfg.batch = 256;
  Rng rng(11);
  Rng eval_rng(12);
  const Eigen::MatrixXd z_eval = eval_rng.normal_matrix(512, 2);

  double prev = gen.forward(z_eval).col(0).mean();
  CHECK(prev == doctest::Approx(3.0));
  for (int block = 0; block < 10; ++block) {
    for (int i = 0; i < 5; ++i) generator_step_ratio(gen, est, cfg, rng);
    const double cur = gen.forward(z_eval).col(0).mean();
    CHECK(cur < prev);  // monotone drift toward the data mean
    prev = cur;
  }
  CHECK(prev < 1.5);
}

TEST_CASE("dikl generator gradient equals the dijs + dirm sum at matched batches") {
  Rng init(13);
  const Generator gen(2, 2, {16, 16}, 1e-3, init);
  Rng est_init(14);
  const RatioEstimator est(2, {16, 16}, 1e-3, kSchedule, est_init);

  Rng rng(15);
  const Eigen::MatrixXd z = rng.normal_matrix(64, 2);
  const double t = kSchedule.sample_time(rng);
  const Eigen::MatrixXd eps = rng.normal_matrix(64, 2);
  const Eigen::MatrixXd xt = gen.forward(z) + kSchedule.sigma(t) * eps;
  const double scale = kSchedule.weight(t) / 64.0;

  const Eigen::VectorXd g_dikl = gen.param_grad(z, scale * est.score_diff_dikl(xt, t));
  const Eigen::VectorXd g_dijs = gen.param_grad(z, scale * est.score_diff_dijs(xt, t));
  const Eigen::VectorXd g_dirm = gen.param_grad(z, scale * est.score_diff_dirm(xt, t));
  CHECK((g_dikl - g_dijs - g_dirm).norm() <= 1e-10 * std::max(1.0, g_dikl.norm()));
}

TEST_CASE("generator steps never touch the classifier; student steps never touch the generator") {
  Rng init(17);
  Generator gen(2, 2, {16}, 1e-3, init);
  Rng est_init(18);
  RatioEstimator est(2, {16}, 1e-3, kSchedule, est_init);
  TrainLoopConfig cfg = tiny_config(Criterion::kDijs);
  cfg.shapes.generator_hidden = {16};

  const Eigen::VectorXd est_params = est.net().params();
  Rng rng(19);
  generator_step_ratio(gen, est, cfg, rng);
  CHECK(est.net().params() == est_params);

  Rng snet_init(20);
  ScoreNet student(2, {16}, 1e-3, kSchedule, ScoreRole::kStudent, snet_init);
  const Eigen::VectorXd gen_params = gen.net().params();
  student_step(student, gen, cfg, rng);
  CHECK(gen.net().params() == gen_params);
}

TEST_CASE("run_diffratio: trace shape, determinism, eval gating") {
  const GaussianMixture target = small_mixture(21);
  TrainLoopConfig cfg = tiny_config(Criterion::kDikl);

  Rng r1(100);
  const DiffRatioResult a = run_diffratio(cfg, target, r1);
  CHECK(a.trace.steps.size() == 10);
  CHECK(a.trace.evals.empty());  // eval_interval = 0: losses only

  Rng r2(100);
  const DiffRatioResult b = run_diffratio(cfg, target, r2);
  CHECK(a.generator.net().params() == b.generator.net().params());
  CHECK(a.estimator.net().params() == b.estimator.net().params());
  for (std::size_t i = 0; i < a.trace.steps.size(); ++i) {
    CHECK(a.trace.steps[i].classifier_loss == b.trace.steps[i].classifier_loss);
    CHECK(a.trace.steps[i].grad_norm == b.trace.steps[i].grad_norm);
  }

  cfg.eval_interval = 5;
  cfg.eval_samples = 128;
  Rng r3(100);
  const DiffRatioResult c = run_diffratio(cfg, target, r3);
  CHECK(c.trace.evals.size() == 2);
}

TEST_CASE("run_vsd: stage 2 leaves the teacher untouched") {
  const GaussianMixture target = small_mixture(22);
  TrainLoopConfig cfg = tiny_config(Criterion::kVsd);

  Rng r1(200);
  const VsdResult with_stage2 = run_vsd(cfg, target, r1);

  TrainLoopConfig stage1_only = cfg;
  stage1_only.steps = 1;  // steps >= 1; compare teacher states instead
  Rng r2(200);
  const VsdResult after_one = run_vsd(stage1_only, target, r2);
  CHECK(with_stage2.teacher.net().params() == after_one.teacher.net().params());
  CHECK(with_stage2.trace.steps.size() == 10);
  // student warm-started from the teacher and then trained further
  CHECK(with_stage2.student.net().params() != with_stage2.teacher.net().params());
}

TEST_CASE("student training on a frozen point-mass generator approaches the closed form") {
  Mlp gnet({2, 2});  // constant output p
  const Eigen::Vector2d point(0.7, -0.4);
  gnet.params().tail(2) = point;
  const Generator gen(std::move(gnet), AdamState(6, 1e-3), 2);

  // a compact time range keeps the 1/t^2 score scale tame for a short run
  const NoiseSchedule narrow(0.5, 5.0, 1.5);
  TrainLoopConfig cfg = tiny_config(Criterion::kVsd);
  cfg.schedule = narrow;
  cfg.batch = 512;
  cfg.aux_lr = 1e-3;
  Rng init(23);
  ScoreNet student(2, {64, 64, 64}, cfg.aux_lr, narrow, ScoreRole::kStudent, init);
  Rng rng(24);
  for (int i = 0; i < 3000; ++i) student_step(student, gen, cfg, rng);

  const double t = 1.0;  // optimal score is -(x - p)/t^2
  const Eigen::MatrixXd probes =
      point.transpose().replicate(400, 1) + t * rng.normal_matrix(400, 2);
  const Eigen::MatrixXd predicted = student.score(probes, t);
  Eigen::MatrixXd expected(400, 2);
  for (Eigen::Index r = 0; r < 400; ++r)
    expected.row(r) = -(probes.row(r).transpose() - point).transpose() / (t * t);
  CHECK((predicted - expected).norm() / expected.norm() < 0.15);
}

TEST_CASE("divergence in training aborts with a step-indexed error") {
  const GaussianMixture target = small_mixture(25);
  TrainLoopConfig cfg = tiny_config(Criterion::kDikl);
  cfg.steps = 50;
  // one Adam step moves weights to ~1e155, so two-layer products overflow
  cfg.generator_lr = 1e155;
  cfg.aux_lr = 1e155;
  Rng rng(300);
  CHECK_THROWS_AS(run_diffratio(cfg, target, rng), DivergenceError);
}

TEST_CASE("non-finite fields are caught at the generator step") {
  Mlp gnet({2, 4, 2});
  gnet.params().setConstant(std::numeric_limits<double>::quiet_NaN());
  Generator gen(std::move(gnet), AdamState(Mlp({2, 4, 2}).param_count(), 1e-3), 2);
  Rng est_init(26);
  const RatioEstimator est(2, {8}, 1e-3, kSchedule, est_init);
  TrainLoopConfig cfg = tiny_config(Criterion::kDikl);
  Rng rng(27);
  CHECK_THROWS_AS(generator_step_ratio(gen, est, cfg, rng), DivergenceError);
}

TEST_CASE("mode occupancy counts nearest-mean assignments") {
  const GaussianMixture target = small_mixture(26);
  Eigen::MatrixXd samples(3, 2);
  samples.row(0) = target.components()[0].mean.transpose();
  samples.row(1) = target.components()[0].mean.transpose();
  samples.row(2) = target.components()[2].mean.transpose();
  const Eigen::VectorXi occ = mode_occupancy(target, samples);
  CHECK(occ[0] == 2);
  CHECK(occ[2] == 1);
  CHECK(occ.sum() == 3);
  CHECK(covered_modes(occ, 1) == 2);
  CHECK(covered_modes(occ, 2) == 1);
  CHECK(coverage_min_count(10000) == 5);
  CHECK(coverage_min_count(100) == 1);
}
