#include <cmath>

#include "doctest.h"
#include "ratio_lab/errors.hpp"
#include "ratio_lab/kde.hpp"
#include "ratio_lab/score_net.hpp"

using namespace ratio_lab;

namespace {

const NoiseSchedule kSchedule(0.1, 20.0, 1.5);

ScoreNet make_score_net(std::uint64_t seed, ScoreRole role = ScoreRole::kTeacher) {
  Rng rng(seed);
  return ScoreNet(2, {16, 16}, 1e-3, kSchedule, role, rng);
}

GaussianMixture compact_mixture(std::uint64_t seed) {
  return make_paper_mixture(seed, 6, {-2.0, 2.0}, {std::log(0.3), std::log(1.0)});
}

}  // namespace

TEST_CASE("dsm loss is zero when the residual vanishes") {
  // zero network, zero injected noise: target is exactly zero
  ScoreNet net(Mlp({3, 8, 2}), AdamState(0, 1e-3), kSchedule, ScoreRole::kTeacher, 2);
  Rng rng(1);
  const Eigen::MatrixXd x0 = rng.normal_matrix(16, 2);
  const auto r = net.dsm_loss_with_eps(x0, 2.0, Eigen::MatrixXd::Zero(16, 2));
  CHECK(r.loss == 0.0);
  CHECK(r.param_grad.isZero(0.0));
}

TEST_CASE("dsm loss of a zero network matches the chi-square expectation d/sigma^2") {
  ScoreNet net(Mlp({3, 16, 2}), AdamState(0, 1e-3), kSchedule, ScoreRole::kTeacher, 2);
  Rng rng(2);
  const double t = 2.0;
  const Eigen::Index n = 16384;
  const auto r = net.dsm_loss(Eigen::MatrixXd::Zero(n, 2), t, rng);
  const double expected = 2.0 / (t * t);
  // per-row squared norm over sigma^2 is chi-square with 2 dof; 5 sigma bound
  const double bound = 5.0 * (2.0 / (t * t)) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(r.loss - expected) < bound);
}

TEST_CASE("vsd score difference is the elementwise network difference") {
  const ScoreNet teacher = make_score_net(3);
  const ScoreNet student = make_score_net(4, ScoreRole::kStudent);
  Rng rng(5);
  const Eigen::MatrixXd x = rng.normal_matrix(8, 2);
  const double t = 1.3;
  const Eigen::MatrixXd diff = vsd_score_diff(teacher, student, x, t);
  CHECK((diff - (student.score(x, t) - teacher.score(x, t))).isZero(0.0));

  ScoreNet copy = make_score_net(3);  // identical seed: identical parameters
  CHECK(vsd_score_diff(teacher, copy, x, t).isZero(0.0));
}

TEST_CASE("copy_params_from transfers parameters and resets moments") {
  const ScoreNet teacher = make_score_net(6);
  ScoreNet student = make_score_net(7, ScoreRole::kStudent);
  student.copy_params_from(teacher);
  CHECK(student.net().params() == teacher.net().params());
  CHECK(student.optimizer().step == 0);
  CHECK(student.optimizer().m.isZero(0.0));
}

TEST_CASE("scott bandwidth formula and properties") {
  const Eigen::VectorXd unit = Eigen::VectorXd::Ones(2);
  CHECK(scott_bandwidth(10000, 2, unit) == doctest::Approx(0.21544346900318834).epsilon(1e-12));
  CHECK(scott_bandwidth(10000, 2, 2.0 * unit) ==
        doctest::Approx(2.0 * scott_bandwidth(10000, 2, unit)).epsilon(1e-14));
  CHECK(scott_bandwidth(100000, 2, unit) < scott_bandwidth(10000, 2, unit));
  CHECK_THROWS_AS(scott_bandwidth(1, 2, unit), ConfigError);
  CHECK_THROWS_AS(scott_bandwidth(100, 2, Eigen::VectorXd::Zero(2)), ConfigError);
}

TEST_CASE("kde with coincident support is a single-Gaussian score") {
  Eigen::MatrixXd support(2, 2);
  support << 1.0, -2.0, 1.0, -2.0;
  const double h = 0.8, sigma = 0.6;
  const KdeOracle oracle(support, h);
  const Eigen::Vector2d x(2.0, 1.0);
  const Eigen::VectorXd s = oracle.score(x, sigma);
  const Eigen::Vector2d expected = -(x - Eigen::Vector2d(1.0, -2.0)) / (h * h + sigma * sigma);
  CHECK((s - expected).norm() < 1e-12);
}

TEST_CASE("kde score matches finite differences of its log-density") {
  Rng rng(8);
  const GaussianMixture m = compact_mixture(42);
  const KdeOracle oracle = KdeOracle::from_samples(m.sample(500, rng));
  const double sigma = 0.9;
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd x = 2.5 * rng.normal_vector(2);
    const Eigen::VectorXd analytic = oracle.score(x, sigma);
    Eigen::VectorXd numeric(2);
    const double h = 1e-5;
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd hi = x, lo = x;
      hi[k] += h;
      lo[k] -= h;
      numeric[k] = (oracle.log_density(hi, sigma) - oracle.log_density(lo, sigma)) / (2 * h);
    }
    CHECK((analytic - numeric).norm() <= 1e-6 * std::max(1.0, numeric.norm()));
  }
}

TEST_CASE("kde score equals the score of its explicit mixture construction") {
  Rng rng(9);
  const GaussianMixture m = compact_mixture(43);
  const KdeOracle oracle = KdeOracle::from_samples(m.sample(200, rng));
  const double sigma = 0.7;
  const GaussianMixture explicit_mixture = oracle.as_mixture(sigma);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = 3.0 * rng.normal_vector(2);
    const Eigen::VectorXd a = oracle.score(x, sigma);
    const Eigen::VectorXd b = explicit_mixture.score(x);
    CHECK((a - b).norm() <= 1e-10 * std::max(1.0, b.norm()));
  }
}

TEST_CASE("kde of a large support sample tracks the true noised score") {
  // Scott bandwidth must be small next to sigma for the oracle to be sharp,
  // hence the compact target and the large support here.
  Rng rng(10);
  const GaussianMixture m = compact_mixture(44);
  const KdeOracle oracle = KdeOracle::from_samples(m.sample(100000, rng));
  for (const double sigma : {1.0, 2.0}) {
    const GaussianMixture truth = m.noised(sigma);
    const Eigen::MatrixXd probes =
        m.sample(1000, rng) + sigma * rng.normal_matrix(1000, 2);
    const Eigen::MatrixXd est = oracle.score_batch(probes, sigma);
    const Eigen::MatrixXd ref = truth.score_batch(probes);
    CHECK((est - ref).norm() / ref.norm() < 0.05);
  }
}

TEST_CASE("true_score_diff is near zero for a self-consistent model") {
  Rng rng(11);
  const GaussianMixture m = compact_mixture(45);
  const KdeOracle oracle = KdeOracle::from_samples(m.sample(20000, rng));
  const double t = 1.0;  // sigma = t
  const Eigen::MatrixXd probes = m.sample(500, rng) + t * rng.normal_matrix(500, 2);
  const Eigen::MatrixXd diff = true_score_diff(m, oracle, probes, t);
  const Eigen::MatrixXd ref = m.noised(t).score_batch(probes);
  CHECK(diff.norm() / ref.norm() < 0.1);

  // deterministic given fixed support and probes
  CHECK(true_score_diff(m, oracle, probes, t) == diff);
}

TEST_CASE("true_score_diff recovers the closed form for a shifted model") {
  Rng rng(12);
  const GaussianMixture p = compact_mixture(46);
  const Eigen::Vector2d shift(1.5, -0.8);
  std::vector<MixtureComponent> comps = p.components();
  for (auto& c : comps) c.mean += shift;
  const GaussianMixture q(comps);

  const KdeOracle oracle = KdeOracle::from_samples(q.sample(20000, rng));
  const double t = 1.0;
  const Eigen::MatrixXd probes = q.sample(500, rng) + t * rng.normal_matrix(500, 2);
  const Eigen::MatrixXd est = true_score_diff(p, oracle, probes, t);

  const GaussianMixture p_noised = p.noised(t);
  Eigen::MatrixXd expected(probes.rows(), 2);
  for (Eigen::Index r = 0; r < probes.rows(); ++r) {
    const Eigen::VectorXd x = probes.row(r).transpose();
    expected.row(r) = (p_noised.score(x - shift) - p_noised.score(x)).transpose();
  }
  CHECK((est - expected).norm() / expected.norm() < 0.1);
}

TEST_CASE("kde persistence round-trips bitwise") {
  Rng rng(13);
  const KdeOracle oracle = KdeOracle::from_samples(rng.normal_matrix(64, 2));
  const std::string path = "/tmp/ratio_lab_test_kde.bin";
  oracle.save(path);
  const KdeOracle back = KdeOracle::load(path);
  CHECK(back.bandwidth() == oracle.bandwidth());
  CHECK(back.support() == oracle.support());
}

TEST_CASE("kde rejects degenerate construction") {
  CHECK_THROWS_AS(KdeOracle(Eigen::MatrixXd::Zero(1, 2), 0.5), ConfigError);
  CHECK_THROWS_AS(KdeOracle(Eigen::MatrixXd::Zero(4, 2), 0.0), ConfigError);
}

TEST_CASE("tweedie mean closed forms") {
  const Eigen::Vector2d x(1.0, -2.0);
  const double beta = 0.19;
  CHECK((tweedie_mean(Eigen::Vector2d::Zero(), x, beta) - x / std::sqrt(1.0 - beta)).norm() <
        1e-14);
  // standard-normal marginal: score = -x gives sqrt(1-beta) x
  CHECK((tweedie_mean(-x, x, beta) - std::sqrt(1.0 - beta) * x).norm() < 1e-14);
  // continuity at beta -> 0
  CHECK((tweedie_mean(-x, x, 1e-12) - x).norm() < 1e-9);
  CHECK_THROWS_AS(tweedie_mean(-x, x, 0.0), DomainError);
  CHECK_THROWS_AS(tweedie_mean(-x, x, 1.0), DomainError);
}
