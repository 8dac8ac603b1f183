#include <cmath>

#include "doctest.h"
#include "ratio_lab/errors.hpp"
#include "ratio_lab/ratio_estimator.hpp"

using namespace ratio_lab;

namespace {

const NoiseSchedule kSchedule(0.1, 20.0, 1.5);

RatioEstimator random_estimator(std::uint64_t seed, std::vector<int> hidden = {16, 16}) {
  Rng rng(seed);
  return RatioEstimator(2, hidden, 1e-3, kSchedule, rng);
}

RatioEstimator zero_estimator() {
  Mlp net({3, 8, 1});  // zero params
  return RatioEstimator(std::move(net), AdamState(0, 1e-3), kSchedule, 2);
}

// Linear logit l(x) = w.x + b, ignoring the time feature.
RatioEstimator linear_estimator(const Eigen::Vector2d& w, double b) {
  Mlp net({3, 1});
  net.params() << w[0], w[1], 0.0, b;
  return RatioEstimator(std::move(net), AdamState(4, 1e-3), kSchedule, 2);
}

}  // namespace

TEST_CASE("uninformative classifier has loss log 2") {
  RatioEstimator est = zero_estimator();
  Rng rng(1);
  const Eigen::MatrixXd xd = rng.normal_matrix(16, 2);
  const Eigen::MatrixXd xm = rng.normal_matrix(16, 2);
  const auto r = est.classifier_loss(xd, xm, 1.0);
  CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("hand-evaluated loss on one-point batches") {
  // unit weight on x0: l(data=(1,0)) = 1, l(model=(-1,0)) = -1
  RatioEstimator est = linear_estimator({1.0, 0.0}, 0.0);
  Eigen::MatrixXd xd(1, 2), xm(1, 2);
  xd << 1.0, 0.0;
  xm << -1.0, 0.0;
  const auto r = est.classifier_loss(xd, xm, 1.0);
  CHECK(r.loss == doctest::Approx(0.31326168751822286).epsilon(1e-14));  // softplus(-1)
}

TEST_CASE("perfect separation drives the loss to zero") {
  RatioEstimator est = linear_estimator({200.0, 0.0}, 0.0);
  Eigen::MatrixXd xd(2, 2), xm(2, 2);
  xd << 1.0, 0.0, 2.0, 0.0;
  xm << -1.0, 0.0, -2.0, 0.0;
  const auto r = est.classifier_loss(xd, xm, 1.0);
  CHECK(r.loss < 1e-30);
  CHECK(r.loss >= 0.0);
}

TEST_CASE("unequal batch sizes are rejected") {
  RatioEstimator est = zero_estimator();
  Rng rng(2);
  CHECK_THROWS_AS(est.classifier_loss(rng.normal_matrix(4, 2), rng.normal_matrix(5, 2), 1.0),
                  ConfigError);
}

TEST_CASE("ratio weight is exp of the logit") {
  RatioEstimator zero = zero_estimator();
  CHECK(zero.ratio_weight(Eigen::Vector2d(0.3, -0.7), 2.0) == 1.0);

  RatioEstimator est = linear_estimator({0.0, 0.0}, std::log(3.0));
  CHECK(est.ratio_weight(Eigen::Vector2d(5.0, 5.0), 1.0) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("zero-weight classifier has zero score-difference fields") {
  RatioEstimator est = zero_estimator();
  Rng rng(3);
  const Eigen::MatrixXd x = rng.normal_matrix(8, 2);
  CHECK(est.score_diff_dikl(x, 0.5).isZero(0.0));
  CHECK(est.score_diff_dijs(x, 0.5).isZero(0.0));
  CHECK(est.score_diff_dirm(x, 0.5).isZero(0.0));
}

TEST_CASE("dikl field of a linear logit is the constant -w") {
  const Eigen::Vector2d w(0.8, -1.1);
  RatioEstimator est = linear_estimator(w, 0.4);
  Rng rng(4);
  const Eigen::MatrixXd x = rng.normal_matrix(6, 2);
  const Eigen::MatrixXd field = est.score_diff_dikl(x, 1.0);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    CHECK((field.row(r).transpose() + w).norm() < 1e-14);
}

TEST_CASE("at l = 0 the dijs and dirm fields are half of dikl") {
  // w.x = 0 on the chosen points, with nonzero gradient w
  RatioEstimator est = linear_estimator({1.0, 1.0}, 0.0);
  Eigen::MatrixXd x(2, 2);
  x << 1.0, -1.0, 2.5, -2.5;
  const Eigen::MatrixXd dikl = est.score_diff_dikl(x, 1.0);
  const Eigen::MatrixXd dijs = est.score_diff_dijs(x, 1.0);
  const Eigen::MatrixXd dirm = est.score_diff_dirm(x, 1.0);
  CHECK((dijs - 0.5 * dikl).norm() < 1e-14);
  CHECK((dirm - 0.5 * dikl).norm() < 1e-14);
}

TEST_CASE("algebraic identities at 1000 random points and times") {
  RatioEstimator est = random_estimator(77);
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const double t = kSchedule.sample_time(rng);
    const Eigen::MatrixXd x = 4.0 * rng.normal_matrix(100, 2);
    const Eigen::VectorXd l = est.logits(x, t);
    const Eigen::VectorXd c = est.probability(x, t);
    const Eigen::VectorXd w = est.ratio_weights(x, t);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      // logit(1-c) = log(1-c) - log(c) = -l
      const double logit_1mc = std::log1p(-c[r]) - std::log(c[r]);
      CHECK(std::abs(logit_1mc - (-l[r])) < 1e-10);
      CHECK(std::abs(w[r] - std::exp(l[r])) < 1e-10 * std::max(1.0, std::exp(l[r])));
      CHECK(c[r] > 0.0);
      CHECK(c[r] < 1.0);
    }
    const Eigen::MatrixXd dikl = est.score_diff_dikl(x, t);
    const Eigen::MatrixXd dijs = est.score_diff_dijs(x, t);
    const Eigen::MatrixXd dirm = est.score_diff_dirm(x, t);
    CHECK((dijs + dirm - dikl).norm() <= 1e-10 * std::max(1.0, dikl.norm()));
  }
}

TEST_CASE("field evaluation does not mutate classifier state") {
  RatioEstimator est = random_estimator(99);
  const Eigen::VectorXd before = est.net().params();
  const long step_before = est.optimizer().step;
  Rng rng(6);
  const Eigen::MatrixXd x = rng.normal_matrix(16, 2);
  est.score_diff_dikl(x, 1.0);
  est.score_diff_dijs(x, 2.0);
  est.score_diff_dirm(x, 0.5);
  est.ratio_weights(x, 1.0);
  CHECK(est.net().params() == before);
  CHECK(est.optimizer().step == step_before);
}

TEST_CASE("train_step moves parameters and reports finite loss") {
  RatioEstimator est = random_estimator(123);
  Rng rng(7);
  const Eigen::VectorXd before = est.net().params();
  const Eigen::MatrixXd shifted = rng.normal_matrix(32, 2).array() + 2.0;
  const double loss = est.train_step(rng.normal_matrix(32, 2), shifted, 1.0);
  CHECK(std::isfinite(loss));
  CHECK(est.net().params() != before);
  CHECK(est.optimizer().step == 1);
}
