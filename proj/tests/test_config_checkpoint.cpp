#include <string>

#include "doctest.h"
#include "json.hpp"
#include "ratio_lab/checkpoint.hpp"
#include "ratio_lab/config.hpp"
#include "ratio_lab/errors.hpp"

using namespace ratio_lab;

namespace {

const NoiseSchedule kSchedule(0.1, 20.0, 1.5);

std::string minimal_config() { return R"({"seed": 42})"; }

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const ExperimentConfig cfg = ExperimentConfig::from_json_string(minimal_config());
  CHECK(cfg.seed == 42);
  CHECK(cfg.t_min == 0.1);
  CHECK(cfg.t_max == 20.0);
  CHECK(cfg.power == 1.5);
  CHECK(cfg.training.steps == 10000);
  CHECK(cfg.training.batch == 1024);
  CHECK(cfg.training.generator_lr == 1e-4);
  CHECK(cfg.networks.generator_hidden == std::vector<int>{400, 400, 400});
  CHECK(cfg.target.n_components == 40);
  CHECK(cfg.eval.n_levels == 10);
  CHECK(cfg.eval.probes_per_level == 1000);
  CHECK(cfg.eval.kde_samples == 10000);
  CHECK(cfg.resample.m_list == std::vector<int>{1, 10, 100});
}

TEST_CASE("missing seed is a config error naming the field") {
  try {
    ExperimentConfig::from_json_string(R"({"out_dir": "x"})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("seed") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected with their path") {
  try {
    ExperimentConfig::from_json_string(R"({"seed": 1, "training": {"stepz": 5}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("training.stepz") != std::string::npos);
  }
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(R"({"seed": 1, "bogus": {}})"), ConfigError);
}

TEST_CASE("type and range violations are config errors") {
  CHECK_THROWS_AS(ExperimentConfig::from_json_string(R"({"seed": "one"})"), ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_string(R"({"seed": 1, "training": {"steps": "many"}})"),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_string(R"({"seed": 1, "target": {"mean_range": [2, -2]}})"),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_string(R"({"seed": 1, "schedule": {"t_min": 30.0}})"),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_string(R"({"seed": 1, "training": {"batch": 7}})"),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_string(R"({"seed": 1, "schedule": {"weighting": "uniform"}})"),
      ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json_string("not json"), ConfigError);
}

TEST_CASE("canonical dump and hash are stable") {
  const ExperimentConfig a = ExperimentConfig::from_json_string(minimal_config());
  const ExperimentConfig b = ExperimentConfig::from_json_string(minimal_config());
  CHECK(a.canonical_json_string() == b.canonical_json_string());
  CHECK(content_hash(a.canonical_json_string()) == content_hash(b.canonical_json_string()));

  ExperimentConfig c = a;
  c.training.steps = 5;
  CHECK(content_hash(a.canonical_json_string()) != content_hash(c.canonical_json_string()));
}

TEST_CASE("manifest carries command, hash, seed, version") {
  const ExperimentConfig cfg = ExperimentConfig::from_json_string(minimal_config());
  const auto doc = nlohmann::json::parse(make_manifest("train", cfg));
  CHECK(doc.at("command") == "train");
  CHECK(doc.at("seed") == 42);
  CHECK(doc.at("config_hash").get<std::string>().size() == 16);
  CHECK(doc.contains("version"));
}

TEST_CASE("make_target is deterministic per seed and honors the path override") {
  ExperimentConfig cfg = ExperimentConfig::from_json_string(minimal_config());
  cfg.target.n_components = 5;
  const GaussianMixture a = cfg.make_target();
  const GaussianMixture b = cfg.make_target();
  CHECK(a.components()[3].mean == b.components()[3].mean);

  const std::string path = "/tmp/ratio_lab_test_mixture.json";
  checkpoint::write_file(path, a.to_json_string());
  cfg.target.path = path;
  const GaussianMixture c = cfg.make_target();
  CHECK(c.components()[3].mean == a.components()[3].mean);

  cfg.target.path = "/tmp/ratio_lab_does_not_exist.json";
  CHECK_THROWS_AS(cfg.make_target(), MissingArtifactError);
}

TEST_CASE("ratio estimator checkpoints round-trip bitwise and carry the label tag") {
  Rng rng(1);
  RatioEstimator est(2, {8, 8}, 1e-3, kSchedule, rng);
  Rng data(2);
  est.train_step(data.normal_matrix(8, 2), data.normal_matrix(8, 2), 1.0);

  const std::string text = checkpoint::ratio_estimator_to_json(est);
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc.at("label_convention").at("y1") == "data");
  CHECK(doc.at("label_convention").at("y0") == "model");

  const RatioEstimator back = checkpoint::ratio_estimator_from_json(text);
  CHECK(back.net().params() == est.net().params());
  CHECK(back.optimizer().m == est.optimizer().m);
  CHECK(back.optimizer().v == est.optimizer().v);
  CHECK(back.optimizer().step == est.optimizer().step);
  CHECK(back.schedule().t_min() == est.schedule().t_min());

  // a second serialization is byte-identical
  CHECK(checkpoint::ratio_estimator_to_json(back) == text);
}

TEST_CASE("score net and generator checkpoints round-trip") {
  Rng rng(3);
  const ScoreNet teacher(2, {8}, 1e-3, kSchedule, ScoreRole::kTeacher, rng);
  const std::string stext = checkpoint::score_net_to_json(teacher);
  const ScoreNet sback = checkpoint::score_net_from_json(stext);
  CHECK(sback.net().params() == teacher.net().params());
  CHECK(sback.role() == ScoreRole::kTeacher);

  const Generator gen(3, 2, {8}, 1e-3, rng);
  const std::string gtext = checkpoint::generator_to_json(gen);
  const Generator gback = checkpoint::generator_from_json(gtext);
  CHECK(gback.net().params() == gen.net().params());
  CHECK(gback.latent_dim() == 3);

  CHECK_THROWS_AS(checkpoint::ratio_estimator_from_json(gtext), ConfigError);  // wrong kind
}

TEST_CASE("read_file distinguishes missing artifacts") {
  CHECK_THROWS_AS(checkpoint::read_file("/tmp/ratio_lab_nonexistent_artifact.json"),
                  MissingArtifactError);
}
