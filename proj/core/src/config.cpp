#include "ratio_lab/config.hpp"

#include <cinttypes>
#include <cmath>

#include "json.hpp"
#include "ratio_lab/checkpoint.hpp"
#include "ratio_lab/errors.hpp"
#include "ratio_lab/version.hpp"

namespace ratio_lab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

/// Walks an object, rejecting keys outside the allowed set.
void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  expect_object(j, path);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (key == k) {
        known = true;
        break;
      }
    if (!known) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long get_long(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

int get_int(const json& j, const std::string& path) {
  const long v = get_long(j, path);
  return static_cast<int>(v);
}

std::uint64_t get_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<int> get_int_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Interval get_interval(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [low, high]");
  Interval iv{get_double(j[0], path + "[0]"), get_double(j[1], path + "[1]")};
  if (iv.lo > iv.hi) fail(path, "interval low exceeds high");
  return iv;
}

void parse_target(const json& j, TargetSpec& out) {
  check_keys(j, "target", {"path", "n_components", "dim", "mean_range", "logvar_range"});
  if (j.contains("path")) out.path = get_string(j["path"], "target.path");
  if (j.contains("n_components")) out.n_components = get_int(j["n_components"], "target.n_components");
  if (j.contains("dim")) out.dim = get_int(j["dim"], "target.dim");
  if (j.contains("mean_range")) out.mean_range = get_interval(j["mean_range"], "target.mean_range");
  if (j.contains("logvar_range"))
    out.logvar_range = get_interval(j["logvar_range"], "target.logvar_range");
}

void parse_schedule(const json& j, ExperimentConfig& out) {
  check_keys(j, "schedule", {"t_min", "t_max", "power", "weighting"});
  if (j.contains("t_min")) out.t_min = get_double(j["t_min"], "schedule.t_min");
  if (j.contains("t_max")) out.t_max = get_double(j["t_max"], "schedule.t_max");
  if (j.contains("power")) out.power = get_double(j["power"], "schedule.power");
  if (j.contains("weighting")) out.weighting = get_string(j["weighting"], "schedule.weighting");
  if (out.weighting != "sigma2") fail("schedule.weighting", "only 'sigma2' is supported");
}

void parse_networks(const json& j, NetworkShapes& out) {
  check_keys(j, "networks",
             {"latent_dim", "generator_hidden", "classifier_hidden", "score_hidden"});
  if (j.contains("latent_dim")) out.latent_dim = get_int(j["latent_dim"], "networks.latent_dim");
  if (j.contains("generator_hidden"))
    out.generator_hidden = get_int_list(j["generator_hidden"], "networks.generator_hidden");
  if (j.contains("classifier_hidden"))
    out.classifier_hidden = get_int_list(j["classifier_hidden"], "networks.classifier_hidden");
  if (j.contains("score_hidden"))
    out.score_hidden = get_int_list(j["score_hidden"], "networks.score_hidden");
}

void parse_training(const json& j, TrainingSection& out) {
  check_keys(j, "training",
             {"criterion", "steps", "batch", "generator_lr", "aux_lr", "classifier_inner_steps",
              "student_inner_steps", "teacher_pretrain_steps", "eval_interval", "eval_samples",
              "checkpoint_interval"});
  if (j.contains("criterion")) out.criterion = get_string(j["criterion"], "training.criterion");
  criterion_from_name(out.criterion);  // validates
  if (j.contains("steps")) out.steps = get_long(j["steps"], "training.steps");
  if (j.contains("batch")) out.batch = get_int(j["batch"], "training.batch");
  if (j.contains("generator_lr"))
    out.generator_lr = get_double(j["generator_lr"], "training.generator_lr");
  if (j.contains("aux_lr")) out.aux_lr = get_double(j["aux_lr"], "training.aux_lr");
  if (j.contains("classifier_inner_steps"))
    out.classifier_inner_steps =
        get_int(j["classifier_inner_steps"], "training.classifier_inner_steps");
  if (j.contains("student_inner_steps"))
    out.student_inner_steps = get_int(j["student_inner_steps"], "training.student_inner_steps");
  if (j.contains("teacher_pretrain_steps"))
    out.teacher_pretrain_steps =
        get_long(j["teacher_pretrain_steps"], "training.teacher_pretrain_steps");
  if (j.contains("eval_interval"))
    out.eval_interval = get_long(j["eval_interval"], "training.eval_interval");
  if (j.contains("eval_samples")) out.eval_samples = get_int(j["eval_samples"], "training.eval_samples");
  if (j.contains("checkpoint_interval"))
    out.checkpoint_interval = get_long(j["checkpoint_interval"], "training.checkpoint_interval");
}

void parse_pretrain(const json& j, PretrainSection& out) {
  check_keys(j, "pretrain",
             {"steps", "batch", "generator_lr", "classifier_lr", "latent_dim", "generator_hidden",
              "classifier_hidden"});
  if (j.contains("steps")) out.steps = get_long(j["steps"], "pretrain.steps");
  if (j.contains("batch")) out.batch = get_int(j["batch"], "pretrain.batch");
  if (j.contains("generator_lr"))
    out.generator_lr = get_double(j["generator_lr"], "pretrain.generator_lr");
  if (j.contains("classifier_lr"))
    out.classifier_lr = get_double(j["classifier_lr"], "pretrain.classifier_lr");
  if (j.contains("latent_dim")) out.latent_dim = get_int(j["latent_dim"], "pretrain.latent_dim");
  if (j.contains("generator_hidden"))
    out.generator_hidden = get_int_list(j["generator_hidden"], "pretrain.generator_hidden");
  if (j.contains("classifier_hidden"))
    out.classifier_hidden = get_int_list(j["classifier_hidden"], "pretrain.classifier_hidden");
}

void parse_eval(const json& j, EvalSection& out) {
  check_keys(j, "eval",
             {"n_levels", "probes_per_level", "kde_samples", "n_samples", "histogram_bins",
              "seeds", "subject"});
  if (j.contains("n_levels")) out.n_levels = get_int(j["n_levels"], "eval.n_levels");
  if (j.contains("probes_per_level"))
    out.probes_per_level = get_int(j["probes_per_level"], "eval.probes_per_level");
  if (j.contains("kde_samples")) out.kde_samples = get_long(j["kde_samples"], "eval.kde_samples");
  if (j.contains("n_samples")) out.n_samples = get_long(j["n_samples"], "eval.n_samples");
  if (j.contains("histogram_bins"))
    out.histogram_bins = get_int(j["histogram_bins"], "eval.histogram_bins");
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array()) fail("eval.seeds", "expected an array of integers");
    out.seeds.clear();
    for (std::size_t i = 0; i < j["seeds"].size(); ++i)
      out.seeds.push_back(get_u64(j["seeds"][i], "eval.seeds[" + std::to_string(i) + "]"));
    if (out.seeds.empty()) fail("eval.seeds", "needs at least one seed");
  }
  if (j.contains("subject")) {
    out.subject = get_string(j["subject"], "eval.subject");
    if (out.subject != "generator" && out.subject != "target")
      fail("eval.subject", "expected 'generator' or 'target'");
  }
}

void parse_resample(const json& j, ResampleSection& out) {
  check_keys(j, "resample", {"m_list", "k_noise_draws", "n_outputs", "t_min_override"});
  if (j.contains("m_list")) out.m_list = get_int_list(j["m_list"], "resample.m_list");
  if (j.contains("k_noise_draws"))
    out.k_noise_draws = get_int(j["k_noise_draws"], "resample.k_noise_draws");
  if (j.contains("n_outputs")) out.n_outputs = get_long(j["n_outputs"], "resample.n_outputs");
  if (j.contains("t_min_override"))
    out.t_min_override = get_double(j["t_min_override"], "resample.t_min_override");
}

void parse_artifacts(const json& j, ArtifactsSection& out) {
  check_keys(j, "artifacts", {"generator", "classifier", "teacher", "student"});
  if (j.contains("generator")) out.generator = get_string(j["generator"], "artifacts.generator");
  if (j.contains("classifier")) out.classifier = get_string(j["classifier"], "artifacts.classifier");
  if (j.contains("teacher")) out.teacher = get_string(j["teacher"], "artifacts.teacher");
  if (j.contains("student")) out.student = get_string(j["student"], "artifacts.student");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(doc, "",
             {"seed", "out_dir", "target", "schedule", "networks", "training", "pretrain", "eval",
              "resample", "artifacts"});
  ExperimentConfig cfg;
  if (!doc.contains("seed")) fail("seed", "missing required field");
  cfg.seed = get_u64(doc["seed"], "seed");
  if (doc.contains("out_dir")) cfg.out_dir = get_string(doc["out_dir"], "out_dir");
  if (doc.contains("target")) parse_target(doc["target"], cfg.target);
  if (doc.contains("schedule")) parse_schedule(doc["schedule"], cfg);
  if (doc.contains("networks")) parse_networks(doc["networks"], cfg.networks);
  if (doc.contains("training")) parse_training(doc["training"], cfg.training);
  if (doc.contains("pretrain")) parse_pretrain(doc["pretrain"], cfg.pretrain);
  if (doc.contains("eval")) parse_eval(doc["eval"], cfg.eval);
  if (doc.contains("resample")) parse_resample(doc["resample"], cfg.resample);
  if (doc.contains("artifacts")) parse_artifacts(doc["artifacts"], cfg.artifacts);

  // construction checks ranges
  NoiseSchedule(cfg.t_min, cfg.t_max, cfg.power);
  cfg.train_loop().validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_json_string(checkpoint::read_file(path));
}

std::string ExperimentConfig::canonical_json_string() const {
  // experiment-defining fields only: the output location does not change what
  // a run computes, so it stays out of the manifest hash
  json doc;
  doc["seed"] = seed;
  doc["target"] = {{"path", target.path},
                   {"n_components", target.n_components},
                   {"dim", target.dim},
                   {"mean_range", {target.mean_range.lo, target.mean_range.hi}},
                   {"logvar_range", {target.logvar_range.lo, target.logvar_range.hi}}};
  doc["schedule"] = {{"t_min", t_min}, {"t_max", t_max}, {"power", power}, {"weighting", weighting}};
  doc["networks"] = {{"latent_dim", networks.latent_dim},
                     {"generator_hidden", networks.generator_hidden},
                     {"classifier_hidden", networks.classifier_hidden},
                     {"score_hidden", networks.score_hidden}};
  doc["training"] = {{"criterion", training.criterion},
                     {"steps", training.steps},
                     {"batch", training.batch},
                     {"generator_lr", training.generator_lr},
                     {"aux_lr", training.aux_lr},
                     {"classifier_inner_steps", training.classifier_inner_steps},
                     {"student_inner_steps", training.student_inner_steps},
                     {"teacher_pretrain_steps", training.teacher_pretrain_steps},
                     {"eval_interval", training.eval_interval},
                     {"eval_samples", training.eval_samples},
                     {"checkpoint_interval", training.checkpoint_interval}};
  doc["pretrain"] = {{"steps", pretrain.steps},
                     {"batch", pretrain.batch},
                     {"generator_lr", pretrain.generator_lr},
                     {"classifier_lr", pretrain.classifier_lr},
                     {"latent_dim", pretrain.latent_dim},
                     {"generator_hidden", pretrain.generator_hidden},
                     {"classifier_hidden", pretrain.classifier_hidden}};
  doc["eval"] = {{"n_levels", eval.n_levels},
                 {"probes_per_level", eval.probes_per_level},
                 {"kde_samples", eval.kde_samples},
                 {"n_samples", eval.n_samples},
                 {"histogram_bins", eval.histogram_bins},
                 {"seeds", eval.seeds},
                 {"subject", eval.subject}};
  doc["resample"] = {{"m_list", resample.m_list},
                     {"k_noise_draws", resample.k_noise_draws},
                     {"n_outputs", resample.n_outputs},
                     {"t_min_override", resample.t_min_override}};
  doc["artifacts"] = {{"generator", artifacts.generator},
                      {"classifier", artifacts.classifier},
                      {"teacher", artifacts.teacher},
                      {"student", artifacts.student}};
  return doc.dump(2);
}

TrainLoopConfig ExperimentConfig::train_loop() const {
  TrainLoopConfig loop;
  loop.criterion = criterion_from_name(training.criterion);
  loop.steps = training.steps;
  loop.batch = training.batch;
  loop.generator_lr = training.generator_lr;
  loop.aux_lr = training.aux_lr;
  loop.classifier_inner_steps = training.classifier_inner_steps;
  loop.student_inner_steps = training.student_inner_steps;
  loop.teacher_pretrain_steps = training.teacher_pretrain_steps;
  loop.schedule = schedule();
  loop.shapes = networks;
  loop.eval_interval = training.eval_interval;
  loop.eval_samples = training.eval_samples;
  loop.checkpoint_interval = training.checkpoint_interval;
  return loop;
}

PretrainConfig ExperimentConfig::pretrain_config() const {
  PretrainConfig cfg;
  cfg.steps = pretrain.steps;
  cfg.batch = pretrain.batch;
  cfg.generator_lr = pretrain.generator_lr;
  cfg.classifier_lr = pretrain.classifier_lr;
  cfg.schedule = schedule();
  cfg.shapes.latent_dim = pretrain.latent_dim;
  cfg.shapes.generator_hidden = pretrain.generator_hidden;
  cfg.shapes.classifier_hidden = pretrain.classifier_hidden;
  return cfg;
}

GaussianMixture ExperimentConfig::make_target() const {
  if (!target.path.empty())
    return GaussianMixture::from_json_string(checkpoint::read_file(target.path));
  return make_paper_mixture(substream_seed(seed, "mixture"), target.n_components,
                            target.mean_range, target.logvar_range, target.dim);
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return std::string(buf);
}

std::string make_manifest(const std::string& command, const ExperimentConfig& config) {
  json doc;
  doc["command"] = command;
  doc["config_hash"] = content_hash(config.canonical_json_string());
  doc["seed"] = config.seed;
  doc["version"] = kVersion;
  return doc.dump(2);
}

}  // namespace ratio_lab
