#ifndef RATIO_LAB_CONFIG_HPP_
#define RATIO_LAB_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ratio_lab/gaussian_mixture.hpp"
#include "ratio_lab/trainer.hpp"

namespace ratio_lab {

/// Target distribution spec: either a path to a serialized mixture or the
/// parameters of a freshly generated one (seeded from the "mixture"
/// substream of the run seed).
struct TargetSpec {
  std::string path;  // when set, load instead of generating
  int n_components = 40;
  int dim = 2;
  Interval mean_range{-40.0, 40.0};
  Interval logvar_range{-1.2039728043259361, 1.0986122886681098};  // log 0.3 .. log 3.0
};

struct EvalSection {
  int n_levels = 10;
  int probes_per_level = 1000;
  long kde_samples = 10000;
  long n_samples = 10000;
  int histogram_bins = 50;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string subject = "generator";  // "generator" | "target"
};

struct ResampleSection {
  std::vector<int> m_list{1, 10, 100};
  int k_noise_draws = 1;
  long n_outputs = 10000;
  double t_min_override = -1.0;  // negative: use the schedule's t_min
};

struct PretrainSection {
  long steps = 6000;
  int batch = 512;
  double generator_lr = 1e-3;
  double classifier_lr = 1e-3;
  int latent_dim = 2;
  std::vector<int> generator_hidden{128, 128, 128};
  std::vector<int> classifier_hidden{128, 128, 128};
};

struct TrainingSection {
  std::string criterion = "dikl";
  long steps = 10000;
  int batch = 1024;
  double generator_lr = 1e-4;
  double aux_lr = 1e-4;
  int classifier_inner_steps = 1;
  int student_inner_steps = 1;
  long teacher_pretrain_steps = 10000;
  long eval_interval = 0;
  int eval_samples = 2048;
  long checkpoint_interval = 0;
};

struct ArtifactsSection {
  std::string generator;   // checkpoint paths consumed by eval/bias/resample
  std::string classifier;
  std::string teacher;
  std::string student;
};

/// Full run specification. JSON is the primary interface: parsing rejects
/// unknown keys at every level and reports offending field paths. The
/// published schema lives at schema/experiment_config.schema.json.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "runs/out";
  TargetSpec target;
  double t_min = 0.1;
  double t_max = 20.0;
  double power = 1.5;
  std::string weighting = "sigma2";
  NetworkShapes networks;
  TrainingSection training;
  PretrainSection pretrain;
  EvalSection eval;
  ResampleSection resample;
  ArtifactsSection artifacts;

  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  /// Canonical full dump (defaults filled in, keys sorted); input to the
  /// manifest hash.
  std::string canonical_json_string() const;

  NoiseSchedule schedule() const { return NoiseSchedule(t_min, t_max, power); }
  TrainLoopConfig train_loop() const;
  PretrainConfig pretrain_config() const;

  /// Loads target.path when set, otherwise generates the canonical mixture
  /// from the "mixture" substream of the run seed.
  GaussianMixture make_target() const;
};

/// FNV-1a hash of a string, hex-encoded; used for the manifest config hash.
std::string content_hash(const std::string& text);

/// Manifest JSON written alongside every command's outputs.
std::string make_manifest(const std::string& command, const ExperimentConfig& config);

}  // namespace ratio_lab

#endif  // RATIO_LAB_CONFIG_HPP_
