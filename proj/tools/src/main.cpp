#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ratio_lab/checkpoint.hpp"
#include "ratio_lab/config.hpp"
#include "ratio_lab/errors.hpp"
#include "ratio_lab/format.hpp"
#include "ratio_lab/metrics.hpp"
#include "ratio_lab/resampler.hpp"
#include "ratio_lab/trainer.hpp"
#include "ratio_lab/version.hpp"

namespace fs = std::filesystem;
using namespace ratio_lab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMissingArtifact = 3;
constexpr int kExitDivergence = 4;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<long> steps;
  std::optional<std::string> generator;
  std::optional<std::string> classifier;
  std::optional<std::string> teacher;
  std::optional<std::string> student;
};

struct ResampleFlags {
  std::optional<std::vector<int>> m_list;
  std::optional<int> k_noise_draws;
  std::optional<double> t_min_override;
  std::optional<long> n_outputs;
};

ExperimentConfig load_config(const CommonFlags& flags) {
  ExperimentConfig cfg = ExperimentConfig::from_file(flags.config_path);
  if (const char* env = std::getenv("RATIO_LAB_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("RATIO_LAB_SEED: expected an unsigned integer");
    }
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.out_dir) cfg.out_dir = *flags.out_dir;
  if (flags.steps) cfg.training.steps = *flags.steps;
  if (flags.generator) cfg.artifacts.generator = *flags.generator;
  if (flags.classifier) cfg.artifacts.classifier = *flags.classifier;
  if (flags.teacher) cfg.artifacts.teacher = *flags.teacher;
  if (flags.student) cfg.artifacts.student = *flags.student;
  cfg.train_loop().validate();
  return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void prepare_out_dir(const ExperimentConfig& cfg) { fs::create_directories(cfg.out_dir); }

void write_manifest(const ExperimentConfig& cfg, const std::string& command) {
  checkpoint::write_file(out_path(cfg, "manifest_" + command + ".json"),
                         make_manifest(command, cfg) + "\n");
}

void write_samples_csv(const std::string& path, const Eigen::MatrixXd& samples) {
  std::string text;
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    if (c > 0) text += ',';
    text += "x" + std::to_string(c);
  }
  text += '\n';
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
      if (c > 0) text += ',';
      text += format_double(samples(r, c));
    }
    text += '\n';
  }
  checkpoint::write_file(path, text);
}

Generator load_generator_artifact(const ExperimentConfig& cfg) {
  if (cfg.artifacts.generator.empty())
    throw MissingArtifactError("artifacts.generator: no generator checkpoint configured");
  return checkpoint::generator_from_json(checkpoint::read_file(cfg.artifacts.generator));
}

RatioEstimator load_classifier_artifact(const ExperimentConfig& cfg) {
  if (cfg.artifacts.classifier.empty())
    throw MissingArtifactError("artifacts.classifier: no classifier checkpoint configured");
  return checkpoint::ratio_estimator_from_json(checkpoint::read_file(cfg.artifacts.classifier));
}

int cmd_pretrain(const ExperimentConfig& cfg) {
  prepare_out_dir(cfg);
  const GaussianMixture target = cfg.make_target();
  checkpoint::write_file(out_path(cfg, "mixture.json"), target.to_json_string() + "\n");

  Rng rng(substream_seed(cfg.seed, "pretrain"));
  std::cout << "pretraining bias-mode generator (" << cfg.pretrain.steps << " steps)\n";
  const Generator gen = pretrain_generator_bias_mode(target, cfg.pretrain_config(), rng);
  checkpoint::write_file(out_path(cfg, "generator_pretrained.json"),
                         checkpoint::generator_to_json(gen) + "\n");

  Rng eval_rng(substream_seed(cfg.seed, "eval-generator"));
  const Eigen::MatrixXd samples = gen.generate(cfg.eval.n_samples, eval_rng);
  const Eigen::VectorXi occupancy = mode_occupancy(target, samples);
  const long min_count = coverage_min_count(samples.rows());
  const int covered = covered_modes(occupancy, min_count);

  nlohmann::json coverage;
  coverage["covered_modes"] = covered;
  coverage["n_components"] = static_cast<int>(target.n_components());
  coverage["min_count"] = min_count;
  coverage["n_samples"] = samples.rows();
  coverage["occupancy"] = std::vector<int>(occupancy.data(), occupancy.data() + occupancy.size());
  checkpoint::write_file(out_path(cfg, "coverage.json"), coverage.dump(2) + "\n");

  write_manifest(cfg, "pretrain");
  std::cout << "mode coverage: " << covered << "/" << target.n_components() << "\n";
  return kExitOk;
}

int cmd_train(const ExperimentConfig& cfg) {
  prepare_out_dir(cfg);
  const GaussianMixture target = cfg.make_target();
  checkpoint::write_file(out_path(cfg, "mixture.json"), target.to_json_string() + "\n");

  const TrainLoopConfig loop = cfg.train_loop();
  Rng rng(substream_seed(cfg.seed, "training"));
  std::cout << "training criterion=" << cfg.training.criterion << " steps=" << loop.steps << "\n";

  if (loop.criterion == Criterion::kVsd) {
    auto hook = [&](long, const Generator& g, const ScoreNet& teacher, const ScoreNet& student) {
      checkpoint::write_file(out_path(cfg, "generator_last.json"),
                             checkpoint::generator_to_json(g) + "\n");
      checkpoint::write_file(out_path(cfg, "teacher_last.json"),
                             checkpoint::score_net_to_json(teacher) + "\n");
      checkpoint::write_file(out_path(cfg, "student_last.json"),
                             checkpoint::score_net_to_json(student) + "\n");
    };
    VsdResult result = run_vsd(loop, target, rng, hook);
    checkpoint::write_file(out_path(cfg, "generator.json"),
                           checkpoint::generator_to_json(result.generator) + "\n");
    checkpoint::write_file(out_path(cfg, "teacher.json"),
                           checkpoint::score_net_to_json(result.teacher) + "\n");
    checkpoint::write_file(out_path(cfg, "student.json"),
                           checkpoint::score_net_to_json(result.student) + "\n");
    write_trace_csv(result.trace, out_path(cfg, "trace.csv"));
    if (loop.eval_interval > 0) write_eval_csv(result.trace, out_path(cfg, "eval.csv"));
  } else {
    auto hook = [&](long, const Generator& g, const RatioEstimator& est) {
      checkpoint::write_file(out_path(cfg, "generator_last.json"),
                             checkpoint::generator_to_json(g) + "\n");
      checkpoint::write_file(out_path(cfg, "classifier_last.json"),
                             checkpoint::ratio_estimator_to_json(est) + "\n");
    };
    DiffRatioResult result = run_diffratio(loop, target, rng, hook);
    checkpoint::write_file(out_path(cfg, "generator.json"),
                           checkpoint::generator_to_json(result.generator) + "\n");
    checkpoint::write_file(out_path(cfg, "classifier.json"),
                           checkpoint::ratio_estimator_to_json(result.estimator) + "\n");
    write_trace_csv(result.trace, out_path(cfg, "trace.csv"));
    if (loop.eval_interval > 0) write_eval_csv(result.trace, out_path(cfg, "eval.csv"));
  }
  write_manifest(cfg, "train");
  return kExitOk;
}

int cmd_bias_bench(const ExperimentConfig& cfg) {
  prepare_out_dir(cfg);
  const GaussianMixture target = cfg.make_target();
  checkpoint::write_file(out_path(cfg, "mixture.json"), target.to_json_string() + "\n");
  const Generator model = load_generator_artifact(cfg);

  TrainLoopConfig loop = cfg.train_loop();
  BiasReport report;
  for (const std::uint64_t s : cfg.eval.seeds) {
    std::cout << "bias-bench seed " << s << ": training classifier\n";
    Rng cls_rng(substream_seed(cfg.seed, "bias-classifier", s));
    const RatioEstimator est = train_ratio_estimator_frozen(loop, target, model, cls_rng);

    std::cout << "bias-bench seed " << s << ": training vsd teacher\n";
    Rng teacher_rng(substream_seed(cfg.seed, "bias-teacher", s));
    const ScoreNet teacher = train_score_net(
        loop, ScoreRole::kTeacher, target.dim(),
        [&](Eigen::Index n, Rng& r) { return target.sample(n, r); }, teacher_rng);

    std::cout << "bias-bench seed " << s << ": training vsd student\n";
    Rng student_rng(substream_seed(cfg.seed, "bias-student", s));
    const ScoreNet student = train_score_net(
        loop, ScoreRole::kStudent, target.dim(),
        [&](Eigen::Index n, Rng& r) { return model.generate(n, r); }, student_rng);

    std::vector<BiasMethod> methods;
    methods.push_back({"diffratio", [&](const Eigen::MatrixXd& x, double t) {
                         return est.score_diff_dikl(x, t);
                       }});
    methods.push_back({"vsd", [&](const Eigen::MatrixXd& x, double t) {
                         return vsd_score_diff(teacher, student, x, t);
                       }});

    BiasBenchmarkConfig bench;
    bench.n_levels = cfg.eval.n_levels;
    bench.probes_per_level = cfg.eval.probes_per_level;
    bench.kde_samples = cfg.eval.kde_samples;
    bench.seed = substream_seed(cfg.seed, "bias-eval", s);
    bench.schedule = cfg.schedule();
    BiasReport seed_report = run_bias_benchmark(target, model, methods, bench);
    for (auto& row : seed_report.rows) row.seed = s;  // report the user-facing seed
    report.rows.insert(report.rows.end(), seed_report.rows.begin(), seed_report.rows.end());
  }
  write_bias_csv(report, out_path(cfg, "bias_report.csv"));

  // summary: per-method means over all levels and seeds
  nlohmann::json summary;
  for (const std::string method : {"diffratio", "vsd"}) {
    double rel_sum = 0.0, cos_sum = 0.0;
    long count = 0;
    for (const auto& row : report.rows) {
      if (row.method != method) continue;
      rel_sum += row.rel_l2;
      cos_sum += row.cosine;
      ++count;
    }
    if (count > 0)
      summary["methods"][method] = {{"mean_rel_l2", rel_sum / count},
                                    {"mean_cosine", cos_sum / count},
                                    {"rows", count}};
  }
  checkpoint::write_file(out_path(cfg, "bias_summary.json"), summary.dump(2) + "\n");
  write_manifest(cfg, "bias-bench");
  return kExitOk;
}

int cmd_eval(const ExperimentConfig& cfg) {
  prepare_out_dir(cfg);
  const GaussianMixture target = cfg.make_target();

  Rng target_rng(substream_seed(cfg.seed, "eval-target"));
  const Eigen::MatrixXd target_samples = target.sample(cfg.eval.n_samples, target_rng);

  Eigen::MatrixXd subject_samples;
  if (cfg.eval.subject == "target") {
    subject_samples = target.sample(cfg.eval.n_samples, target_rng);
  } else {
    const Generator gen = load_generator_artifact(cfg);
    Rng gen_rng(substream_seed(cfg.seed, "eval-generator"));
    subject_samples = gen.generate(cfg.eval.n_samples, gen_rng);
  }

  const GenReport report = evaluate_samples(target, target_samples, subject_samples);
  checkpoint::write_file(out_path(cfg, "report.json"), report.to_json_string() + "\n");
  std::cout << "log_mmd=" << report.log_mmd << " avg_log_density=" << report.avg_log_density
            << "\n";

  if (!cfg.artifacts.classifier.empty()) {
    const RatioEstimator est = load_classifier_artifact(cfg);
    Rng hist_rng(substream_seed(cfg.seed, "eval-histogram"));
    const RatioHistogram hist =
        ratio_histogram(est, target_samples, subject_samples, est.schedule().t_min(), hist_rng,
                        cfg.eval.histogram_bins);
    write_histogram_csv(hist, out_path(cfg, "ratio_hist.csv"));
    nlohmann::json hist_summary;
    hist_summary["mean_real"] = hist.mean_real;
    hist_summary["mean_generated"] = hist.mean_generated;
    checkpoint::write_file(out_path(cfg, "ratio_summary.json"), hist_summary.dump(2) + "\n");
  }
  write_manifest(cfg, "eval");
  return kExitOk;
}

int cmd_resample_eval(const ExperimentConfig& cfg) {
  prepare_out_dir(cfg);
  if (cfg.resample.m_list.empty()) {
    std::cerr << "warning: resample.m_list is empty; nothing to do\n";
    write_manifest(cfg, "resample-eval");
    return kExitOk;
  }
  const GaussianMixture target = cfg.make_target();
  const Generator gen = load_generator_artifact(cfg);
  const RatioEstimator est = load_classifier_artifact(cfg);
  const double t_eval =
      cfg.resample.t_min_override >= 0.0 ? cfg.resample.t_min_override : cfg.t_min;
  if (!(t_eval > 0.0)) throw ConfigError("resample.t_min_override must be positive");

  nlohmann::json summary = nlohmann::json::array();
  for (const int M : cfg.resample.m_list) {
    Rng target_rng(substream_seed(cfg.seed, "eval-target"));
    const Eigen::MatrixXd target_samples = target.sample(cfg.eval.n_samples, target_rng);
    Rng cand_rng(substream_seed(cfg.seed, "eval-generator"));
    Rng select_rng(substream_seed(cfg.seed, "resample", static_cast<std::uint64_t>(M)));
    const ScaledGenerateResult result =
        scaled_generate(gen, est, M, cfg.resample.n_outputs, t_eval, cand_rng, select_rng,
                        cfg.resample.k_noise_draws);
    const GenReport report = evaluate_samples(target, target_samples, result.samples);
    checkpoint::write_file(out_path(cfg, "resample_M" + std::to_string(M) + ".json"),
                           report.to_json_string() + "\n");
    write_samples_csv(out_path(cfg, "samples_M" + std::to_string(M) + ".csv"), result.samples);
    summary.push_back({{"M", M},
                       {"mean_weight_selected", result.mean_weight_selected},
                       {"effective_sample_size", result.mean_ess}});
    std::cout << "M=" << M << " log_mmd=" << report.log_mmd
              << " avg_log_density=" << report.avg_log_density << "\n";
  }
  checkpoint::write_file(out_path(cfg, "resample_summary.json"), summary.dump(2) + "\n");
  write_manifest(cfg, "resample-eval");
  return kExitOk;
}

void add_common_flags(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("config", flags.config_path, "experiment config JSON")->required();
  sub->add_option("--seed", flags.seed, "override config seed");
  sub->add_option("--out", flags.out_dir, "override output directory");
  sub->add_option("--steps", flags.steps, "override training.steps");
  sub->add_option("--generator", flags.generator, "generator checkpoint path");
  sub->add_option("--classifier", flags.classifier, "classifier checkpoint path");
  sub->add_option("--teacher", flags.teacher, "teacher checkpoint path");
  sub->add_option("--student", flags.student, "student checkpoint path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ratio_lab: density-ratio training laboratory"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonFlags flags;
  ResampleFlags rflags;

  CLI::App* pretrain = app.add_subcommand("pretrain", "pretrain the bias-study generator");
  add_common_flags(pretrain, flags);
  CLI::App* train = app.add_subcommand("train", "train a one-step generator");
  add_common_flags(train, flags);
  CLI::App* bias = app.add_subcommand("bias-bench", "score-difference bias benchmark");
  add_common_flags(bias, flags);
  CLI::App* eval = app.add_subcommand("eval", "generator quality report");
  add_common_flags(eval, flags);
  CLI::App* resample = app.add_subcommand("resample-eval", "inference-time scaling evaluation");
  add_common_flags(resample, flags);
  resample->add_option("--m-list", rflags.m_list, "candidate counts to evaluate");
  resample->add_option("--k", rflags.k_noise_draws, "noise draws per weight evaluation");
  resample->add_option("--t-min", rflags.t_min_override, "ratio evaluation noise level");
  resample->add_option("--n-outputs", rflags.n_outputs, "number of resampled outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    ExperimentConfig cfg = load_config(flags);
    if (rflags.m_list) cfg.resample.m_list = *rflags.m_list;
    if (rflags.k_noise_draws) cfg.resample.k_noise_draws = *rflags.k_noise_draws;
    if (rflags.t_min_override) cfg.resample.t_min_override = *rflags.t_min_override;
    if (rflags.n_outputs) cfg.resample.n_outputs = *rflags.n_outputs;

    if (pretrain->parsed()) return cmd_pretrain(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (bias->parsed()) return cmd_bias_bench(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
    if (resample->parsed()) return cmd_resample_eval(cfg);
    std::cerr << "error: no subcommand\n";
    return kExitConfig;
  } catch (const MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingArtifact;
  } catch (const DivergenceError& e) {
    std::cerr << "error: training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
