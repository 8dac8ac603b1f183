#include "ratio_lab/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ratio_lab/errors.hpp"

namespace ratio_lab {
namespace checkpoint {

namespace {

nlohmann::json net_to_json(const Mlp& net) {
  nlohmann::json j;
  j["layer_dims"] = net.layer_dims();
  j["activation"] = "silu_identity_last";
  j["params"] = std::vector<double>(net.params().data(), net.params().data() + net.param_count());
  return j;
}

Mlp net_from_json(const nlohmann::json& j) {
  Mlp net(j.at("layer_dims").get<std::vector<int>>());
  const std::string activation = j.at("activation").get<std::string>();
  if (activation != "silu_identity_last")
    throw ConfigError("checkpoint: unsupported activation tag '" + activation + "'");
  const auto params = j.at("params").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(params.size()) != net.param_count())
    throw ShapeError("checkpoint: parameter count does not match layer dims");
  net.params() =
      Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size()));
  return net;
}

nlohmann::json optimizer_to_json(const AdamState& opt) {
  nlohmann::json j;
  j["step"] = opt.step;
  j["lr"] = opt.lr;
  j["beta1"] = opt.beta1;
  j["beta2"] = opt.beta2;
  j["eps"] = opt.eps;
  j["m"] = std::vector<double>(opt.m.data(), opt.m.data() + opt.m.size());
  j["v"] = std::vector<double>(opt.v.data(), opt.v.data() + opt.v.size());
  return j;
}

AdamState optimizer_from_json(const nlohmann::json& j) {
  AdamState opt;
  opt.step = j.at("step").get<long>();
  opt.lr = j.at("lr").get<double>();
  opt.beta1 = j.at("beta1").get<double>();
  opt.beta2 = j.at("beta2").get<double>();
  opt.eps = j.at("eps").get<double>();
  const auto m = j.at("m").get<std::vector<double>>();
  const auto v = j.at("v").get<std::vector<double>>();
  opt.m = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
  opt.v = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return opt;
}

nlohmann::json schedule_to_json(const NoiseSchedule& s) {
  return {{"t_min", s.t_min()}, {"t_max", s.t_max()}, {"power", s.power()}};
}

NoiseSchedule schedule_from_json(const nlohmann::json& j) {
  return NoiseSchedule(j.at("t_min").get<double>(), j.at("t_max").get<double>(),
                       j.at("power").get<double>());
}

void expect_kind(const nlohmann::json& j, const std::string& kind) {
  const std::string got = j.at("kind").get<std::string>();
  if (got != kind)
    throw ConfigError("checkpoint: expected kind '" + kind + "', found '" + got + "'");
}

}  // namespace

std::string ratio_estimator_to_json(const RatioEstimator& est) {
  nlohmann::json j;
  j["kind"] = "ratio_estimator";
  j["label_convention"] = {{"y1", "data"}, {"y0", "model"}};
  j["data_dim"] = est.data_dim();
  j["schedule"] = schedule_to_json(est.schedule());
  j["net"] = net_to_json(est.net());
  j["optimizer"] = optimizer_to_json(est.optimizer());
  return j.dump(2);
}

RatioEstimator ratio_estimator_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  expect_kind(j, "ratio_estimator");
  return RatioEstimator(net_from_json(j.at("net")), optimizer_from_json(j.at("optimizer")),
                        schedule_from_json(j.at("schedule")), j.at("data_dim").get<int>());
}

std::string score_net_to_json(const ScoreNet& net) {
  nlohmann::json j;
  j["kind"] = "score_net";
  j["role"] = net.role() == ScoreRole::kTeacher ? "teacher" : "student";
  j["data_dim"] = net.data_dim();
  j["schedule"] = schedule_to_json(net.schedule());
  j["net"] = net_to_json(net.net());
  j["optimizer"] = optimizer_to_json(net.optimizer());
  return j.dump(2);
}

ScoreNet score_net_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  expect_kind(j, "score_net");
  const std::string role_name = j.at("role").get<std::string>();
  if (role_name != "teacher" && role_name != "student")
    throw ConfigError("checkpoint: score net role must be teacher or student");
  return ScoreNet(net_from_json(j.at("net")), optimizer_from_json(j.at("optimizer")),
                  schedule_from_json(j.at("schedule")),
                  role_name == "teacher" ? ScoreRole::kTeacher : ScoreRole::kStudent,
                  j.at("data_dim").get<int>());
}

std::string generator_to_json(const Generator& gen) {
  nlohmann::json j;
  j["kind"] = "generator";
  j["latent_dim"] = gen.latent_dim();
  j["net"] = net_to_json(gen.net());
  j["optimizer"] = optimizer_to_json(gen.optimizer());
  return j.dump(2);
}

Generator generator_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  expect_kind(j, "generator");
  return Generator(net_from_json(j.at("net")), optimizer_from_json(j.at("optimizer")),
                   j.at("latent_dim").get<int>());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("write_file: cannot open " + path);
  out << content;
  if (!out) throw ConfigError("write_file: write failed for " + path);
}

std::string read_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw MissingArtifactError("missing artifact: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("cannot read artifact: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace checkpoint
}  // namespace ratio_lab
