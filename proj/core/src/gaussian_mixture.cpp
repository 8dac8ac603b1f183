#include "ratio_lab/gaussian_mixture.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"
#include "ratio_lab/errors.hpp"

namespace ratio_lab {

namespace {
constexpr double kWeightSumTol = 1e-12;
}

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ConfigError("mixture: needs at least one component");
  dim_ = static_cast<int>(components_[0].mean.size());
  if (dim_ < 1) throw ConfigError("mixture: component mean must be non-empty");

  double weight_sum = 0.0;
  cache_.reserve(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const auto& c = components_[i];
    if (!(c.weight > 0.0)) throw ConfigError("mixture: weights must be strictly positive");
    weight_sum += c.weight;
    if (c.mean.size() != dim_) throw ConfigError("mixture: component means must share dimension");
    if (c.cov.rows() != dim_ || c.cov.cols() != dim_)
      throw ConfigError("mixture: covariance shape must be d x d");
    if (!c.cov.isApprox(c.cov.transpose(), 1e-12))
      throw ConfigError("mixture: covariance must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
    if (llt.info() != Eigen::Success)
      throw ConfigError("mixture: covariance must be positive-definite");
    ComponentCache cc;
    cc.chol = llt.matrixL();
    double log_det_half = 0.0;
    for (int k = 0; k < dim_; ++k) log_det_half += std::log(cc.chol(k, k));
    cc.log_norm = std::log(c.weight) - 0.5 * dim_ * std::log(2.0 * std::numbers::pi) - log_det_half;
    cache_.push_back(std::move(cc));
  }
  if (std::abs(weight_sum - 1.0) > kWeightSumTol)
    throw ConfigError("mixture: weights must sum to 1 within 1e-12");
}

double GaussianMixture::component_log_term(std::size_t i, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd u =
      cache_[i].chol.triangularView<Eigen::Lower>().solve(x - components_[i].mean);
  return cache_[i].log_norm - 0.5 * u.squaredNorm();
}

double GaussianMixture::log_density(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw ShapeError("log_density: point dimension mismatch");
  double max_term = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd terms(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t i = 0; i < components_.size(); ++i) {
    terms[static_cast<Eigen::Index>(i)] = component_log_term(i, x);
    max_term = std::max(max_term, terms[static_cast<Eigen::Index>(i)]);
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < terms.size(); ++i) acc += std::exp(terms[i] - max_term);
  return max_term + std::log(acc);
}

Eigen::VectorXd GaussianMixture::score(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw ShapeError("score: point dimension mismatch");
  const Eigen::Index n = static_cast<Eigen::Index>(components_.size());
  Eigen::VectorXd terms(n);
  Eigen::MatrixXd comp_scores(dim_, n);
  double max_term = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = components_[static_cast<std::size_t>(i)];
    const auto& L = cache_[static_cast<std::size_t>(i)].chol;
    const Eigen::VectorXd u = L.triangularView<Eigen::Lower>().solve(x - c.mean);
    terms[i] = cache_[static_cast<std::size_t>(i)].log_norm - 0.5 * u.squaredNorm();
    // -Sigma^{-1}(x - mu) = -L^{-T} u
    comp_scores.col(i) = -L.transpose().triangularView<Eigen::Upper>().solve(u);
    max_term = std::max(max_term, terms[i]);
  }
  Eigen::VectorXd resp = (terms.array() - max_term).exp();
  resp /= resp.sum();
  return comp_scores * resp;
}

Eigen::MatrixXd GaussianMixture::score_batch(const Eigen::MatrixXd& xs) const {
  Eigen::MatrixXd out(xs.rows(), xs.cols());
  for (Eigen::Index r = 0; r < xs.rows(); ++r) out.row(r) = score(xs.row(r).transpose()).transpose();
  return out;
}

Eigen::VectorXd GaussianMixture::log_density_batch(const Eigen::MatrixXd& xs) const {
  Eigen::VectorXd out(xs.rows());
  for (Eigen::Index r = 0; r < xs.rows(); ++r) out[r] = log_density(xs.row(r).transpose());
  return out;
}

GaussianMixture GaussianMixture::noised(double sigma) const {
  if (sigma < 0.0) throw DomainError("noised: sigma must be nonnegative");
  std::vector<MixtureComponent> comps = components_;
  if (sigma > 0.0) {
    const double var = sigma * sigma;
    for (auto& c : comps) c.cov.diagonal().array() += var;
  }
  return GaussianMixture(std::move(comps));
}

Eigen::MatrixXd GaussianMixture::sample(Eigen::Index n, Rng& rng) const {
  if (n < 1) throw ConfigError("sample: need n >= 1");
  Eigen::VectorXd weights(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t i = 0; i < components_.size(); ++i)
    weights[static_cast<Eigen::Index>(i)] = components_[i].weight;
  Eigen::MatrixXd out(n, dim_);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index k = rng.categorical(weights);
    const Eigen::VectorXd z = rng.normal_vector(dim_);
    out.row(r) =
        (components_[static_cast<std::size_t>(k)].mean + cache_[static_cast<std::size_t>(k)].chol * z)
            .transpose();
  }
  return out;
}

std::string GaussianMixture::to_json_string() const {
  nlohmann::json doc;
  doc["dim"] = dim_;
  auto& arr = doc["components"] = nlohmann::json::array();
  for (const auto& c : components_) {
    nlohmann::json jc;
    jc["weight"] = c.weight;
    jc["mean"] = std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size());
    auto& rows = jc["cov"] = nlohmann::json::array();
    for (int r = 0; r < c.cov.rows(); ++r) {
      std::vector<double> row(c.cov.cols());
      for (int k = 0; k < c.cov.cols(); ++k) row[static_cast<std::size_t>(k)] = c.cov(r, k);
      rows.push_back(row);
    }
    arr.push_back(std::move(jc));
  }
  return doc.dump(2);
}

GaussianMixture GaussianMixture::from_json_string(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  const int d = doc.at("dim").get<int>();
  std::vector<MixtureComponent> comps;
  for (const auto& jc : doc.at("components")) {
    MixtureComponent c;
    c.weight = jc.at("weight").get<double>();
    const auto mean = jc.at("mean").get<std::vector<double>>();
    c.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    const auto& rows = jc.at("cov");
    c.cov.resize(d, d);
    for (int r = 0; r < d; ++r) {
      const auto row = rows.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
      for (int k = 0; k < d; ++k) c.cov(r, k) = row[static_cast<std::size_t>(k)];
    }
    comps.push_back(std::move(c));
  }
  return GaussianMixture(std::move(comps));
}

GaussianMixture make_paper_mixture(std::uint64_t seed, int n_components, Interval mean_range,
                                   Interval logvar_range, int dim) {
  if (n_components < 1) throw ConfigError("make_paper_mixture: need n_components >= 1");
  if (mean_range.lo > mean_range.hi)
    throw ConfigError("make_paper_mixture: mean_range low exceeds high");
  if (logvar_range.lo > logvar_range.hi)
    throw ConfigError("make_paper_mixture: logvar_range low exceeds high");
  Rng rng(seed);
  std::vector<MixtureComponent> comps(static_cast<std::size_t>(n_components));
  for (auto& c : comps) {
    c.weight = 1.0 / n_components;
    c.mean.resize(dim);
    for (int k = 0; k < dim; ++k) c.mean[k] = rng.uniform(mean_range.lo, mean_range.hi);
    const double var = std::exp(rng.uniform(logvar_range.lo, logvar_range.hi));
    c.cov = var * Eigen::MatrixXd::Identity(dim, dim);
  }
  return GaussianMixture(std::move(comps));
}

}  // namespace ratio_lab
