#include "ratio_lab/rng.hpp"

#include <cmath>
#include <numbers>

#include "ratio_lab/errors.hpp"

namespace ratio_lab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t root, std::string_view name) {
  return splitmix64(root ^ fnv1a(name));
}

std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index) {
  return splitmix64(substream_seed(root, name) ^ splitmix64(index));
}

double Rng::uniform() {
  // 53-bit mantissa; result in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

double Rng::normal() {
  // Box-Muller; u1 bounded away from zero so log stays finite.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n) {
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
  return out;
}

Eigen::MatrixXd Rng::normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  // Row-major fill: a batch of n rows consumes the stream exactly like n
  // consecutive single-row draws, so batching does not change sample values.
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal();
  return out;
}

Eigen::Index Rng::categorical(const Eigen::VectorXd& weights) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw EvalError("categorical: weights must be finite with positive sum");
  }
  const double u = uniform() * total;
  double cum = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u <= cum) return i;
  }
  return weights.size() - 1;
}

}  // namespace ratio_lab
