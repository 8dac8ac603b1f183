#ifndef RATIO_LAB_RNG_HPP_
#define RATIO_LAB_RNG_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string_view>

namespace ratio_lab {

/// Derives the seed of a named substream from a root seed. All randomness in a
/// run flows from one 64-bit seed through named substreams so that modules can
/// be re-seeded independently of each other.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name);

/// Variant for indexed substreams (per-seed loops, per-level draws).
std::uint64_t substream_seed(std::uint64_t root, std::string_view name, std::uint64_t index);

/// Deterministic random source. Uniforms come from mt19937_64; normals from
/// Box-Muller on top of them, so sequences are identical across platforms and
/// standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal draw.
  double normal();

  /// Column-major fill of an n-vector with standard normals.
  Eigen::VectorXd normal_vector(Eigen::Index n);

  /// Column-major fill of a rows x cols matrix with standard normals.
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

  std::uint64_t next_u64() { return engine_(); }

  /// Index draw from unnormalized nonnegative weights via inverse CDF.
  Eigen::Index categorical(const Eigen::VectorXd& weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ratio_lab

#endif  // RATIO_LAB_RNG_HPP_
