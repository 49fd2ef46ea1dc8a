#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace resmotion {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGravity = 9.81;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }

/// Invalid parameter values (nonpositive wave height, bad split ratios, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simulated state left the admissible envelope or became non-finite.
class SimulationDivergence : public std::runtime_error {
 public:
  SimulationDivergence(const std::string& what, std::uint64_t seed, double time)
      : std::runtime_error(what + " (seed=" + std::to_string(seed) +
                           ", t=" + std::to_string(time) + ")"),
        seed_(seed),
        time_(time) {}

  std::uint64_t seed() const { return seed_; }
  double time() const { return time_; }

 private:
  std::uint64_t seed_;
  double time_;
};

/// Least-squares fit failed; carries the condition number of the scaled Gram matrix.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double condition)
      : std::runtime_error(what + " (condition number " + std::to_string(condition) + ")"),
        condition_(condition) {}

  double condition() const { return condition_; }

 private:
  double condition_;
};

/// Malformed or incompatible file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic 64-bit generator used everywhere a seed is accepted.
using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform double in [lo, hi) from 53 random bits; independent of the
/// standard library's distribution implementation.
inline double uniform(Rng& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

}  // namespace resmotion
