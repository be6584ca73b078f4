#pragma once

#include <cstdint>
#include <random>

#include "dpsom/ndcore/types.hpp"

namespace dpsom::nd {

/// SplitMix64 finalizer, used to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded, splittable generator. `split(k)` yields a child stream that
/// depends only on the parent seed and `k`, never on how much the parent
/// has been consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix64(seed)) {}

  Rng split(std::uint64_t key) const { return Rng(mix64(seed_ ^ mix64(key + 0x632be59bd9b4e019ULL))); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64& engine() noexcept { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline constexpr double kLogVarMin = -6.0;
inline constexpr double kLogVarMax = 2.0;

/// mean + exp(log_var / 2) * eps with eps ~ N(0, I); log_var is clamped to
/// [kLogVarMin, kLogVarMax] first.
Vector sample_gaussian(const Vector& mean, const Vector& log_var, Rng& rng);

}  // namespace dpsom::nd
