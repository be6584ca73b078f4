#pragma once

#include <cstdint>

#include "dpsom/data/batch.hpp"

namespace dpsom::data {

/// Generator settings for the ICU-like surrogate. Each series follows a 2-d
/// Ornstein-Uhlenbeck state that reverts to the mean of its current regime;
/// the regime jumps with `switch_probability` per step. Observations are a
/// fixed random affine map of the state plus Gaussian noise. Severity is the
/// norm of the state, discretised into deciles over all generated steps.
struct SynthIcuOptions {
  Eigen::Index n_series = 1000;
  Eigen::Index steps = 72;
  Eigen::Index dim = 98;
  std::uint64_t seed = 0;
  double reversion = 0.15;
  double state_noise = 0.2;
  double switch_probability = 0.03;
  double observation_noise = 0.15;
};

inline constexpr int kSynthRegimes = 4;
inline constexpr int kSeverityDeciles = 10;

/// Throws ConfigError unless dim >= 2 and steps >= 8 and n_series >= 1.
SeriesBatch synth_icu(const SynthIcuOptions& options);
SeriesBatch synth_icu(Eigen::Index n_series, Eigen::Index steps, Eigen::Index dim, std::uint64_t seed);

/// Rank-based decile of every value (ties broken by position).
std::vector<int> deciles(const std::vector<double>& values);

}  // namespace dpsom::data
