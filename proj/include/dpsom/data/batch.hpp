#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpsom/ndcore/types.hpp"

namespace dpsom::data {

using Indices = std::vector<Eigen::Index>;

/// Static samples, one per row.
struct Batch {
  Matrix x;
  /// Empty when unlabeled; otherwise one class index per row.
  std::vector<int> labels;
  int num_classes = 0;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }
  bool labeled() const { return !labels.empty(); }
  Batch select(const Indices& rows) const;
  /// Throws InputError on non-finite entries or out-of-range labels.
  void validate() const;
};

/// N series of T steps, flattened series-major: row i * T + t.
struct SeriesBatch {
  Eigen::Index n_series = 0;
  Eigen::Index steps = 0;
  Matrix x;
  /// Optional per-step integer labels (severity deciles), size N * T.
  std::vector<int> step_labels;
  int num_classes = 0;
  /// Optional continuous per-step severity, size N * T.
  std::vector<double> severity;
  /// Optional per-step latent regime of the generator, size N * T.
  std::vector<int> regimes;
  /// Identifier of each series, size N.
  std::vector<std::int64_t> series_ids;

  Eigen::Index dim() const { return x.cols(); }
  Eigen::Index rows() const { return x.rows(); }
  bool labeled() const { return !step_labels.empty(); }
  /// Whole series by position.
  SeriesBatch select(const Indices& series) const;
  /// First `count` steps of every series, starting at `start`.
  SeriesBatch steps_range(Eigen::Index start, Eigen::Index count) const;
  /// Every step as an independent sample, labeled with step_labels.
  Batch flatten() const;
  void validate() const;
};

struct SplitFractions {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

template <class T>
struct Split {
  T train;
  T validation;
  T test;
};

/// Seeded partition of [0, n) into three sorted, disjoint, exhaustive index
/// sets with sizes round(n * train), round(n * validation), remainder.
Split<Indices> split_indices(Eigen::Index n, SplitFractions fractions, std::uint64_t seed);
Split<Batch> split(const Batch& batch, SplitFractions fractions, std::uint64_t seed);
/// Splits by whole series.
Split<SeriesBatch> split(const SeriesBatch& batch, SplitFractions fractions, std::uint64_t seed);

/// Consecutive groups of `size` indices covering [0, n) once; shuffled with
/// `shuffle_seed` when given. The last group may be smaller.
std::vector<Indices> batch_indices(Eigen::Index n, Eigen::Index size, std::optional<std::uint64_t> shuffle_seed);

/// Per-channel mean and standard deviation.
struct ChannelStats {
  RowVector mean;
  RowVector stddev;

  static ChannelStats fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

}  // namespace dpsom::data
