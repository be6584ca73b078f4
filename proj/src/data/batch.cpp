#include "dpsom/data/batch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dpsom/errors.hpp"
#include "dpsom/ndcore/random.hpp"

namespace dpsom::data {

Batch Batch::select(const Indices& rows) const {
  Batch out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.num_classes = num_classes;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.x.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
    if (labeled()) out.labels.push_back(labels[static_cast<std::size_t>(rows[r])]);
  }
  return out;
}

void Batch::validate() const {
  if (!x.allFinite()) throw InputError("batch contains non-finite values");
  if (labeled()) {
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) throw InputError("label count differs from sample count");
    for (int l : labels) {
      if (l < 0 || l >= num_classes) throw InputError("label " + std::to_string(l) + " outside [0, num_classes)");
    }
  }
}

SeriesBatch SeriesBatch::select(const Indices& series) const {
  SeriesBatch out;
  out.n_series = static_cast<Eigen::Index>(series.size());
  out.steps = steps;
  out.num_classes = num_classes;
  out.x.resize(out.n_series * steps, x.cols());
  for (std::size_t s = 0; s < series.size(); ++s) {
    const Eigen::Index src = series[s];
    const auto dst = static_cast<Eigen::Index>(s);
    out.x.middleRows(dst * steps, steps) = x.middleRows(src * steps, steps);
    for (Eigen::Index t = 0; t < steps; ++t) {
      const auto k = static_cast<std::size_t>(src * steps + t);
      if (!step_labels.empty()) out.step_labels.push_back(step_labels[k]);
      if (!severity.empty()) out.severity.push_back(severity[k]);
      if (!regimes.empty()) out.regimes.push_back(regimes[k]);
    }
    if (!series_ids.empty()) out.series_ids.push_back(series_ids[static_cast<std::size_t>(src)]);
  }
  return out;
}

SeriesBatch SeriesBatch::steps_range(Eigen::Index start, Eigen::Index count) const {
  if (start < 0 || count < 1 || start + count > steps) throw IndexError("steps_range out of bounds");
  SeriesBatch out;
  out.n_series = n_series;
  out.steps = count;
  out.num_classes = num_classes;
  out.series_ids = series_ids;
  out.x.resize(n_series * count, x.cols());
  for (Eigen::Index i = 0; i < n_series; ++i) {
    out.x.middleRows(i * count, count) = x.middleRows(i * steps + start, count);
    for (Eigen::Index t = start; t < start + count; ++t) {
      const auto k = static_cast<std::size_t>(i * steps + t);
      if (!step_labels.empty()) out.step_labels.push_back(step_labels[k]);
      if (!severity.empty()) out.severity.push_back(severity[k]);
      if (!regimes.empty()) out.regimes.push_back(regimes[k]);
    }
  }
  return out;
}

Batch SeriesBatch::flatten() const {
  Batch out{x, step_labels, num_classes};
  return out;
}

void SeriesBatch::validate() const {
  if (x.rows() != n_series * steps) throw InputError("series batch rows != N * T");
  if (!x.allFinite()) throw InputError("series batch contains non-finite values");
  const auto n = static_cast<std::size_t>(x.rows());
  if (!step_labels.empty() && step_labels.size() != n) throw InputError("step label count != N * T");
  if (!severity.empty() && severity.size() != n) throw InputError("severity count != N * T");
  if (!regimes.empty() && regimes.size() != n) throw InputError("regime count != N * T");
  for (int l : step_labels) {
    if (l < 0 || l >= num_classes) throw InputError("step label outside [0, num_classes)");
  }
}

Split<Indices> split_indices(Eigen::Index n, SplitFractions f, std::uint64_t seed) {
  if (f.train < 0 || f.validation < 0 || f.test < 0 || std::abs(f.train + f.validation + f.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  Indices perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  nd::Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  const auto n_train = static_cast<std::size_t>(std::llround(f.train * static_cast<double>(n)));
  const auto n_val = std::min(perm.size() - n_train,
                              static_cast<std::size_t>(std::llround(f.validation * static_cast<double>(n))));
  Split<Indices> out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                        perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Split<Batch> split(const Batch& batch, SplitFractions fractions, std::uint64_t seed) {
  const auto idx = split_indices(batch.size(), fractions, seed);
  return {batch.select(idx.train), batch.select(idx.validation), batch.select(idx.test)};
}

Split<SeriesBatch> split(const SeriesBatch& batch, SplitFractions fractions, std::uint64_t seed) {
  const auto idx = split_indices(batch.n_series, fractions, seed);
  return {batch.select(idx.train), batch.select(idx.validation), batch.select(idx.test)};
}

std::vector<Indices> batch_indices(Eigen::Index n, Eigen::Index size, std::optional<std::uint64_t> shuffle_seed) {
  if (size < 1) throw ConfigError("batch size must be >= 1");
  Indices order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (shuffle_seed) {
    nd::Rng rng(*shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng.engine());
  }
  std::vector<Indices> out;
  for (Eigen::Index start = 0; start < n; start += size) {
    const Eigen::Index end = std::min(n, start + size);
    out.emplace_back(order.begin() + start, order.begin() + end);
  }
  return out;
}

ChannelStats ChannelStats::fit(const Matrix& x) {
  if (x.rows() == 0) throw InputError("cannot fit channel statistics on empty data");
  ChannelStats s;
  s.mean = x.colwise().mean();
  s.stddev = ((x.rowwise() - s.mean).array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
  for (Eigen::Index c = 0; c < s.stddev.size(); ++c) {
    if (!(s.stddev[c] > 1e-12)) s.stddev[c] = 1.0;
  }
  return s;
}

Matrix ChannelStats::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw DimensionError("channel statistics width differs from data");
  return (x.rowwise() - mean).array().rowwise() / stddev.array();
}

}  // namespace dpsom::data
