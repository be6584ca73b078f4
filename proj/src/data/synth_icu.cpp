#include "dpsom/data/synth_icu.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "dpsom/errors.hpp"
#include "dpsom/ndcore/random.hpp"

namespace dpsom::data {
namespace {

constexpr std::array<std::array<double, 2>, kSynthRegimes> kRegimeMeans{{{0.0, 0.0}, {1.0, 0.0}, {1.2, 1.6}, {-0.6, 2.94}}};

}  // namespace

std::vector<int> deciles(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<int> out(values.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    out[order[rank]] = static_cast<int>(rank * kSeverityDeciles / order.size());
  }
  return out;
}

SeriesBatch synth_icu(const SynthIcuOptions& o) {
  if (o.dim < 2) throw ConfigError("synth_icu: dim must be >= 2");
  if (o.steps < 8) throw ConfigError("synth_icu: steps must be >= 8");
  if (o.n_series < 1) throw ConfigError("synth_icu: n_series must be >= 1");

  nd::Rng root(o.seed);
  nd::Rng map_rng = root.split(0);
  const Matrix mixing = map_rng.normal_matrix(2, o.dim);
  const RowVector offset = 0.5 * map_rng.normal_matrix(1, o.dim);

  SeriesBatch out;
  out.n_series = o.n_series;
  out.steps = o.steps;
  out.x.resize(o.n_series * o.steps, o.dim);
  out.severity.resize(static_cast<std::size_t>(out.x.rows()));
  out.regimes.resize(out.severity.size());
  out.series_ids.resize(static_cast<std::size_t>(o.n_series));

  const double stationary_sd = o.state_noise / std::sqrt(2.0 * o.reversion - o.reversion * o.reversion);
  Matrix state(o.steps, 2);
  for (Eigen::Index i = 0; i < o.n_series; ++i) {
    nd::Rng rng = root.split(static_cast<std::uint64_t>(i) + 1);
    out.series_ids[static_cast<std::size_t>(i)] = i;
    int regime = static_cast<int>(rng.index(kSynthRegimes));
    double s0 = kRegimeMeans[regime][0] + stationary_sd * rng.normal();
    double s1 = kRegimeMeans[regime][1] + stationary_sd * rng.normal();
    for (Eigen::Index t = 0; t < o.steps; ++t) {
      if (t > 0) {
        if (rng.uniform() < o.switch_probability) {
          regime = (regime + 1 + static_cast<int>(rng.index(kSynthRegimes - 1))) % kSynthRegimes;
        }
        s0 += o.reversion * (kRegimeMeans[regime][0] - s0) + o.state_noise * rng.normal();
        s1 += o.reversion * (kRegimeMeans[regime][1] - s1) + o.state_noise * rng.normal();
      }
      state(t, 0) = s0;
      state(t, 1) = s1;
      const auto k = static_cast<std::size_t>(i * o.steps + t);
      out.severity[k] = std::hypot(s0, s1);
      out.regimes[k] = regime;
    }
    auto rows = out.x.middleRows(i * o.steps, o.steps);
    rows = state * mixing;
    rows.rowwise() += offset;
    rows += o.observation_noise * rng.normal_matrix(o.steps, o.dim);
  }
  out.step_labels = deciles(out.severity);
  out.num_classes = kSeverityDeciles;
  return out;
}

SeriesBatch synth_icu(Eigen::Index n_series, Eigen::Index steps, Eigen::Index dim, std::uint64_t seed) {
  SynthIcuOptions o;
  o.n_series = n_series;
  o.steps = steps;
  o.dim = dim;
  o.seed = seed;
  return synth_icu(o);
}

}  // namespace dpsom::data
