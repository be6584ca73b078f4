#include "dpsom/somgrid/classic_som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpsom/errors.hpp"
#include "dpsom/log.hpp"
#include "dpsom/ndcore/random.hpp"

namespace dpsom::som {

int bmu(const Matrix& centroids, const Eigen::Ref<const RowVector>& x) {
  if (x.size() != centroids.cols()) {
    throw DimensionError("bmu: input has " + std::to_string(x.size()) + " dims, centroids have " +
                         std::to_string(centroids.cols()));
  }
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
    const double d = (centroids.row(k) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

int bmu(const ClassicSomState& state, const Eigen::Ref<const RowVector>& x) { return bmu(state.centroids, x); }

double quantization_error(const Matrix& centroids, const Matrix& data) {
  if (data.rows() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const int w = bmu(centroids, data.row(i));
    total += (data.row(i) - centroids.row(w)).norm();
  }
  return total / static_cast<double>(data.rows());
}

int som_update(Matrix& centroids, const GridSpec& grid, const Eigen::Ref<const RowVector>& x, double alpha,
               double radius) {
  if (centroids.rows() != grid.size()) throw DimensionError("som_update: centroid count differs from grid size");
  const int winner = bmu(centroids, x);
  if (radius <= 0.0) {
    centroids.row(winner) += alpha * (x - centroids.row(winner));
    return winner;
  }
  const double denom = 2.0 * radius * radius;
  for (int k = 0; k < grid.size(); ++k) {
    const double d = grid_distance(grid, winner, k);
    const double eta = std::exp(-d * d / denom);
    centroids.row(k) += alpha * eta * (x - centroids.row(k));
  }
  return winner;
}

ClassicSomState som_fit(const Matrix& data, const GridSpec& grid, SomSchedule schedule, std::uint64_t seed) {
  if (data.rows() == 0 || data.cols() == 0) throw InputError("som_fit: empty data");
  if (schedule.total_steps < 1) throw ConfigError("som_fit: total_steps must be >= 1");
  const int K = grid.size();
  if (data.rows() < K) {
    warn("som_fit: " + std::to_string(data.rows()) + " samples for " + std::to_string(K) + " nodes");
  }
  if (schedule.radius0 <= 0.0) schedule.radius0 = std::max(grid.rows(), grid.cols()) / 2.0;

  nd::Rng rng(seed);
  nd::Rng init_rng = rng.split(0);
  nd::Rng draw_rng = rng.split(1);

  ClassicSomState state{grid, Matrix(K, data.cols()), 0, schedule, {}};
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::shuffle(order.begin(), order.end(), init_rng.engine());
  for (int k = 0; k < K; ++k) {
    state.centroids.row(k) = data.row(order[static_cast<std::size_t>(k) % order.size()]);
    for (Eigen::Index c = 0; c < data.cols(); ++c) state.centroids(k, c) += 1e-3 * init_rng.normal();
  }

  const long T = schedule.total_steps;
  const double alpha_end = 0.01 * schedule.alpha0;
  for (long t = 0; t < T; ++t) {
    const double frac = T > 1 ? static_cast<double>(t) / static_cast<double>(T - 1) : 1.0;
    const double alpha = schedule.alpha0 + (alpha_end - schedule.alpha0) * frac;
    const double radius = schedule.radius0 + (schedule.final_radius - schedule.radius0) * frac;
    som_update(state.centroids, grid, data.row(static_cast<Eigen::Index>(draw_rng.index(data.rows()))), alpha, radius);
    state.iteration = t + 1;
    if ((t + 1) % data.rows() == 0) state.quantization_history.push_back(quantization_error(state.centroids, data));
  }
  if (T % data.rows() != 0) state.quantization_history.push_back(quantization_error(state.centroids, data));
  return state;
}

}  // namespace dpsom::som
