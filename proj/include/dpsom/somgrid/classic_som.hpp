#pragma once

#include <cstdint>
#include <vector>

#include "dpsom/ndcore/types.hpp"
#include "dpsom/somgrid/grid.hpp"

namespace dpsom::som {

/// Learning rate decays linearly from alpha0 to 0.01 * alpha0 and the
/// neighborhood radius from radius0 to final_radius over total_steps.
struct SomSchedule {
  double alpha0 = 0.5;
  /// <= 0 selects max(rows, cols) / 2.
  double radius0 = 0.0;
  double final_radius = 0.5;
  long total_steps = 1;
};

struct ClassicSomState {
  GridSpec grid;
  Matrix centroids;  // K x D
  long iteration = 0;
  SomSchedule schedule;
  /// Mean distance of each sample to its winner, recorded after every pass
  /// over the data (and once more at the end if the last pass was partial).
  std::vector<double> quantization_history;
};

/// Index of the nearest centroid; ties go to the lowest index.
int bmu(const Matrix& centroids, const Eigen::Ref<const RowVector>& x);
int bmu(const ClassicSomState& state, const Eigen::Ref<const RowVector>& x);

double quantization_error(const Matrix& centroids, const Matrix& data);

/// One Kohonen step: w_k += alpha * eta(winner, k) * (x - w_k) with a
/// Gaussian kernel over toroidal grid distance. radius == 0 updates only
/// the winner. Returns the winner.
int som_update(Matrix& centroids, const GridSpec& grid, const Eigen::Ref<const RowVector>& x, double alpha,
               double radius);

/// Online SOM fit on the rows of `data`, samples drawn uniformly with the
/// seeded generator. Throws InputError on empty data.
ClassicSomState som_fit(const Matrix& data, const GridSpec& grid, SomSchedule schedule, std::uint64_t seed);

}  // namespace dpsom::som
