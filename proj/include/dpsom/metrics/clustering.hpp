#pragma once

#include <cstdint>
#include <vector>

#include "dpsom/ndcore/types.hpp"
#include "dpsom/somgrid/grid.hpp"

namespace dpsom::metrics {

/// Cluster x class counts.
struct Contingency {
  Eigen::MatrixXi counts;  // K x C
  long total = 0;

  /// Sizes are max index + 1 of each argument (at least `min_clusters` rows).
  static Contingency build(const std::vector<int>& assignment, const std::vector<int>& labels, int min_clusters = 0);
};

/// (1/N) sum_k max_c counts[k][c]. Throws DimensionError on length mismatch
/// and InputError when empty.
double purity(const std::vector<int>& assignment, const std::vector<int>& labels);

/// I(A; L) / sqrt(H(A) H(L)) in nats. 0 when exactly one entropy is zero,
/// 1 when both partitions are trivial.
double nmi(const std::vector<int>& assignment, const std::vector<int>& labels);

/// Moran's I on the toroidal grid with weights exp(-d(i, j)) and zero
/// self-weight. Throws UndefinedIndexError when y is constant.
double morans_index(const som::GridSpec& grid, const Vector& y);

/// Mean squared error over all entries. Throws DimensionError on shape mismatch.
double forecast_mse(const Matrix& predicted, const Matrix& truth);

struct KMeansResult {
  std::vector<int> assignment;
  Matrix centroids;
  /// Inertia after every Lloyd iteration.
  std::vector<double> inertia_history;
};

/// k-means++ seeding followed by Lloyd iterations until assignments stop
/// changing or `max_iterations` is reached. An empty cluster takes the point
/// farthest from its centroid. Throws InputError when rows < k.
KMeansResult kmeans(const Matrix& data, int k, std::uint64_t seed, int max_iterations = 100);

/// Mean of `values` over the points assigned to each of `k` clusters. Empty
/// clusters take the global mean, so they do not add spatial structure.
Vector cluster_means(const std::vector<int>& assignment, const std::vector<double>& values, int k);

/// Number of distinct clusters that received at least one point.
int clusters_used(const std::vector<int>& assignment);

/// Index of the largest entry of each row.
std::vector<int> row_argmax(const Matrix& m);

}  // namespace dpsom::metrics
