#pragma once

#include <map>
#include <string>
#include <vector>

#include "dpsom/data/batch.hpp"
#include "dpsom/trainer/checkpoint.hpp"

namespace dpsom::cli {

struct ClusterEvaluation {
  std::vector<int> assignment;
  Matrix soft;
  /// Per-cluster mean label used for Moran's index and the grid export.
  Vector cluster_label;
  /// purity, nmi, morans_i, clusters_used; for series also enrichment_nmi
  /// and regime_nmi. morans_i is NaN when the cluster means are constant.
  std::map<std::string, double> values;
};

/// Clusters of static data; labels are class indices.
ClusterEvaluation evaluate_static(const train::Checkpoint& ckpt, const data::Batch& batch);

/// Clusters of every step of z-scored series. Purity and NMI are against the
/// step labels; Moran's index uses the per-cluster mean severity when the
/// data carry one, otherwise the mean step label.
ClusterEvaluation evaluate_series(const train::Checkpoint& ckpt, const data::SeriesBatch& series);

/// Moran's index of per-cluster means, NaN when undefined.
double morans_or_nan(const som::GridSpec& grid, const Vector& cluster_values);

/// Raw-input k-means with the same K: purity and nmi against `labels`.
std::map<std::string, double> kmeans_baseline(const Matrix& x, const std::vector<int>& labels, int k,
                                              std::uint64_t seed);

struct ForecastEvaluation {
  Matrix predicted;  // (N * horizon) x d, z-scored units
  Matrix truth;
  Matrix copy_last;
  double mse = 0.0;
  double copy_last_mse = 0.0;
};

/// Holds out the last `horizon` steps of every series and rolls the model
/// forward from the rest. Throws ConfigError unless 1 <= horizon < steps.
ForecastEvaluation evaluate_forecast(const train::Checkpoint& ckpt, const data::SeriesBatch& series, int horizon);

}  // namespace dpsom::cli
