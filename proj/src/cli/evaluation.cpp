#include "dpsom/cli/evaluation.hpp"

#include <limits>

#include "dpsom/errors.hpp"
#include "dpsom/metrics/clustering.hpp"
#include "dpsom/trainer/trainer.hpp"

namespace dpsom::cli {
namespace {

std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

void add_label_metrics(ClusterEvaluation& e, const std::vector<int>& labels, const std::string& prefix) {
  if (labels.empty()) return;
  e.values[prefix + "purity"] = metrics::purity(e.assignment, labels);
  e.values[prefix + "nmi"] = metrics::nmi(e.assignment, labels);
}

ClusterEvaluation assign(const train::Checkpoint& ckpt, const Matrix& x) {
  ClusterEvaluation e;
  e.soft = train::soft_assign(ckpt, x);
  e.assignment = train::assign_clusters(ckpt, x);
  e.values["clusters_used"] = metrics::clusters_used(e.assignment);
  return e;
}

}  // namespace

double morans_or_nan(const som::GridSpec& grid, const Vector& cluster_values) {
  try {
    return metrics::morans_index(grid, cluster_values);
  } catch (const UndefinedIndexError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

ClusterEvaluation evaluate_static(const train::Checkpoint& ckpt, const data::Batch& batch) {
  if (ckpt.kind != train::DataKind::images) throw ConfigError("checkpoint was trained on series data");
  ClusterEvaluation e = assign(ckpt, batch.x);
  add_label_metrics(e, batch.labels, "");
  if (batch.labeled()) {
    e.cluster_label = metrics::cluster_means(e.assignment, as_doubles(batch.labels), ckpt.config.grid.size());
    e.values["morans_i"] = morans_or_nan(ckpt.config.grid, e.cluster_label);
  }
  return e;
}

ClusterEvaluation evaluate_series(const train::Checkpoint& ckpt, const data::SeriesBatch& series) {
  if (ckpt.kind != train::DataKind::series) throw ConfigError("checkpoint was trained on static data");
  ClusterEvaluation e = assign(ckpt, series.x);
  add_label_metrics(e, series.step_labels, "");
  if (series.labeled()) e.values["enrichment_nmi"] = e.values["nmi"];
  add_label_metrics(e, series.regimes, "regime_");
  const int k = ckpt.config.grid.size();
  if (!series.severity.empty()) {
    e.cluster_label = metrics::cluster_means(e.assignment, series.severity, k);
  } else if (series.labeled()) {
    e.cluster_label = metrics::cluster_means(e.assignment, as_doubles(series.step_labels), k);
  }
  if (e.cluster_label.size() > 0) e.values["morans_i"] = morans_or_nan(ckpt.config.grid, e.cluster_label);
  return e;
}

std::map<std::string, double> kmeans_baseline(const Matrix& x, const std::vector<int>& labels, int k,
                                              std::uint64_t seed) {
  const auto km = metrics::kmeans(x, k, seed);
  return {{"kmeans_purity", metrics::purity(km.assignment, labels)},
          {"kmeans_nmi", metrics::nmi(km.assignment, labels)}};
}

ForecastEvaluation evaluate_forecast(const train::Checkpoint& ckpt, const data::SeriesBatch& series, int horizon) {
  if (horizon < 1 || horizon >= series.steps) {
    throw ConfigError("horizon must lie in [1, " + std::to_string(series.steps - 1) + "], got " +
                      std::to_string(horizon));
  }
  const auto prefix = series.steps_range(0, series.steps - horizon);
  ForecastEvaluation f;
  f.truth = series.steps_range(series.steps - horizon, horizon).x;
  f.predicted = train::forecast_rollout(ckpt, prefix, horizon);
  f.copy_last = train::copy_last_forecast(prefix, horizon);
  f.mse = metrics::forecast_mse(f.predicted, f.truth);
  f.copy_last_mse = metrics::forecast_mse(f.copy_last, f.truth);
  return f;
}

}  // namespace dpsom::cli
