#include "dpsom/metrics/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpsom/errors.hpp"
#include "dpsom/ndcore/random.hpp"

namespace dpsom::metrics {
namespace {

void require_pair(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) {
    throw DimensionError("assignment has " + std::to_string(a.size()) + " entries, labels have " +
                         std::to_string(b.size()));
  }
  if (a.empty()) throw InputError("cannot score an empty clustering");
}

double entropy(const Eigen::VectorXd& counts, double total) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) {
      const double p = counts[i] / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

/// N x K squared distances, computed blockwise.
Matrix sq_dist(const Matrix& x, const Matrix& c) {
  Matrix d = -2.0 * x * c.transpose();
  d.colwise() += x.rowwise().squaredNorm();
  d.rowwise() += c.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

}  // namespace

Contingency Contingency::build(const std::vector<int>& assignment, const std::vector<int>& labels, int min_clusters) {
  require_pair(assignment, labels);
  const int k = std::max(min_clusters, *std::max_element(assignment.begin(), assignment.end()) + 1);
  const int c = *std::max_element(labels.begin(), labels.end()) + 1;
  if (*std::min_element(assignment.begin(), assignment.end()) < 0 || *std::min_element(labels.begin(), labels.end()) < 0) {
    throw IndexError("cluster and class indices must be non-negative");
  }
  Contingency out{Eigen::MatrixXi::Zero(k, c), static_cast<long>(assignment.size())};
  for (std::size_t i = 0; i < assignment.size(); ++i) out.counts(assignment[i], labels[i]) += 1;
  return out;
}

double purity(const std::vector<int>& assignment, const std::vector<int>& labels) {
  const auto table = Contingency::build(assignment, labels);
  long hits = 0;
  for (Eigen::Index k = 0; k < table.counts.rows(); ++k) hits += table.counts.row(k).maxCoeff();
  return static_cast<double>(hits) / static_cast<double>(table.total);
}

double nmi(const std::vector<int>& assignment, const std::vector<int>& labels) {
  const auto table = Contingency::build(assignment, labels);
  const Eigen::MatrixXd joint = table.counts.cast<double>();
  const double n = static_cast<double>(table.total);
  const Eigen::VectorXd rows = joint.rowwise().sum();
  const Eigen::VectorXd cols = joint.colwise().sum().transpose();
  const double ha = entropy(rows, n);
  const double hl = entropy(cols, n);
  if (ha <= 0.0 && hl <= 0.0) return 1.0;
  if (ha <= 0.0 || hl <= 0.0) return 0.0;
  double mi = 0.0;
  for (Eigen::Index k = 0; k < joint.rows(); ++k) {
    for (Eigen::Index c = 0; c < joint.cols(); ++c) {
      if (joint(k, c) > 0) mi += joint(k, c) / n * std::log(joint(k, c) * n / (rows[k] * cols[c]));
    }
  }
  return std::clamp(mi / std::sqrt(ha * hl), 0.0, 1.0);
}

double morans_index(const som::GridSpec& grid, const Vector& y) {
  const int K = grid.size();
  if (y.size() != K) throw DimensionError("morans_index: y has " + std::to_string(y.size()) + " entries for " +
                                          std::to_string(K) + " nodes");
  const Vector dev = y.array() - y.mean();
  const double denom = dev.squaredNorm();
  if (!(denom > 0.0)) throw UndefinedIndexError("Moran's index is undefined for constant y");
  double weight_total = 0.0;
  double cross = 0.0;
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      if (i == j) continue;
      const double w = std::exp(-static_cast<double>(som::grid_distance(grid, i, j)));
      weight_total += w;
      cross += w * dev[i] * dev[j];
    }
  }
  return static_cast<double>(K) / weight_total * cross / denom;
}

double forecast_mse(const Matrix& predicted, const Matrix& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
    throw DimensionError("forecast_mse: prediction and truth shapes differ");
  }
  if (predicted.size() == 0) throw InputError("forecast_mse: empty input");
  return (predicted - truth).squaredNorm() / static_cast<double>(predicted.size());
}

Vector cluster_means(const std::vector<int>& assignment, const std::vector<double>& values, int k) {
  if (assignment.size() != values.size()) {
    throw DimensionError("cluster_means: " + std::to_string(assignment.size()) + " assignments for " +
                         std::to_string(values.size()) + " values");
  }
  if (values.empty()) throw InputError("cluster_means: no points");
  Vector sums = Vector::Zero(k), counts = Vector::Zero(k);
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int a = assignment[i];
    if (a < 0 || a >= k) throw IndexError("cluster_means: cluster " + std::to_string(a) + " outside [0, k)");
    sums[a] += values[i];
    counts[a] += 1.0;
    total += values[i];
  }
  const double global = total / static_cast<double>(values.size());
  Vector out(k);
  for (int j = 0; j < k; ++j) out[j] = counts[j] > 0 ? sums[j] / counts[j] : global;
  return out;
}

int clusters_used(const std::vector<int>& assignment) {
  std::vector<int> sorted = assignment;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

std::vector<int> row_argmax(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best = 0;
    m.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

KMeansResult kmeans(const Matrix& data, int k, std::uint64_t seed, int max_iterations) {
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  if (data.rows() < k) throw InputError("kmeans: " + std::to_string(data.rows()) + " points for k = " + std::to_string(k));
  const Eigen::Index n = data.rows();
  nd::Rng rng(seed);

  // k-means++ seeding
  Matrix centroids(k, data.cols());
  centroids.row(0) = data.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  Vector closest = (data.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = closest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        r -= closest[pick];
        if (r <= 0.0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    }
    centroids.row(c) = data.row(pick);
    closest = closest.cwiseMin((data.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  KMeansResult out;
  out.assignment.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iterations; ++iter) {
    const Matrix d = sq_dist(data, centroids);
    bool changed = false;
    Vector cost(n);
    std::vector<long> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      cost[i] = d.row(i).minCoeff(&best);
      if (out.assignment[static_cast<std::size_t>(i)] != best) changed = true;
      out.assignment[static_cast<std::size_t>(i)] = static_cast<int>(best);
      ++sizes[static_cast<std::size_t>(best)];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      // Reseed at the farthest point whose own cluster keeps at least one member.
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int owner = out.assignment[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(owner)] < 2) continue;
        if (far < 0 || cost[i] > cost[far]) far = i;
      }
      if (far < 0) break;
      --sizes[static_cast<std::size_t>(out.assignment[static_cast<std::size_t>(far)])];
      out.assignment[static_cast<std::size_t>(far)] = c;
      sizes[static_cast<std::size_t>(c)] = 1;
      cost[far] = 0.0;
      changed = true;
    }
    centroids.setZero();
    for (Eigen::Index i = 0; i < n; ++i) centroids.row(out.assignment[static_cast<std::size_t>(i)]) += data.row(i);
    for (int c = 0; c < k; ++c) centroids.row(c) /= static_cast<double>(std::max<long>(1, sizes[static_cast<std::size_t>(c)]));
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      inertia += (data.row(i) - centroids.row(out.assignment[static_cast<std::size_t>(i)])).squaredNorm();
    }
    out.inertia_history.push_back(inertia);
    if (!changed) break;
  }
  out.centroids = std::move(centroids);
  return out;
}

}  // namespace dpsom::metrics
