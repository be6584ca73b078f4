#include "dpsom/psom/assignments.hpp"

#include <cmath>

#include "dpsom/errors.hpp"
#include "dpsom/log.hpp"
#include "dpsom/ndcore/ops.hpp"

namespace dpsom::psom {
namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("Student-t degrees of freedom alpha must be positive");
}

void require_grid_columns(Eigen::Index cols, const som::GridSpec& grid) {
  if (cols != grid.size()) {
    throw DimensionError("assignments have " + std::to_string(cols) + " columns, grid " + grid.to_string() + " has " +
                         std::to_string(grid.size()) + " nodes");
  }
}

Matrix squared_distances(const Matrix& z, const Matrix& m) {
  Matrix d = -2.0 * z * m.transpose();
  d.colwise() += z.rowwise().squaredNorm();
  d.rowwise() += m.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

}  // namespace

Matrix soft_assignments(const Matrix& latents, const Matrix& centroids, double alpha) {
  require_alpha(alpha);
  if (latents.cols() != centroids.cols()) throw DimensionError("soft_assignments: latent and centroid dims differ");
  const double p = -(alpha + 1.0) / 2.0;
  Matrix q = (p * (1.0 + squared_distances(latents, centroids).array() / alpha).log()).exp();
  const Vector sums = q.rowwise().sum();
  return q.array().colwise() / sums.array();
}

RowVector cluster_frequencies(const Matrix& soft) { return soft.colwise().sum(); }

Matrix target_distribution(const Matrix& soft, const RowVector& frequencies) {
  if (frequencies.size() != soft.cols()) throw DimensionError("target_distribution: frequency vector size");
  RowVector f = frequencies;
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    if (!(f[j] > kLogClamp)) {
      warn("target_distribution: cluster " + std::to_string(j) + " has zero total assignment; clamped");
      f[j] = kLogClamp;
    }
  }
  Matrix t = soft.array().pow(kHardening).rowwise() / f.array();
  const Vector sums = t.rowwise().sum();
  return t.array().colwise() / sums.array();
}

Matrix target_distribution(const Matrix& soft) { return target_distribution(soft, cluster_frequencies(soft)); }

double cah_loss(const Matrix& soft, const Matrix& target) {
  if (soft.rows() != target.rows() || soft.cols() != target.cols()) throw DimensionError("cah_loss: shape mismatch");
  const auto t = target.array().max(kLogClamp);
  const auto s = soft.array().max(kLogClamp);
  return (target.array() * (t.log() - s.log())).sum();
}

double ssom_loss(const Matrix& soft, const som::GridSpec& grid) {
  require_grid_columns(soft.cols(), grid);
  if (soft.rows() == 0) return 0.0;
  const Matrix logs = soft.array().max(kLogClamp).log();
  double total = 0.0;
  for (int j = 0; j < grid.size(); ++j) {
    for (const int e : som::neighbors(grid, j)) total += soft.col(j).dot(logs.col(e));
  }
  return -total / static_cast<double>(soft.rows());
}

double psom_loss(const Matrix& soft, const Matrix& target, const som::GridSpec& grid, double beta) {
  if (beta < 0.0) throw ConfigError("psom_loss: beta must be non-negative");
  return cah_loss(soft, target) + beta * ssom_loss(soft, grid);
}

nd::Var soft_assignments(const nd::Var& latents, const nd::Var& centroids, double alpha) {
  require_alpha(alpha);
  if (latents.cols() != centroids.cols()) throw DimensionError("soft_assignments: latent and centroid dims differ");
  const double p = -(alpha + 1.0) / 2.0;
  Matrix d = squared_distances(latents.value(), centroids.value());
  Matrix q = (p * (1.0 + d.array() / alpha).log()).exp();
  q.array().colwise() /= q.rowwise().sum().array();
  // d/dd_ij of q_ij-weighted loss: (g_ij - <g_i, q_i>) q_ij p / (alpha + d_ij)
  return latents.tape().record(
      std::move(q), {latents, centroids},
      [latents, centroids, d = std::move(d), p, alpha](nd::Tape& t, const Matrix& q, const Matrix& g) {
        const Vector r = g.cwiseProduct(q).rowwise().sum();
        const Matrix w = ((g.array().colwise() - r.array()) * q.array() * p / (alpha + d.array())).matrix();
        if (latents.requires_grad()) {
          const Vector rows = w.rowwise().sum();
          t.accumulate(latents, 2.0 * ((latents.value().array().colwise() * rows.array()).matrix() -
                                       w * centroids.value()));
        }
        if (centroids.requires_grad()) {
          const Vector cols = w.colwise().sum().transpose();
          t.accumulate(centroids, 2.0 * ((centroids.value().array().colwise() * cols.array()).matrix() -
                                         w.transpose() * latents.value()));
        }
      });
}

nd::Var cah_loss(const nd::Var& soft, const Matrix& target) {
  if (soft.rows() != target.rows() || soft.cols() != target.cols()) throw DimensionError("cah_loss: shape mismatch");
  auto& tape = soft.tape();
  const double entropy_part = (target.array() * target.array().max(kLogClamp).log()).sum();
  const auto cross = nd::sum(nd::mul(nd::log_clamped(soft, kLogClamp), tape.constant(target)));
  return nd::add_scalar(nd::scale(cross, -1.0), entropy_part);
}

namespace {

std::vector<std::vector<Eigen::Index>> neighbor_sources(const som::GridSpec& grid) {
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(grid.size()));
  for (int j = 0; j < grid.size(); ++j) {
    for (const int e : som::neighbors(grid, j)) out[static_cast<std::size_t>(j)].push_back(e);
  }
  return out;
}

}  // namespace

nd::Var ssom_loss(const nd::Var& soft, const som::GridSpec& grid) {
  require_grid_columns(soft.cols(), grid);
  const auto neighbor_logs = nd::sum_columns(nd::log_clamped(soft, kLogClamp), neighbor_sources(grid));
  return nd::scale(nd::sum(nd::mul(soft, neighbor_logs)), -1.0 / static_cast<double>(soft.rows()));
}

}  // namespace dpsom::psom
