#pragma once

#include "dpsom/ndcore/tape.hpp"
#include "dpsom/ndcore/types.hpp"
#include "dpsom/somgrid/grid.hpp"

namespace dpsom::psom {

/// Floor applied to probabilities before taking logs.
inline constexpr double kLogClamp = 1e-10;
/// Exponent used to sharpen soft assignments into targets.
inline constexpr int kHardening = 2;
inline constexpr double kDefaultAlpha = 10.0;

/// Soft assignments S and hardened targets T, both N x K row-stochastic.
struct Assignments {
  Matrix soft;
  Matrix target;
  double alpha = kDefaultAlpha;
};

/// Student-t kernel (1 + ||z_i - mu_j||^2 / alpha)^(-(alpha + 1) / 2),
/// normalised over j. Throws ConfigError for alpha <= 0.
Matrix soft_assignments(const Matrix& latents, const Matrix& centroids, double alpha);

/// Column sums f_j = sum_i s_ij; used as the reference frequencies for targets.
RowVector cluster_frequencies(const Matrix& soft);

/// t_ij = (s_ij^2 / f_j) / sum_j' (s_ij'^2 / f_j'). Zero frequencies are
/// clamped at kLogClamp with a warning.
Matrix target_distribution(const Matrix& soft, const RowVector& frequencies);
/// Uses the column sums of `soft` itself as frequencies.
Matrix target_distribution(const Matrix& soft);

/// KL(T || S) summed over rows.
double cah_loss(const Matrix& soft, const Matrix& target);

/// -(1/N) sum_i sum_j s_ij sum_{e in N(j)} log s_ie
double ssom_loss(const Matrix& soft, const som::GridSpec& grid);

/// cah_loss + beta * ssom_loss
double psom_loss(const Matrix& soft, const Matrix& target, const som::GridSpec& grid, double beta);

// Differentiable forms. Targets are constants: no gradient flows through T.
nd::Var soft_assignments(const nd::Var& latents, const nd::Var& centroids, double alpha);
nd::Var cah_loss(const nd::Var& soft, const Matrix& target);
nd::Var ssom_loss(const nd::Var& soft, const som::GridSpec& grid);

}  // namespace dpsom::psom
