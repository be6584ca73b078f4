#pragma once

#include <vector>

#include "dpsom/genmodel/architecture.hpp"
#include "dpsom/ndcore/bound_params.hpp"
#include "dpsom/ndcore/ops.hpp"

namespace dpsom::gen {

/// Diagonal Gaussian q(z | x) per row.
struct Posterior {
  nd::Var mean;
  nd::Var log_var;
};

/// Decoder output: Bernoulli logits, or Gaussian mean with log-variance.
struct DecoderOutput {
  nd::Var mean_or_logits;
  nd::Var log_var;  // invalid for Bernoulli
};

/// Inverted dropout on hidden activations; pass nullptr to disable.
Posterior encode(const nd::BoundParams& p, const VaeArchitecture& arch, const nd::Var& x, nd::Rng* dropout_rng);
DecoderOutput decode(const nd::BoundParams& p, const VaeArchitecture& arch, const nd::Var& z, nd::Rng* dropout_rng);

/// mean + exp(log_var / 2) * eps, eps drawn from `rng`.
nd::Var reparameterize(const Posterior& q, nd::Rng& rng);

/// sum over rows of KL(N(mean, exp(log_var)) || N(0, I)), closed form.
nd::Var gaussian_kl(const Posterior& q);
/// -sum log p(x | decoder output).
nd::Var reconstruction_nll(const DecoderOutput& out, const VaeArchitecture& arch, const Matrix& x);
/// 0.5 * sum(log 2pi + log_var + (target - mean)^2 exp(-log_var)); target is constant.
nd::Var gaussian_nll(const nd::Var& mean, const nd::Var& log_var, const Matrix& target);

struct LstmState {
  nd::Var hidden;
  nd::Var cell;
};

struct ForecastStep {
  nd::Var mean;
  nd::Var log_var;
};

/// One recurrent step over a batch of latents (n x l).
ForecastStep forecaster_step(const nd::BoundParams& p, const nd::Var& input, LstmState& state);
LstmState zero_lstm_state(nd::Tape& tape, Eigen::Index rows, Eigen::Index latent_dim);

/// Rows of a flattened (series-major) N*T matrix at time step t.
std::vector<Eigen::Index> rows_at_step(Eigen::Index n_series, Eigen::Index steps, Eigen::Index t);

/// -(1/(N (T-1))) sum_i sum_{t<T} (1 + ||z_t - z_{t+1}||^2 / alpha)^(-(alpha+1)/2)
nd::Var smooth_loss(const nd::Var& latents, Eigen::Index n_series, Eigen::Index steps, double alpha);

/// Runs the forecaster over steps 0..T-2 of `inputs` and scores the next-step
/// `targets` (constants) under the predicted Gaussians.
nd::Var pred_loss(const nd::BoundParams& p, const nd::Var& inputs, const Matrix& targets, Eigen::Index n_series,
                  Eigen::Index steps);

}  // namespace dpsom::gen
