#pragma once

#include "dpsom/genmodel/architecture.hpp"
#include "dpsom/ndcore/param_vector.hpp"
#include "dpsom/ndcore/random.hpp"

// Matrix-in, matrix-out forms of the generative model, for evaluation and tests.
namespace dpsom::gen {

struct Encoding {
  Matrix mean;
  Matrix log_var;
  Matrix z;
};

/// Dropout is active only when `training` is set; z is always sampled from rng.
Encoding encode(const nd::ParamVector& params, const VaeArchitecture& arch, const Matrix& x, bool training,
                nd::Rng& rng);

/// Posterior means only, in chunks (no sampling, no dropout).
Matrix encode_mean(const nd::ParamVector& params, const VaeArchitecture& arch, const Matrix& x);

struct Decoding {
  /// Bernoulli probabilities, or the Gaussian mean.
  Matrix mean;
  /// Empty for Bernoulli.
  Matrix log_var;
};

Decoding decode(const nd::ParamVector& params, const VaeArchitecture& arch, const Matrix& z);

struct ElboTerms {
  double recon = 0.0;
  double kl = 0.0;
};

/// One z sample per row, no dropout. With `plain_autoencoder` the bottleneck
/// is z = mean and kl is 0.
ElboTerms elbo_loss(const nd::ParamVector& params, const VaeArchitecture& arch, const Matrix& x, nd::Rng& rng,
                    bool plain_autoencoder = false);

double smooth_loss(const Matrix& latents, Eigen::Index n_series, Eigen::Index steps, double alpha);

struct ForecastSequence {
  Matrix mean;  // one row per input step: parameters of the next latent
  Matrix log_var;
};

/// Recurrent pass over one latent sequence (T x l).
ForecastSequence forecast(const nd::ParamVector& params, const Matrix& sequence);

double pred_loss(const nd::ParamVector& params, const Matrix& latents, Eigen::Index n_series, Eigen::Index steps);

}  // namespace dpsom::gen
