#pragma once

#include <string>
#include <vector>

#include "dpsom/ndcore/param_vector.hpp"
#include "dpsom/ndcore/random.hpp"

namespace dpsom::gen {

enum class Likelihood { bernoulli, gaussian };
enum class Activation { relu, tanh };

std::string to_string(Likelihood l);
std::string to_string(Activation a);
Likelihood parse_likelihood(const std::string& text);
Activation parse_activation(const std::string& text);

/// Fully connected d - hidden... - l encoder and the mirrored decoder.
struct VaeArchitecture {
  int input_dim = 784;
  std::vector<int> hidden{500, 500, 2000};
  int latent_dim = 100;
  /// Applied to hidden layers of encoder and decoder while training.
  double dropout = 0.0;
  Likelihood likelihood = Likelihood::bernoulli;
  Activation activation = Activation::relu;

  /// Throws ConfigError on non-positive dims or dropout outside [0, 1).
  void validate() const;
};

// Block names.
std::string encoder_weight(std::size_t layer);
std::string encoder_bias(std::size_t layer);
std::string decoder_weight(std::size_t layer);
std::string decoder_bias(std::size_t layer);
inline const std::string kEncoderMeanW = "encoder.mean.w";
inline const std::string kEncoderMeanB = "encoder.mean.b";
inline const std::string kEncoderLogVarW = "encoder.logvar.w";
inline const std::string kEncoderLogVarB = "encoder.logvar.b";
inline const std::string kDecoderOutW = "decoder.out.w";
inline const std::string kDecoderOutB = "decoder.out.b";
inline const std::string kDecoderLogVarW = "decoder.logvar.w";
inline const std::string kDecoderLogVarB = "decoder.logvar.b";
inline const std::string kCentroids = "centroids";
inline const std::string kForecasterInputW = "forecaster.wx";
inline const std::string kForecasterHiddenW = "forecaster.wh";
inline const std::string kForecasterBias = "forecaster.b";
inline const std::string kForecasterMeanW = "forecaster.mean.w";
inline const std::string kForecasterMeanB = "forecaster.mean.b";
inline const std::string kForecasterLogVarW = "forecaster.logvar.w";
inline const std::string kForecasterLogVarB = "forecaster.logvar.b";

void add_vae_blocks(nd::ParamVector& params, const VaeArchitecture& arch);
/// Single-layer LSTM with hidden size = latent_dim, plus mean and
/// log-variance heads for the next latent.
void add_forecaster_blocks(nd::ParamVector& params, int latent_dim);
void add_centroid_block(nd::ParamVector& params, int clusters, int latent_dim);

/// Glorot-uniform for every weight block ("*.w*"), zeros for biases, and a
/// forget-gate bias of 1 for the forecaster. Centroids are left untouched.
void init_weights(nd::ParamVector& params, nd::Rng& rng);

}  // namespace dpsom::gen
