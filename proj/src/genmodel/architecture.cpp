#include "dpsom/genmodel/architecture.hpp"

#include <cmath>

#include "dpsom/errors.hpp"

namespace dpsom::gen {

std::string to_string(Likelihood l) { return l == Likelihood::bernoulli ? "bernoulli" : "gaussian"; }
std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Likelihood parse_likelihood(const std::string& text) {
  if (text == "bernoulli") return Likelihood::bernoulli;
  if (text == "gaussian") return Likelihood::gaussian;
  throw ConfigError("unknown likelihood '" + text + "' (expected bernoulli or gaussian)");
}

Activation parse_activation(const std::string& text) {
  if (text == "relu") return Activation::relu;
  if (text == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + text + "' (expected relu or tanh)");
}

void VaeArchitecture::validate() const {
  if (input_dim <= 0) throw ConfigError("input_dim must be positive");
  if (latent_dim <= 0) throw ConfigError("latent_dim must be positive");
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("hidden layer sizes must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

std::string encoder_weight(std::size_t layer) { return "encoder.w" + std::to_string(layer); }
std::string encoder_bias(std::size_t layer) { return "encoder.b" + std::to_string(layer); }
std::string decoder_weight(std::size_t layer) { return "decoder.w" + std::to_string(layer); }
std::string decoder_bias(std::size_t layer) { return "decoder.b" + std::to_string(layer); }

void add_vae_blocks(nd::ParamVector& params, const VaeArchitecture& arch) {
  arch.validate();
  int in = arch.input_dim;
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    params.add_block(encoder_weight(i), in, arch.hidden[i]);
    params.add_block(encoder_bias(i), 1, arch.hidden[i]);
    in = arch.hidden[i];
  }
  params.add_block(kEncoderMeanW, in, arch.latent_dim);
  params.add_block(kEncoderMeanB, 1, arch.latent_dim);
  params.add_block(kEncoderLogVarW, in, arch.latent_dim);
  params.add_block(kEncoderLogVarB, 1, arch.latent_dim);

  in = arch.latent_dim;
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    const int out = arch.hidden[arch.hidden.size() - 1 - i];
    params.add_block(decoder_weight(i), in, out);
    params.add_block(decoder_bias(i), 1, out);
    in = out;
  }
  params.add_block(kDecoderOutW, in, arch.input_dim);
  params.add_block(kDecoderOutB, 1, arch.input_dim);
  if (arch.likelihood == Likelihood::gaussian) {
    params.add_block(kDecoderLogVarW, in, arch.input_dim);
    params.add_block(kDecoderLogVarB, 1, arch.input_dim);
  }
}

void add_forecaster_blocks(nd::ParamVector& params, int latent_dim) {
  if (latent_dim <= 0) throw ConfigError("latent_dim must be positive");
  params.add_block(kForecasterInputW, latent_dim, 4 * latent_dim);
  params.add_block(kForecasterHiddenW, latent_dim, 4 * latent_dim);
  params.add_block(kForecasterBias, 1, 4 * latent_dim);
  params.add_block(kForecasterMeanW, latent_dim, latent_dim);
  params.add_block(kForecasterMeanB, 1, latent_dim);
  params.add_block(kForecasterLogVarW, latent_dim, latent_dim);
  params.add_block(kForecasterLogVarB, 1, latent_dim);
}

void add_centroid_block(nd::ParamVector& params, int clusters, int latent_dim) {
  params.add_block(kCentroids, clusters, latent_dim);
}

void init_weights(nd::ParamVector& params, nd::Rng& rng) {
  std::uint64_t key = 0;
  for (const auto& name : params.names_in_storage_order()) {
    ++key;
    if (name == kCentroids) continue;
    auto block = params.block(name);
    const auto dot = name.rfind('.');
    const bool is_weight = dot != std::string::npos && name.compare(dot + 1, 1, "w") == 0;
    if (is_weight) {
      nd::Rng local = rng.split(key);
      const double limit = std::sqrt(6.0 / static_cast<double>(block.rows() + block.cols()));
      for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = (2.0 * local.uniform() - 1.0) * limit;
    } else {
      block.setZero();
    }
  }
  if (params.has(kForecasterBias)) {
    auto b = params.block(kForecasterBias);
    const Eigen::Index l = b.cols() / 4;
    b.middleCols(l, l).setOnes();
  }
}

}  // namespace dpsom::gen
