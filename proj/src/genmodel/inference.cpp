#include "dpsom/genmodel/inference.hpp"

#include <algorithm>

#include "dpsom/errors.hpp"
#include "dpsom/genmodel/networks.hpp"

namespace dpsom::gen {
namespace {

constexpr Eigen::Index kChunk = 2048;

void require_finite(double value, const char* term) {
  if (!std::isfinite(value)) throw NumericalFailure(term, "value is not finite");
}

}  // namespace

Encoding encode(const nd::ParamVector& params, const VaeArchitecture& arch, const Matrix& x, bool training,
                nd::Rng& rng) {
  nd::Tape tape;
  nd::BoundParams p(tape, params, [](const std::string&) { return false; });
  nd::Rng dropout_rng = rng.split(1);
  const auto q = encode(p, arch, tape.constant(x), training ? &dropout_rng : nullptr);
  nd::Rng eps_rng = rng.split(2);
  const auto z = reparameterize(q, eps_rng);
  return {q.mean.value(), q.log_var.value(), z.value()};
}

Matrix encode_mean(const nd::ParamVector& params, const VaeArchitecture& arch, const Matrix& x) {
  Matrix out(x.rows(), arch.latent_dim);
  for (Eigen::Index start = 0; start < x.rows(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, x.rows() - start);
    nd::Tape tape;
    nd::BoundParams p(tape, params, [](const std::string&) { return false; });
    out.middleRows(start, n) = encode(p, arch, tape.constant(x.middleRows(start, n)), nullptr).mean.value();
  }
  return out;
}

Decoding decode(const nd::ParamVector& params, const VaeArchitecture& arch, const Matrix& z) {
  Decoding out;
  out.mean.resize(z.rows(), arch.input_dim);
  if (arch.likelihood == Likelihood::gaussian) out.log_var.resize(z.rows(), arch.input_dim);
  for (Eigen::Index start = 0; start < z.rows(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, z.rows() - start);
    nd::Tape tape;
    nd::BoundParams p(tape, params, [](const std::string&) { return false; });
    const auto d = decode(p, arch, tape.constant(z.middleRows(start, n)), nullptr);
    if (arch.likelihood == Likelihood::bernoulli) {
      out.mean.middleRows(start, n) = d.mean_or_logits.value().unaryExpr([](double v) { return nd::logistic(v); });
    } else {
      out.mean.middleRows(start, n) = d.mean_or_logits.value();
      out.log_var.middleRows(start, n) = d.log_var.value();
    }
  }
  return out;
}

ElboTerms elbo_loss(const nd::ParamVector& params, const VaeArchitecture& arch, const Matrix& x, nd::Rng& rng,
                    bool plain_autoencoder) {
  if (x.rows() == 0) throw InputError("elbo_loss: empty batch");
  nd::Tape tape;
  nd::BoundParams p(tape, params, [](const std::string&) { return false; });
  const auto q = encode(p, arch, tape.constant(x), nullptr);
  ElboTerms terms;
  if (plain_autoencoder) {
    terms.recon = reconstruction_nll(decode(p, arch, q.mean, nullptr), arch, x).scalar();
  } else {
    nd::Rng eps_rng = rng.split(2);
    const auto z = reparameterize(q, eps_rng);
    terms.recon = reconstruction_nll(decode(p, arch, z, nullptr), arch, x).scalar();
    terms.kl = gaussian_kl(q).scalar();
  }
  require_finite(terms.recon, "elbo_recon");
  require_finite(terms.kl, "elbo_kl");
  return terms;
}

double smooth_loss(const Matrix& latents, Eigen::Index n_series, Eigen::Index steps, double alpha) {
  nd::Tape tape;
  return smooth_loss(tape.constant(latents), n_series, steps, alpha).scalar();
}

ForecastSequence forecast(const nd::ParamVector& params, const Matrix& sequence) {
  if (sequence.rows() < 1) throw InputError("forecast: empty sequence");
  nd::Tape tape;
  nd::BoundParams p(tape, params, [](const std::string&) { return false; });
  const Eigen::Index l = p[kForecasterHiddenW].rows();
  if (sequence.cols() != l) throw DimensionError("forecast: sequence width differs from latent_dim");
  LstmState state = zero_lstm_state(tape, 1, l);
  ForecastSequence out{Matrix(sequence.rows(), l), Matrix(sequence.rows(), l)};
  for (Eigen::Index t = 0; t < sequence.rows(); ++t) {
    const auto step = forecaster_step(p, tape.constant(sequence.row(t)), state);
    out.mean.row(t) = step.mean.value();
    out.log_var.row(t) = step.log_var.value();
  }
  return out;
}

double pred_loss(const nd::ParamVector& params, const Matrix& latents, Eigen::Index n_series, Eigen::Index steps) {
  nd::Tape tape;
  nd::BoundParams p(tape, params, [](const std::string&) { return false; });
  const double v = pred_loss(p, tape.constant(latents), latents, n_series, steps).scalar();
  require_finite(v, "pred");
  return v;
}

}  // namespace dpsom::gen
