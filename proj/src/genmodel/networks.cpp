#include "dpsom/genmodel/networks.hpp"

#include <cmath>
#include <numbers>

#include "dpsom/errors.hpp"

namespace dpsom::gen {
namespace {

nd::Var activate(const nd::Var& a, Activation act) { return act == Activation::relu ? nd::relu(a) : nd::tanh(a); }

nd::Var dense(const nd::BoundParams& p, const std::string& w, const std::string& b, const nd::Var& x) {
  return nd::add_row(nd::matmul(x, p[w]), p[b]);
}

nd::Var dropout(const nd::Var& a, double rate, nd::Rng* rng) {
  if (rng == nullptr || rate <= 0.0) return a;
  Matrix mask(a.rows(), a.cols());
  const double keep = 1.0 - rate;
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
  return nd::mul(a, a.tape().constant(std::move(mask)));
}

}  // namespace

Posterior encode(const nd::BoundParams& p, const VaeArchitecture& arch, const nd::Var& x, nd::Rng* dropout_rng) {
  if (x.cols() != arch.input_dim) {
    throw DimensionError("encode: input has " + std::to_string(x.cols()) + " columns, expected " +
                         std::to_string(arch.input_dim));
  }
  nd::Var h = x;
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    h = dropout(activate(dense(p, encoder_weight(i), encoder_bias(i), h), arch.activation), arch.dropout, dropout_rng);
  }
  return {dense(p, kEncoderMeanW, kEncoderMeanB, h),
          nd::clamp(dense(p, kEncoderLogVarW, kEncoderLogVarB, h), nd::kLogVarMin, nd::kLogVarMax)};
}

DecoderOutput decode(const nd::BoundParams& p, const VaeArchitecture& arch, const nd::Var& z, nd::Rng* dropout_rng) {
  if (z.cols() != arch.latent_dim) {
    throw DimensionError("decode: latent has " + std::to_string(z.cols()) + " columns, expected " +
                         std::to_string(arch.latent_dim));
  }
  nd::Var h = z;
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    h = dropout(activate(dense(p, decoder_weight(i), decoder_bias(i), h), arch.activation), arch.dropout, dropout_rng);
  }
  DecoderOutput out{dense(p, kDecoderOutW, kDecoderOutB, h), {}};
  if (arch.likelihood == Likelihood::gaussian) {
    out.log_var = nd::clamp(dense(p, kDecoderLogVarW, kDecoderLogVarB, h), nd::kLogVarMin, nd::kLogVarMax);
  }
  return out;
}

nd::Var reparameterize(const Posterior& q, nd::Rng& rng) {
  auto& tape = q.mean.tape();
  const auto eps = tape.constant(rng.normal_matrix(q.mean.rows(), q.mean.cols()));
  return nd::add(q.mean, nd::mul(nd::exp(nd::scale(q.log_var, 0.5)), eps));
}

nd::Var gaussian_kl(const Posterior& q) {
  // 0.5 * sum(mu^2 + exp(lv) - 1 - lv)
  const auto inner = nd::sub(nd::add(nd::square(q.mean), nd::exp(q.log_var)), q.log_var);
  return nd::scale(nd::add_scalar(nd::sum(inner), -static_cast<double>(q.mean.value().size())), 0.5);
}

nd::Var gaussian_nll(const nd::Var& mean, const nd::Var& log_var, const Matrix& target) {
  auto& tape = mean.tape();
  const auto err = nd::square(nd::sub(tape.constant(target), mean));
  const auto weighted = nd::mul(err, nd::exp(nd::scale(log_var, -1.0)));
  const double log2pi = std::log(2.0 * std::numbers::pi) * static_cast<double>(target.size());
  return nd::scale(nd::add_scalar(nd::sum(nd::add(log_var, weighted)), log2pi), 0.5);
}

nd::Var reconstruction_nll(const DecoderOutput& out, const VaeArchitecture& arch, const Matrix& x) {
  if (arch.likelihood == Likelihood::bernoulli) return nd::bce_with_logits_sum(out.mean_or_logits, x);
  return gaussian_nll(out.mean_or_logits, out.log_var, x);
}

LstmState zero_lstm_state(nd::Tape& tape, Eigen::Index rows, Eigen::Index latent_dim) {
  return {tape.constant(Matrix::Zero(rows, latent_dim)), tape.constant(Matrix::Zero(rows, latent_dim))};
}

ForecastStep forecaster_step(const nd::BoundParams& p, const nd::Var& input, LstmState& state) {
  const Eigen::Index l = p[kForecasterHiddenW].rows();
  if (input.cols() != l) throw DimensionError("forecaster: input width differs from latent_dim");
  const auto gates =
      nd::add_row(nd::add(nd::matmul(input, p[kForecasterInputW]), nd::matmul(state.hidden, p[kForecasterHiddenW])),
                  p[kForecasterBias]);
  const auto in_gate = nd::sigmoid(nd::col_block(gates, 0, l));
  const auto forget_gate = nd::sigmoid(nd::col_block(gates, l, l));
  const auto candidate = nd::tanh(nd::col_block(gates, 2 * l, l));
  const auto out_gate = nd::sigmoid(nd::col_block(gates, 3 * l, l));
  state.cell = nd::add(nd::mul(forget_gate, state.cell), nd::mul(in_gate, candidate));
  state.hidden = nd::mul(out_gate, nd::tanh(state.cell));
  return {nd::add_row(nd::matmul(state.hidden, p[kForecasterMeanW]), p[kForecasterMeanB]),
          nd::clamp(nd::add_row(nd::matmul(state.hidden, p[kForecasterLogVarW]), p[kForecasterLogVarB]),
                    nd::kLogVarMin, nd::kLogVarMax)};
}

std::vector<Eigen::Index> rows_at_step(Eigen::Index n_series, Eigen::Index steps, Eigen::Index t) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n_series));
  for (Eigen::Index i = 0; i < n_series; ++i) rows[static_cast<std::size_t>(i)] = i * steps + t;
  return rows;
}

nd::Var smooth_loss(const nd::Var& latents, Eigen::Index n_series, Eigen::Index steps, double alpha) {
  if (steps < 2) throw InputError("smooth_loss needs at least 2 time steps");
  if (latents.rows() != n_series * steps) throw DimensionError("smooth_loss: latent rows != N * T");
  std::vector<Eigen::Index> from, to;
  from.reserve(static_cast<std::size_t>(n_series * (steps - 1)));
  to.reserve(from.capacity());
  for (Eigen::Index i = 0; i < n_series; ++i) {
    for (Eigen::Index t = 0; t + 1 < steps; ++t) {
      from.push_back(i * steps + t);
      to.push_back(i * steps + t + 1);
    }
  }
  const auto d = nd::row_sq_norm(nd::sub(nd::gather_rows(latents, from), nd::gather_rows(latents, to)));
  const auto u = nd::pow_scalar(nd::add_scalar(nd::scale(d, 1.0 / alpha), 1.0), -(alpha + 1.0) / 2.0);
  return nd::scale(nd::mean(u), -1.0);
}

nd::Var pred_loss(const nd::BoundParams& p, const nd::Var& inputs, const Matrix& targets, Eigen::Index n_series,
                  Eigen::Index steps) {
  if (steps < 2) throw InputError("pred_loss needs at least 2 time steps");
  if (inputs.rows() != n_series * steps || targets.rows() != inputs.rows()) {
    throw DimensionError("pred_loss: rows != N * T");
  }
  auto& tape = inputs.tape();
  LstmState state = zero_lstm_state(tape, n_series, inputs.cols());
  nd::Var total;
  for (Eigen::Index t = 0; t + 1 < steps; ++t) {
    const auto step = forecaster_step(p, nd::gather_rows(inputs, rows_at_step(n_series, steps, t)), state);
    Matrix target(n_series, targets.cols());
    for (Eigen::Index i = 0; i < n_series; ++i) target.row(i) = targets.row(i * steps + t + 1);
    const auto nll = gaussian_nll(step.mean, step.log_var, target);
    total = total.valid() ? nd::add(total, nll) : nll;
  }
  return total;
}

}  // namespace dpsom::gen
