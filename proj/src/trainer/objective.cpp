#include "dpsom/trainer/objective.hpp"

#include <algorithm>
#include <cmath>

#include "dpsom/errors.hpp"
#include "dpsom/genmodel/networks.hpp"
#include "dpsom/ndcore/bound_params.hpp"
#include "dpsom/psom/assignments.hpp"

namespace dpsom::train {
namespace {

struct Shape {
  DataKind kind = DataKind::images;
  Eigen::Index n_series = 0;
  Eigen::Index steps = 1;
};

/// Values the objective treats as constants, captured from a forward pass.
struct Constants {
  Matrix targets;
  Matrix pred_targets;
};

bool contains(const std::vector<Term>& terms, Term t) {
  return std::find(terms.begin(), terms.end(), t) != terms.end();
}

/// Records the scaled terms on `tape`; inactive terms are absent.
std::map<Term, nd::Var> build_terms(nd::Tape& tape, const nd::BoundParams& p, const Matrix& x, const Shape& shape,
                                    const TrainConfig& config, const ObjectiveContext& ctx,
                                    const std::vector<Term>& active, Constants* captured = nullptr) {
  std::map<Term, nd::Var> out;
  if (active.empty()) return out;
  const auto arch = config.architecture(static_cast<int>(x.cols()));
  const double rows = static_cast<double>(x.rows());
  const bool mean_reduction = config.reduction == Reduction::mean;

  nd::Rng root(ctx.seed);
  nd::Rng dropout_rng = root.split(1);
  nd::Rng eps_rng = root.split(2);
  nd::Rng* drop = ctx.training ? &dropout_rng : nullptr;

  const auto q = gen::encode(p, arch, tape.constant(x), drop);

  if (contains(active, Term::elbo_recon) || contains(active, Term::elbo_kl)) {
    const nd::Var z = config.use_plain_ae ? q.mean : gen::reparameterize(q, eps_rng);
    if (contains(active, Term::elbo_recon)) {
      auto recon = gen::reconstruction_nll(gen::decode(p, arch, z, drop), arch, x);
      out[Term::elbo_recon] = mean_reduction ? nd::scale(recon, 1.0 / rows) : recon;
    }
    if (contains(active, Term::elbo_kl)) {
      auto kl = gen::gaussian_kl(q);
      out[Term::elbo_kl] = mean_reduction ? nd::scale(kl, 1.0 / rows) : kl;
    }
  }

  if (contains(active, Term::cah) || contains(active, Term::ssom)) {
    const auto s = psom::soft_assignments(q.mean, p[gen::kCentroids], config.alpha);
    if (contains(active, Term::cah)) {
      const RowVector freq = ctx.frequencies != nullptr ? *ctx.frequencies : psom::cluster_frequencies(s.value());
      if (freq.size() != s.cols()) throw DimensionError("reference frequencies do not match the number of clusters");
      const Matrix targets =
          ctx.fixed_targets != nullptr ? *ctx.fixed_targets : psom::target_distribution(s.value(), freq);
      if (captured != nullptr) captured->targets = targets;
      auto cah = psom::cah_loss(s, targets);
      out[Term::cah] = mean_reduction ? nd::scale(cah, 1.0 / rows) : cah;
    }
    if (contains(active, Term::ssom)) out[Term::ssom] = psom::ssom_loss(s, config.grid);
  }

  if (shape.kind == DataKind::series) {
    if (contains(active, Term::smooth)) {
      out[Term::smooth] = gen::smooth_loss(q.mean, shape.n_series, shape.steps, config.alpha);
    }
    if (contains(active, Term::pred)) {
      const Matrix& targets = ctx.fixed_pred_targets != nullptr ? *ctx.fixed_pred_targets : q.mean.value();
      if (captured != nullptr) captured->pred_targets = targets;
      auto pred = gen::pred_loss(p, q.mean, targets, shape.n_series, shape.steps);
      const double pairs = static_cast<double>(shape.n_series * (shape.steps - 1));
      out[Term::pred] = mean_reduction ? nd::scale(pred, 1.0 / pairs) : pred;
    }
  }
  return out;
}

LossReport make_report(const std::map<Term, nd::Var>& terms, const TrainConfig& config) {
  LossReport r;
  for (const Term t : kAllTerms) r.terms[to_string(t)] = 0.0;
  for (const auto& [t, v] : terms) {
    const double value = v.scalar();
    if (!std::isfinite(value)) throw NumericalFailure(to_string(t), "loss value is not finite");
    r.terms[to_string(t)] = value;
  }
  for (const Term t : kAllTerms) r.total += term_weight(config, t) * r.terms[to_string(t)];
  return r;
}

nd::Var weighted_total(const std::map<Term, nd::Var>& terms, const TrainConfig& config) {
  nd::Var total;
  for (const auto& [t, v] : terms) {
    const auto w = nd::scale(v, term_weight(config, t));
    total = total.valid() ? nd::add(total, w) : w;
  }
  return total;
}

void validate_input(const nd::ParamVector& params, const TrainConfig& config, const Matrix& x, DataKind kind) {
  if (x.rows() == 0) throw InputError("objective: empty batch");
  require_layout(params, config, static_cast<int>(x.cols()), kind);
}

nd::BoundParams::Filter phase_filter(Phase phase) {
  return [phase](const std::string& block) { return trainable_in(phase, block); };
}

nd::ParamVector gradient_of(const nd::ParamVector& params, const Matrix& x, const Shape& shape,
                            const TrainConfig& config, const ObjectiveContext& ctx, const std::vector<Term>& active,
                            LossReport* report) {
  nd::Tape tape;
  nd::BoundParams p(tape, params, phase_filter(ctx.phase));
  const auto terms = build_terms(tape, p, x, shape, config, ctx, active);
  if (report != nullptr) *report = make_report(terms, config);
  nd::ParamVector grad = params.zeros_like();
  const auto total = weighted_total(terms, config);
  if (total.valid() && total.requires_grad()) {
    tape.backward(total);
    p.collect_gradient(grad);
  }
  return grad;
}

Evaluation run_value_and_grad(const nd::ParamVector& params, const Matrix& x, const Shape& shape,
                              const TrainConfig& config, const ObjectiveContext& ctx) {
  validate_input(params, config, x, shape.kind);
  const auto active = active_terms(config, shape.kind, ctx);
  Evaluation out;
  out.gradient = gradient_of(params, x, shape, config, ctx, active, &out.report);
  if (!out.gradient.all_finite()) {
    // Find the term responsible.
    for (const Term t : active) {
      if (!gradient_of(params, x, shape, config, ctx, {t}, nullptr).all_finite()) {
        throw NumericalFailure(to_string(t), "gradient is not finite");
      }
    }
    throw NumericalFailure("total", "gradient is not finite");
  }
  return out;
}

LossReport run_evaluate(const nd::ParamVector& params, const Matrix& x, const Shape& shape,
                        const TrainConfig& config, const ObjectiveContext& ctx) {
  validate_input(params, config, x, shape.kind);
  nd::Tape tape;
  nd::BoundParams p(tape, params, [](const std::string&) { return false; });
  return make_report(build_terms(tape, p, x, shape, config, ctx, active_terms(config, shape.kind, ctx)), config);
}

nd::ParamVector run_term_gradient(const nd::ParamVector& params, const Matrix& x, const Shape& shape,
                                  const TrainConfig& config, Term term, const ObjectiveContext& ctx) {
  validate_input(params, config, x, shape.kind);
  const auto active = active_terms(config, shape.kind, ctx);
  if (!contains(active, term)) return params.zeros_like();
  return gradient_of(params, x, shape, config, ctx, {term}, nullptr);
}

nd::GradientCheckReport run_check(const nd::ParamVector& params, const Matrix& x, const Shape& shape,
                                  const TrainConfig& config, double h, double tol, const ObjectiveContext& ctx) {
  validate_input(params, config, x, shape.kind);
  // Targets are held at their base-point values.
  Constants frozen;
  {
    nd::Tape tape;
    nd::BoundParams p(tape, params, [](const std::string&) { return false; });
    build_terms(tape, p, x, shape, config, ctx, active_terms(config, shape.kind, ctx), &frozen);
  }
  ObjectiveContext fixed = ctx;
  if (frozen.targets.size() > 0 && fixed.fixed_targets == nullptr) fixed.fixed_targets = &frozen.targets;
  if (frozen.pred_targets.size() > 0 && fixed.fixed_pred_targets == nullptr) {
    fixed.fixed_pred_targets = &frozen.pred_targets;
  }
  const auto analytic = run_value_and_grad(params, x, shape, config, fixed).gradient;
  const auto f = [&](const nd::ParamVector& probe) { return run_evaluate(probe, x, shape, config, fixed).total; };
  auto report = nd::check_gradient(f, params, analytic, h, tol);
  // Blocks frozen in this phase have no analytic gradient to compare.
  std::erase_if(report.blocks, [&](const nd::BlockGradientCheck& b) { return !trainable_in(ctx.phase, b.name); });
  return report;
}

Shape series_shape(const data::SeriesBatch& b) { return {DataKind::series, b.n_series, b.steps}; }

}  // namespace

std::string to_string(Term t) {
  switch (t) {
    case Term::cah: return "cah";
    case Term::ssom: return "ssom";
    case Term::elbo_recon: return "elbo_recon";
    case Term::elbo_kl: return "elbo_kl";
    case Term::smooth: return "smooth";
    case Term::pred: return "pred";
  }
  return "?";
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::pretrain: return "pretrain";
    case Phase::joint: return "joint";
    case Phase::finetune: return "finetune";
  }
  return "?";
}

double term_weight(const TrainConfig& config, Term t) {
  switch (t) {
    case Term::cah: return config.gamma;
    case Term::ssom: return config.effective_beta();
    case Term::elbo_recon: return 1.0;
    case Term::elbo_kl: return config.use_plain_ae ? 0.0 : 1.0;
    case Term::smooth: return config.effective_smooth_weight();
    case Term::pred: return config.effective_pred_weight();
  }
  return 0.0;
}

std::vector<Term> active_terms(const TrainConfig& config, DataKind kind, const ObjectiveContext& ctx) {
  std::vector<Term> phase_terms;
  switch (ctx.phase) {
    case Phase::pretrain: phase_terms = {Term::elbo_recon, Term::elbo_kl}; break;
    case Phase::joint:
      phase_terms = {Term::cah, Term::ssom, Term::elbo_recon, Term::elbo_kl};
      if (kind == DataKind::series) {
        phase_terms.push_back(Term::smooth);
        phase_terms.push_back(Term::pred);
      }
      break;
    case Phase::finetune:
      if (kind == DataKind::series) phase_terms = {Term::pred};
      break;
  }
  std::vector<Term> out;
  for (const Term t : phase_terms) {
    if (term_weight(config, t) == 0.0) continue;
    if (ctx.only && !contains(*ctx.only, t)) continue;
    out.push_back(t);
  }
  return out;
}

bool trainable_in(Phase phase, const std::string& block) {
  auto starts = [&](const char* prefix) { return block.rfind(prefix, 0) == 0; };
  switch (phase) {
    case Phase::pretrain: return starts("encoder.") || starts("decoder.");
    case Phase::joint: return true;
    case Phase::finetune: return starts("forecaster.");
  }
  return false;
}

nd::ParamVector new_params(const TrainConfig& config, int input_dim, DataKind kind) {
  const auto arch = config.architecture(input_dim);
  nd::ParamVector params;
  gen::add_vae_blocks(params, arch);
  gen::add_centroid_block(params, config.grid.size(), config.latent_dim);
  if (kind == DataKind::series) gen::add_forecaster_blocks(params, config.latent_dim);
  nd::Rng rng(config.seed);
  nd::Rng init_rng = rng.split(100);
  gen::init_weights(params, init_rng);
  nd::Rng centroid_rng = rng.split(101);
  params.block(gen::kCentroids) = centroid_rng.normal_matrix(config.grid.size(), config.latent_dim);
  return params;
}

void require_layout(const nd::ParamVector& params, const TrainConfig& config, int input_dim, DataKind kind) {
  const auto arch = config.architecture(input_dim);
  nd::ParamVector expected;
  gen::add_vae_blocks(expected, arch);
  gen::add_centroid_block(expected, config.grid.size(), config.latent_dim);
  if (kind == DataKind::series) gen::add_forecaster_blocks(expected, config.latent_dim);
  if (!params.same_layout(expected)) {
    throw ConfigError("parameter layout does not match the configured architecture (grid " +
                      config.grid.to_string() + ", latent_dim " + std::to_string(config.latent_dim) +
                      ", input_dim " + std::to_string(input_dim) + ")");
  }
}

Evaluation value_and_grad(const nd::ParamVector& params, const data::Batch& batch, const TrainConfig& config,
                          const ObjectiveContext& ctx) {
  return run_value_and_grad(params, batch.x, Shape{}, config, ctx);
}

Evaluation value_and_grad(const nd::ParamVector& params, const data::SeriesBatch& batch, const TrainConfig& config,
                          const ObjectiveContext& ctx) {
  return run_value_and_grad(params, batch.x, series_shape(batch), config, ctx);
}

LossReport evaluate_loss(const nd::ParamVector& params, const data::Batch& batch, const TrainConfig& config,
                         const ObjectiveContext& ctx) {
  return run_evaluate(params, batch.x, Shape{}, config, ctx);
}

LossReport evaluate_loss(const nd::ParamVector& params, const data::SeriesBatch& batch, const TrainConfig& config,
                         const ObjectiveContext& ctx) {
  return run_evaluate(params, batch.x, series_shape(batch), config, ctx);
}

nd::ParamVector term_gradient(const nd::ParamVector& params, const data::Batch& batch, const TrainConfig& config,
                              Term term, const ObjectiveContext& ctx) {
  return run_term_gradient(params, batch.x, Shape{}, config, term, ctx);
}

nd::ParamVector term_gradient(const nd::ParamVector& params, const data::SeriesBatch& batch,
                              const TrainConfig& config, Term term, const ObjectiveContext& ctx) {
  return run_term_gradient(params, batch.x, series_shape(batch), config, term, ctx);
}

nd::GradientCheckReport check_gradient(const nd::ParamVector& params, const data::Batch& batch,
                                       const TrainConfig& config, double h, double tol,
                                       const ObjectiveContext& ctx) {
  return run_check(params, batch.x, Shape{}, config, h, tol, ctx);
}

nd::GradientCheckReport check_gradient(const nd::ParamVector& params, const data::SeriesBatch& batch,
                                       const TrainConfig& config, double h, double tol,
                                       const ObjectiveContext& ctx) {
  return run_check(params, batch.x, series_shape(batch), config, h, tol, ctx);
}

}  // namespace dpsom::train
