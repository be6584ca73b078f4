#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpsom/data/batch.hpp"
#include "dpsom/ndcore/gradient_check.hpp"
#include "dpsom/ndcore/param_vector.hpp"
#include "dpsom/trainer/config.hpp"

namespace dpsom::train {

enum class Term { cah, ssom, elbo_recon, elbo_kl, smooth, pred };
inline constexpr std::array<Term, 6> kAllTerms{Term::cah, Term::ssom, Term::elbo_recon,
                                                Term::elbo_kl, Term::smooth, Term::pred};
std::string to_string(Term t);

enum class Phase { pretrain, joint, finetune };
std::string to_string(Phase p);

struct LossReport {
  double total = 0.0;
  /// Every term name is present; inactive terms are 0.
  std::map<std::string, double> terms;

  double term(Term t) const { return terms.at(to_string(t)); }
};

struct ObjectiveContext {
  Phase phase = Phase::joint;
  /// Seeds the reparameterization noise and dropout masks.
  std::uint64_t seed = 0;
  /// Enables dropout.
  bool training = false;
  /// Reference cluster frequencies for the targets; when unset the column
  /// sums of the batch itself are used.
  const RowVector* frequencies = nullptr;
  /// Restricts evaluation to these terms (still subject to their weights).
  std::optional<std::vector<Term>> only;
  /// Replace the targets T of the CAH term and the next-step targets of the
  /// prediction term, which otherwise come from the current forward pass.
  const Matrix* fixed_targets = nullptr;
  const Matrix* fixed_pred_targets = nullptr;
};

/// Weight of a term in the total under `config`.
double term_weight(const TrainConfig& config, Term t);

/// Terms with non-zero weight that the phase optimizes.
std::vector<Term> active_terms(const TrainConfig& config, DataKind kind, const ObjectiveContext& ctx);

/// Blocks updated in a phase.
bool trainable_in(Phase phase, const std::string& block);

/// Freshly initialised parameters for the architecture implied by `config`.
nd::ParamVector new_params(const TrainConfig& config, int input_dim, DataKind kind);

/// Throws ConfigError when `params` does not have the layout `config` implies.
void require_layout(const nd::ParamVector& params, const TrainConfig& config, int input_dim, DataKind kind);

struct Evaluation {
  LossReport report;
  nd::ParamVector gradient;
};

/// Weighted total of the active terms and its gradient. Inactive terms
/// report 0 and contribute nothing. Throws NumericalFailure naming the term
/// when a value or gradient is not finite.
Evaluation value_and_grad(const nd::ParamVector& params, const data::Batch& batch, const TrainConfig& config,
                          const ObjectiveContext& ctx = {});
Evaluation value_and_grad(const nd::ParamVector& params, const data::SeriesBatch& batch, const TrainConfig& config,
                          const ObjectiveContext& ctx = {});

/// Forward pass only.
LossReport evaluate_loss(const nd::ParamVector& params, const data::Batch& batch, const TrainConfig& config,
                         const ObjectiveContext& ctx = {});
LossReport evaluate_loss(const nd::ParamVector& params, const data::SeriesBatch& batch, const TrainConfig& config,
                         const ObjectiveContext& ctx = {});

/// Gradient of the weighted term alone; all zeros when the term is inactive.
nd::ParamVector term_gradient(const nd::ParamVector& params, const data::Batch& batch, const TrainConfig& config,
                              Term term, const ObjectiveContext& ctx = {});
nd::ParamVector term_gradient(const nd::ParamVector& params, const data::SeriesBatch& batch,
                              const TrainConfig& config, Term term, const ObjectiveContext& ctx = {});

/// Central-difference check of value_and_grad over every parameter block.
nd::GradientCheckReport check_gradient(const nd::ParamVector& params, const data::Batch& batch,
                                       const TrainConfig& config, double h, double tol,
                                       const ObjectiveContext& ctx = {});
nd::GradientCheckReport check_gradient(const nd::ParamVector& params, const data::SeriesBatch& batch,
                                       const TrainConfig& config, double h, double tol,
                                       const ObjectiveContext& ctx = {});

}  // namespace dpsom::train
