#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dpsom/data/batch.hpp"
#include "dpsom/errors.hpp"
#include "dpsom/trainer/checkpoint.hpp"
#include "dpsom/trainer/config.hpp"

namespace dpsom::train {

struct TrainHooks {
  /// Called after every recorded epoch.
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Numerical failure during training. Carries the last checkpoint whose
/// parameters were all finite.
class TrainingAborted : public NumericalFailure {
 public:
  TrainingAborted(const NumericalFailure& cause, Checkpoint last_finite)
      : NumericalFailure(cause.term(), std::string("training aborted: ") + cause.what()),
        last_finite_(std::move(last_finite)) {}
  const Checkpoint& last_finite() const noexcept { return last_finite_; }

 private:
  Checkpoint last_finite_;
};

/// Fresh parameters trained on the ELBO alone for the configured pretraining
/// budget.
nd::ParamVector pretrain_vae(const TrainConfig& config, const data::Batch& train);
nd::ParamVector pretrain_vae(const TrainConfig& config, const data::SeriesBatch& train);

/// Encodes `x` to posterior means and fits a classic SOM on them for
/// `som_epochs` passes (at least one). Returns K x latent_dim centroids.
Matrix init_centroids(const nd::ParamVector& params, const TrainConfig& config, const Matrix& x, int som_epochs);

/// Pretraining, SOM initialisation, then joint optimisation of all terms.
Checkpoint train_dpsom(const TrainConfig& config, const data::Batch& train, const TrainHooks& hooks = {});
/// As train_dpsom on every time step, with smoothness and prediction terms,
/// followed by prediction fine-tuning of the forecaster alone. `train` is
/// expected to be z-scored already; its statistics are stored by the caller.
Checkpoint train_tdpsom(const TrainConfig& config, const data::SeriesBatch& train, const TrainHooks& hooks = {});

/// Continues training of an existing checkpoint for `epochs` joint epochs.
void continue_joint(Checkpoint& ckpt, const data::Batch& train, int epochs, const TrainHooks& hooks = {});

// Inference with a trained model.
Matrix latent_means(const Checkpoint& ckpt, const Matrix& x);
/// N x K soft assignments of the posterior means.
Matrix soft_assign(const Checkpoint& ckpt, const Matrix& x);
/// Nearest centroid of every posterior mean.
std::vector<int> assign_clusters(const Checkpoint& ckpt, const Matrix& x);

/// Feeds each series prefix through the forecaster, then predicts `horizon`
/// further latents by feeding predicted means back, decoding each to the
/// decoder mean. Returns (N * horizon) x d, series-major. Throws ConfigError
/// for horizon < 1 and InputError for an empty prefix.
Matrix forecast_rollout(const Checkpoint& ckpt, const data::SeriesBatch& prefix, int horizon);

/// The last step of every prefix repeated `horizon` times.
Matrix copy_last_forecast(const data::SeriesBatch& prefix, int horizon);

struct HparamEpochCheck {
  int epoch = 0;
  double recon_to_cah = 0.0;  // recon / (gamma * cah)
  double cah_to_ssom = 0.0;   // cah / (beta * ssom)
  bool gamma_ok = true;
  bool beta_ok = true;
};

struct HparamReport {
  std::vector<HparamEpochCheck> epochs;
  /// Verdicts for the last epoch.
  bool gamma_ok = true;
  bool beta_ok = true;
};

/// Ratio heuristics over the joint-training epochs: recon should exceed
/// gamma * cah by 10x, and cah / (beta * ssom) should lie in [0.2, 5].
HparamReport diagnose_hparams(const std::vector<EpochRecord>& history, double gamma, double beta);
HparamReport diagnose_hparams(const Checkpoint& ckpt);

}  // namespace dpsom::train
