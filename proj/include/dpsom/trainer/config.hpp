#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpsom/genmodel/architecture.hpp"
#include "dpsom/somgrid/grid.hpp"

namespace dpsom::train {

enum class DataKind { images, series };

/// How sum-over-rows loss terms are scaled inside the training objective.
/// `mean` divides every term by its number of rows (or step pairs); `sum`
/// keeps CAH, ELBO and prediction terms summed while S-SOM and smoothness
/// stay averaged.
enum class Reduction { mean, sum };

struct PhaseEpochs {
  int pretrain = 0;
  int som = 0;
  int joint = 0;
  int finetune = 0;
};

struct TrainConfig {
  double gamma = 20.0;
  double beta = 0.25;
  double alpha = 10.0;
  som::GridSpec grid{8, 8};
  int batch_size = 300;
  int epochs = 300;
  int latent_dim = 100;
  std::vector<int> hidden{500, 500, 2000};
  double learning_rate = 1e-3;
  double dropout = 0.4;
  gen::Likelihood likelihood = gen::Likelihood::bernoulli;
  gen::Activation activation = gen::Activation::relu;

  bool disable_ssom = false;
  bool use_plain_ae = false;
  bool disable_smooth = false;
  bool disable_pred = false;

  std::uint64_t seed = 0;

  double pretrain_fraction = 0.08;
  double som_fraction = 0.02;
  double joint_fraction = 0.75;
  double finetune_fraction = 0.15;
  /// Negative means "derive from epochs and the fraction".
  int pretrain_epochs = -1;
  int som_epochs = -1;
  int joint_epochs = -1;
  int finetune_epochs = -1;

  double smooth_weight = 1.0;
  double pred_weight = 1.0;
  Reduction reduction = Reduction::mean;
  /// Target frequencies from each minibatch instead of the epoch-wide sums.
  bool minibatch_frequencies = false;

  // Synthetic series and forecasting.
  int synth_series = 1000;
  int synth_steps = 72;
  int synth_dim = 98;
  int horizon = 6;

  /// Table defaults for image or series data.
  static TrainConfig defaults(DataKind kind);

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  double effective_beta() const { return disable_ssom ? 0.0 : beta; }
  double effective_smooth_weight() const { return disable_smooth ? 0.0 : smooth_weight; }
  double effective_pred_weight() const { return disable_pred ? 0.0 : pred_weight; }

  PhaseEpochs phases(DataKind kind) const;
  gen::VaeArchitecture architecture(int input_dim) const;
};

/// Fields that a config document must always state.
const std::vector<std::string>& required_config_fields();

nlohmann::json to_json(const TrainConfig& config);
/// Starts from `base` and applies every key of `doc`. Unknown keys and
/// ill-typed values raise ConfigError naming the field. With
/// `require_fields` the required fields must be present.
TrainConfig from_json(const nlohmann::json& doc, const TrainConfig& base, bool require_fields);
TrainConfig from_json(const nlohmann::json& doc);

/// Applies "key=value"; the value is read as JSON when it parses, otherwise
/// as a string.
void apply_override(TrainConfig& config, const std::string& assignment);

std::string to_string(Reduction r);

}  // namespace dpsom::train
