#include "dpsom/trainer/config.hpp"

#include <cmath>

#include "dpsom/errors.hpp"

namespace dpsom::train {
namespace {

using nlohmann::json;

template <class T>
T read(const json& doc, const std::string& key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

Reduction parse_reduction(const std::string& text) {
  if (text == "mean") return Reduction::mean;
  if (text == "sum") return Reduction::sum;
  throw ConfigError("config field 'reduction' must be \"mean\" or \"sum\", got \"" + text + "\"");
}

void require(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) throw ConfigError("config field '" + field + "' " + rule);
}

}  // namespace

std::string to_string(Reduction r) { return r == Reduction::mean ? "mean" : "sum"; }

TrainConfig TrainConfig::defaults(DataKind kind) {
  TrainConfig c;
  if (kind == DataKind::series) {
    c.gamma = 50.0;
    c.beta = 10.0;
    c.grid = som::GridSpec(16, 16);
    c.epochs = 100;
    c.latent_dim = 50;
    c.dropout = 0.5;
    c.likelihood = gen::Likelihood::gaussian;
  }
  return c;
}

void TrainConfig::validate() const {
  require(gamma >= 0.0 && std::isfinite(gamma), "gamma", "must be a finite value >= 0");
  require(beta >= 0.0 && std::isfinite(beta), "beta", "must be a finite value >= 0");
  require(alpha > 0.0 && std::isfinite(alpha), "alpha", "must be > 0");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(epochs >= 0, "epochs", "must be >= 0");
  require(latent_dim >= 1, "latent_dim", "must be >= 1");
  require(learning_rate > 0.0, "learning_rate", "must be > 0");
  require(dropout >= 0.0 && dropout < 1.0, "dropout", "must lie in [0, 1)");
  for (const int h : hidden) require(h >= 1, "hidden", "entries must be >= 1");
  require(smooth_weight >= 0.0, "smooth_weight", "must be >= 0");
  require(pred_weight >= 0.0, "pred_weight", "must be >= 0");
  for (const auto& [name, v] : {std::pair{"pretrain_fraction", pretrain_fraction}, {"som_fraction", som_fraction},
                                {"joint_fraction", joint_fraction}, {"finetune_fraction", finetune_fraction}}) {
    require(v >= 0.0 && v <= 1.0, name, "must lie in [0, 1]");
  }
  require(synth_series >= 1, "synth_series", "must be >= 1");
  require(synth_steps >= 8, "synth_steps", "must be >= 8");
  require(synth_dim >= 2, "synth_dim", "must be >= 2");
  require(horizon >= 1, "horizon", "must be >= 1");
}

PhaseEpochs TrainConfig::phases(DataKind kind) const {
  auto derive = [this](int explicit_count, double fraction) {
    return explicit_count >= 0 ? explicit_count : static_cast<int>(std::lround(epochs * fraction));
  };
  PhaseEpochs p;
  p.pretrain = derive(pretrain_epochs, pretrain_fraction);
  p.som = derive(som_epochs, som_fraction);
  if (kind == DataKind::series) {
    p.joint = derive(joint_epochs, joint_fraction);
    p.finetune = derive(finetune_epochs, finetune_fraction);
  } else {
    // Static data has no forecaster, so its fine-tuning share goes to joint training.
    p.joint = derive(joint_epochs, joint_fraction + finetune_fraction);
  }
  return p;
}

gen::VaeArchitecture TrainConfig::architecture(int input_dim) const {
  gen::VaeArchitecture a;
  a.input_dim = input_dim;
  a.hidden = hidden;
  a.latent_dim = latent_dim;
  a.dropout = dropout;
  a.likelihood = likelihood;
  a.activation = activation;
  a.validate();
  return a;
}

const std::vector<std::string>& required_config_fields() {
  static const std::vector<std::string> fields{"gamma", "beta", "grid", "epochs", "latent_dim"};
  return fields;
}

json to_json(const TrainConfig& c) {
  return json{{"gamma", c.gamma},
              {"beta", c.beta},
              {"alpha", c.alpha},
              {"grid", c.grid.to_string()},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"latent_dim", c.latent_dim},
              {"hidden", c.hidden},
              {"learning_rate", c.learning_rate},
              {"dropout", c.dropout},
              {"likelihood", gen::to_string(c.likelihood)},
              {"activation", gen::to_string(c.activation)},
              {"disable_ssom", c.disable_ssom},
              {"use_plain_ae", c.use_plain_ae},
              {"disable_smooth", c.disable_smooth},
              {"disable_pred", c.disable_pred},
              {"seed", c.seed},
              {"pretrain_fraction", c.pretrain_fraction},
              {"som_fraction", c.som_fraction},
              {"joint_fraction", c.joint_fraction},
              {"finetune_fraction", c.finetune_fraction},
              {"pretrain_epochs", c.pretrain_epochs},
              {"som_epochs", c.som_epochs},
              {"joint_epochs", c.joint_epochs},
              {"finetune_epochs", c.finetune_epochs},
              {"smooth_weight", c.smooth_weight},
              {"pred_weight", c.pred_weight},
              {"reduction", to_string(c.reduction)},
              {"minibatch_frequencies", c.minibatch_frequencies},
              {"synth_series", c.synth_series},
              {"synth_steps", c.synth_steps},
              {"synth_dim", c.synth_dim},
              {"horizon", c.horizon}};
}

TrainConfig from_json(const json& doc, const TrainConfig& base, bool require_fields) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (require_fields) {
    for (const auto& field : required_config_fields()) {
      if (!doc.contains(field)) throw ConfigError("config is missing required field '" + field + "'");
    }
  }
  const json known = to_json(base);
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  TrainConfig c = base;
  auto has = [&](const char* key) { return doc.contains(key); };
  if (has("gamma")) c.gamma = read<double>(doc, "gamma");
  if (has("beta")) c.beta = read<double>(doc, "beta");
  if (has("alpha")) c.alpha = read<double>(doc, "alpha");
  if (has("grid")) {
    try {
      c.grid = som::GridSpec::parse(read<std::string>(doc, "grid"));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("config field 'grid': ") + e.what());
    }
  }
  if (has("batch_size")) c.batch_size = read<int>(doc, "batch_size");
  if (has("epochs")) c.epochs = read<int>(doc, "epochs");
  if (has("latent_dim")) c.latent_dim = read<int>(doc, "latent_dim");
  if (has("hidden")) c.hidden = read<std::vector<int>>(doc, "hidden");
  if (has("learning_rate")) c.learning_rate = read<double>(doc, "learning_rate");
  if (has("dropout")) c.dropout = read<double>(doc, "dropout");
  try {
    if (has("likelihood")) c.likelihood = gen::parse_likelihood(read<std::string>(doc, "likelihood"));
    if (has("activation")) c.activation = gen::parse_activation(read<std::string>(doc, "activation"));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config field: ") + e.what());
  }
  if (has("disable_ssom")) c.disable_ssom = read<bool>(doc, "disable_ssom");
  if (has("use_plain_ae")) c.use_plain_ae = read<bool>(doc, "use_plain_ae");
  if (has("disable_smooth")) c.disable_smooth = read<bool>(doc, "disable_smooth");
  if (has("disable_pred")) c.disable_pred = read<bool>(doc, "disable_pred");
  if (has("seed")) c.seed = read<std::uint64_t>(doc, "seed");
  if (has("pretrain_fraction")) c.pretrain_fraction = read<double>(doc, "pretrain_fraction");
  if (has("som_fraction")) c.som_fraction = read<double>(doc, "som_fraction");
  if (has("joint_fraction")) c.joint_fraction = read<double>(doc, "joint_fraction");
  if (has("finetune_fraction")) c.finetune_fraction = read<double>(doc, "finetune_fraction");
  if (has("pretrain_epochs")) c.pretrain_epochs = read<int>(doc, "pretrain_epochs");
  if (has("som_epochs")) c.som_epochs = read<int>(doc, "som_epochs");
  if (has("joint_epochs")) c.joint_epochs = read<int>(doc, "joint_epochs");
  if (has("finetune_epochs")) c.finetune_epochs = read<int>(doc, "finetune_epochs");
  if (has("smooth_weight")) c.smooth_weight = read<double>(doc, "smooth_weight");
  if (has("pred_weight")) c.pred_weight = read<double>(doc, "pred_weight");
  if (has("reduction")) c.reduction = parse_reduction(read<std::string>(doc, "reduction"));
  if (has("minibatch_frequencies")) c.minibatch_frequencies = read<bool>(doc, "minibatch_frequencies");
  if (has("synth_series")) c.synth_series = read<int>(doc, "synth_series");
  if (has("synth_steps")) c.synth_steps = read<int>(doc, "synth_steps");
  if (has("synth_dim")) c.synth_dim = read<int>(doc, "synth_dim");
  if (has("horizon")) c.horizon = read<int>(doc, "horizon");
  c.validate();
  return c;
}

TrainConfig from_json(const json& doc) { return from_json(doc, TrainConfig{}, false); }

void apply_override(TrainConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  config = from_json(json{{key, value}}, config, false);
}

}  // namespace dpsom::train
