#include "dpsom/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpsom/genmodel/inference.hpp"
#include "dpsom/genmodel/networks.hpp"
#include "dpsom/metrics/clustering.hpp"
#include "dpsom/ndcore/bound_params.hpp"
#include "dpsom/psom/assignments.hpp"
#include "dpsom/somgrid/classic_som.hpp"
#include "dpsom/trainer/adam.hpp"
#include "dpsom/trainer/objective.hpp"

namespace dpsom::train {
namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return nd::mix64(nd::mix64(nd::mix64(seed + a) + b) + c);
}

struct StaticData {
  const data::Batch& b;
  static constexpr DataKind kind = DataKind::images;
  Eigen::Index units() const { return b.size(); }
  data::Batch select(const data::Indices& idx) const { return b.select(idx); }
  const Matrix& rows() const { return b.x; }
  const std::vector<int>& labels() const { return b.labels; }
};

struct SeriesData {
  const data::SeriesBatch& b;
  static constexpr DataKind kind = DataKind::series;
  Eigen::Index units() const { return b.n_series; }
  data::SeriesBatch select(const data::Indices& idx) const { return b.select(idx); }
  const Matrix& rows() const { return b.x; }
  const std::vector<int>& labels() const { return b.step_labels; }
};

gen::VaeArchitecture arch_of(const Checkpoint& ck) { return ck.config.architecture(ck.input_dim); }

Matrix soft_of(const nd::ParamVector& params, const Checkpoint& ck, const Matrix& x) {
  const Matrix means = gen::encode_mean(params, arch_of(ck), x);
  return psom::soft_assignments(means, params.block(gen::kCentroids), ck.config.alpha);
}

void add_cluster_metrics(std::map<std::string, double>& values, const Matrix& soft, const std::vector<int>& labels) {
  if (labels.empty()) return;
  const auto assignment = metrics::row_argmax(soft);
  values["purity"] = metrics::purity(assignment, labels);
  values["nmi"] = metrics::nmi(assignment, labels);
}

void record(Checkpoint& ck, EpochRecord rec, const TrainHooks& hooks) {
  ck.history.push_back(std::move(rec));
  if (hooks.on_epoch) hooks.on_epoch(ck.history.back());
}

template <class Data>
void run_phase(Checkpoint& ck, const Data& data, Phase phase, int epochs, const TrainHooks& hooks) {
  if (epochs <= 0) return;
  const TrainConfig& cfg = ck.config;
  Adam adam(ck.params, cfg.learning_rate);
  const bool needs_frequencies = phase == Phase::joint && cfg.gamma > 0.0 && !cfg.minibatch_frequencies;
  RowVector frequencies;
  if (needs_frequencies) frequencies = psom::cluster_frequencies(soft_of(ck.params, ck, data.rows()));

  for (int e = 0; e < epochs; ++e) {
    const Checkpoint last_finite = ck;
    const auto phase_key = static_cast<std::uint64_t>(phase);
    const auto order = data::batch_indices(data.units(), cfg.batch_size,
                                           derive_seed(cfg.seed, phase_key, static_cast<std::uint64_t>(ck.epoch), 0));
    std::map<std::string, double> sums;
    double total = 0.0;
    for (std::size_t bi = 0; bi < order.size(); ++bi) {
      ObjectiveContext ctx;
      ctx.phase = phase;
      ctx.training = phase != Phase::finetune;
      ctx.seed = derive_seed(cfg.seed, phase_key + 16, static_cast<std::uint64_t>(ck.epoch), bi + 1);
      ctx.frequencies = needs_frequencies ? &frequencies : nullptr;
      try {
        const auto ev = value_and_grad(ck.params, data.select(order[bi]), cfg, ctx);
        adam.step(ck.params, ev.gradient);
        if (!ck.params.all_finite()) throw NumericalFailure("parameters", "update produced non-finite values");
        for (const auto& [k, v] : ev.report.terms) sums[k] += v;
        total += ev.report.total;
      } catch (const NumericalFailure& failure) {
        throw TrainingAborted(failure, last_finite);
      }
    }
    EpochRecord rec{to_string(phase), ck.epoch + 1, {}};
    const double batches = static_cast<double>(order.size());
    for (const auto& [k, v] : sums) rec.values[k] = v / batches;
    rec.values["total"] = total / batches;
    if (phase == Phase::joint) {
      const Matrix soft = soft_of(ck.params, ck, data.rows());
      add_cluster_metrics(rec.values, soft, data.labels());
      if (needs_frequencies) frequencies = psom::cluster_frequencies(soft);
    }
    ++ck.epoch;
    record(ck, std::move(rec), hooks);
  }
}

template <class Data>
void run_som_init(Checkpoint& ck, const Data& data, int som_epochs, const TrainHooks& hooks) {
  ck.params.block(gen::kCentroids) = init_centroids(ck.params, ck.config, data.rows(), som_epochs);
  const Matrix means = gen::encode_mean(ck.params, arch_of(ck), data.rows());
  EpochRecord rec{"som", ck.epoch + std::max(1, som_epochs), {}};
  rec.values["quantization_error"] = som::quantization_error(ck.params.block(gen::kCentroids), means);
  add_cluster_metrics(rec.values, psom::soft_assignments(means, ck.params.block(gen::kCentroids), ck.config.alpha),
                      data.labels());
  ck.epoch = rec.epoch;
  record(ck, std::move(rec), hooks);
}

template <class Data>
Checkpoint start(const TrainConfig& config, const Data& data) {
  config.validate();
  if (data.units() == 0) throw InputError("training set is empty");
  Checkpoint ck;
  ck.config = config;
  ck.kind = Data::kind;
  ck.input_dim = static_cast<int>(data.rows().cols());
  ck.params = new_params(config, ck.input_dim, Data::kind);
  return ck;
}

}  // namespace

nd::ParamVector pretrain_vae(const TrainConfig& config, const data::Batch& train) {
  StaticData d{train};
  auto ck = start(config, d);
  run_phase(ck, d, Phase::pretrain, config.phases(DataKind::images).pretrain, {});
  return ck.params;
}

nd::ParamVector pretrain_vae(const TrainConfig& config, const data::SeriesBatch& train) {
  SeriesData d{train};
  auto ck = start(config, d);
  run_phase(ck, d, Phase::pretrain, config.phases(DataKind::series).pretrain, {});
  return ck.params;
}

Matrix init_centroids(const nd::ParamVector& params, const TrainConfig& config, const Matrix& x, int som_epochs) {
  const Matrix means = gen::encode_mean(params, config.architecture(static_cast<int>(x.cols())), x);
  som::SomSchedule schedule;
  schedule.total_steps = static_cast<long>(std::max(1, som_epochs)) * static_cast<long>(means.rows());
  schedule.final_radius = 0.1;
  return som::som_fit(means, config.grid, schedule, derive_seed(config.seed, 7, 0, 0)).centroids;
}

Checkpoint train_dpsom(const TrainConfig& config, const data::Batch& train, const TrainHooks& hooks) {
  StaticData d{train};
  auto ck = start(config, d);
  const auto phases = config.phases(DataKind::images);
  run_phase(ck, d, Phase::pretrain, phases.pretrain, hooks);
  run_som_init(ck, d, phases.som, hooks);
  run_phase(ck, d, Phase::joint, phases.joint, hooks);
  return ck;
}

Checkpoint train_tdpsom(const TrainConfig& config, const data::SeriesBatch& train, const TrainHooks& hooks) {
  if (train.steps < 2) throw InputError("series need at least 2 steps");
  SeriesData d{train};
  auto ck = start(config, d);
  const auto phases = config.phases(DataKind::series);
  run_phase(ck, d, Phase::pretrain, phases.pretrain, hooks);
  run_som_init(ck, d, phases.som, hooks);
  run_phase(ck, d, Phase::joint, phases.joint, hooks);
  run_phase(ck, d, Phase::finetune, phases.finetune, hooks);
  return ck;
}

void continue_joint(Checkpoint& ckpt, const data::Batch& train, int epochs, const TrainHooks& hooks) {
  require_layout(ckpt.params, ckpt.config, ckpt.input_dim, DataKind::images);
  run_phase(ckpt, StaticData{train}, Phase::joint, epochs, hooks);
}

Matrix latent_means(const Checkpoint& ckpt, const Matrix& x) { return gen::encode_mean(ckpt.params, arch_of(ckpt), x); }

Matrix soft_assign(const Checkpoint& ckpt, const Matrix& x) { return soft_of(ckpt.params, ckpt, x); }

std::vector<int> assign_clusters(const Checkpoint& ckpt, const Matrix& x) {
  return metrics::row_argmax(soft_assign(ckpt, x));
}

Matrix forecast_rollout(const Checkpoint& ckpt, const data::SeriesBatch& prefix, int horizon) {
  if (horizon < 1) throw ConfigError("forecast horizon must be >= 1");
  if (prefix.n_series < 1 || prefix.steps < 1) throw InputError("forecast needs a non-empty prefix");
  if (ckpt.kind != DataKind::series) throw ConfigError("forecasting needs a series checkpoint");
  if (prefix.dim() != ckpt.input_dim) {
    throw DimensionError("prefix has " + std::to_string(prefix.dim()) + " channels, model expects " +
                         std::to_string(ckpt.input_dim));
  }
  const auto arch = arch_of(ckpt);
  const Matrix means = gen::encode_mean(ckpt.params, arch, prefix.x);
  const Eigen::Index n = prefix.n_series;
  const Eigen::Index l = arch.latent_dim;

  nd::Tape tape;
  nd::BoundParams p(tape, ckpt.params, [](const std::string&) { return false; });
  auto state = gen::zero_lstm_state(tape, n, l);
  gen::ForecastStep step;
  for (Eigen::Index t = 0; t < prefix.steps; ++t) {
    Matrix input(n, l);
    for (Eigen::Index i = 0; i < n; ++i) input.row(i) = means.row(i * prefix.steps + t);
    step = gen::forecaster_step(p, tape.constant(std::move(input)), state);
  }
  Matrix latents(n * horizon, l);
  for (int h = 0; h < horizon; ++h) {
    const Matrix predicted = step.mean.value();
    for (Eigen::Index i = 0; i < n; ++i) latents.row(i * horizon + h) = predicted.row(i);
    if (h + 1 < horizon) step = gen::forecaster_step(p, tape.constant(predicted), state);
  }
  return gen::decode(ckpt.params, arch, latents).mean;
}

Matrix copy_last_forecast(const data::SeriesBatch& prefix, int horizon) {
  if (horizon < 1) throw ConfigError("forecast horizon must be >= 1");
  if (prefix.n_series < 1 || prefix.steps < 1) throw InputError("forecast needs a non-empty prefix");
  Matrix out(prefix.n_series * horizon, prefix.dim());
  for (Eigen::Index i = 0; i < prefix.n_series; ++i) {
    for (int h = 0; h < horizon; ++h) out.row(i * horizon + h) = prefix.x.row(i * prefix.steps + prefix.steps - 1);
  }
  return out;
}

HparamReport diagnose_hparams(const std::vector<EpochRecord>& history, double gamma, double beta) {
  HparamReport report;
  const bool has_joint = std::any_of(history.begin(), history.end(), [](const auto& r) { return r.phase == "joint"; });
  const double inf = std::numeric_limits<double>::infinity();
  for (const auto& rec : history) {
    if (has_joint && rec.phase != "joint") continue;
    auto value = [&](const char* key) {
      const auto it = rec.values.find(key);
      return it == rec.values.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    };
    const double recon = value("elbo_recon");
    const double cah = value("cah");
    const double ssom = value("ssom");
    if (std::isnan(recon) || std::isnan(cah) || std::isnan(ssom)) continue;
    HparamEpochCheck c;
    c.epoch = rec.epoch;
    c.recon_to_cah = gamma * cah > 0.0 ? recon / (gamma * cah) : inf;
    c.cah_to_ssom = beta * ssom > 0.0 ? cah / (beta * ssom) : inf;
    c.gamma_ok = c.recon_to_cah >= 10.0;
    c.beta_ok = c.cah_to_ssom >= 0.2 && c.cah_to_ssom <= 5.0;
    report.epochs.push_back(c);
  }
  if (!report.epochs.empty()) {
    report.gamma_ok = report.epochs.back().gamma_ok;
    report.beta_ok = report.epochs.back().beta_ok;
  }
  return report;
}

HparamReport diagnose_hparams(const Checkpoint& ckpt) {
  return diagnose_hparams(ckpt.history, ckpt.config.gamma, ckpt.config.effective_beta());
}

}  // namespace dpsom::train
