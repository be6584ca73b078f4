#include "dpsom/cli/app.hpp"

#include <chrono>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dpsom/cli/datasets.hpp"
#include "dpsom/cli/evaluation.hpp"
#include "dpsom/cli/exports.hpp"
#include "dpsom/errors.hpp"
#include "dpsom/format.hpp"
#include "dpsom/log.hpp"
#include "dpsom/trainer/objective.hpp"
#include "dpsom/trainer/trainer.hpp"

#ifndef DPSOM_VERSION
#define DPSOM_VERSION "unknown"
#endif

namespace dpsom::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using train::Checkpoint;
using train::DataKind;
using train::TrainConfig;

constexpr const char* kCheckpointFile = "checkpoint.dpsom";

struct Common {
  std::string dataset;
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out;
  long limit = 0;
};

struct Options {
  Common common;
  std::string checkpoint;
  std::string split;
  std::string grid;
  bool baseline = false;
  int horizon = 6;
  std::string param = "beta";
  std::string values;
  std::string seeds = "0";
  int samples = 10;
  int points = 1;
  double h = 1e-5;
  double tol = 1e-4;
  bool quiet = false;
};

/// Config from an optional file plus overrides. A file must state the
/// required fields; the defaults depend on the dataset kind.
TrainConfig resolve_config(const Common& c, DataKind kind) {
  TrainConfig config = TrainConfig::defaults(kind);
  if (!c.config_file.empty()) {
    std::ifstream in(c.config_file);
    if (!in) throw ConfigError("cannot open config file " + c.config_file);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + c.config_file + " is not valid JSON: " + e.what());
    }
    config = train::from_json(doc, config, true);
  }
  for (const auto& o : c.overrides) train::apply_override(config, o);
  config.validate();
  return config;
}

DataKind kind_of(const std::string& dataset) {
  return dataset == "mnist" || dataset == "fmnist" ? DataKind::images : DataKind::series;
}

json manifest(const std::string& command, const std::vector<std::string>& args, const TrainConfig& config,
              const Dataset& d, const json& outputs) {
  return json{{"command", command},
              {"arguments", std::vector<std::string>(args.begin() + 1, args.end())},
              {"config", train::to_json(config)},
              {"dataset", {{"id", d.id}, {"kind", train::to_string(d.kind)}, {"checksum", d.checksum}}},
              {"seed", config.seed},
              {"outputs", outputs},
              {"version", DPSOM_VERSION}};
}

json to_json_values(const std::map<std::string, double>& values) {
  json doc = json::object();
  for (const auto& [k, v] : values) doc[k] = std::isfinite(v) ? json(v) : json();
  return doc;
}

std::vector<double> as_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

/// Labels written to grid.csv: severity when present, otherwise the step or
/// class labels.
std::vector<double> export_labels(const data::SeriesBatch& s) {
  return s.severity.empty() ? as_doubles(s.step_labels) : s.severity;
}

json export_grid(const fs::path& out, const Checkpoint& ck, const Dataset& d, const std::string& part) {
  json outputs{{"grid", (out / "grid.csv").string()}};
  if (ck.kind == DataKind::images) {
    const auto e = evaluate_static(ck, d.images);
    write_grid_csv(out / "grid.csv", ck.config.grid, e.assignment, as_doubles(d.images.labels));
    if (write_centroid_tiles(out / "tiles", ck) > 0) outputs["tiles"] = (out / "tiles").string();
  } else {
    const auto s = normalized(series_part(d, part), ck.channel_mean, ck.channel_std);
    const auto e = evaluate_series(ck, s);
    write_grid_csv(out / "grid.csv", ck.config.grid, e.assignment, export_labels(s));
    write_trajectories_csv(out / "trajectories.csv", ck.config.grid, s, e.soft);
    outputs["trajectories"] = (out / "trajectories.csv").string();
  }
  return outputs;
}

Checkpoint train_on(const TrainConfig& config, const Dataset& d, const train::TrainHooks& hooks) {
  if (d.kind == DataKind::images) return train::train_dpsom(config, d.images, hooks);
  const auto stats = data::ChannelStats::fit(d.parts.train.x);
  Checkpoint ck = train::train_tdpsom(config, normalized(d.parts.train, stats.mean, stats.stddev), hooks);
  ck.channel_mean = stats.mean;
  ck.channel_std = stats.stddev;
  return ck;
}

std::map<std::string, double> evaluate_on(const Checkpoint& ck, const Dataset& d, const std::string& part) {
  if (d.kind == DataKind::images) return evaluate_static(ck, d.images).values;
  return evaluate_series(ck, normalized(series_part(d, part), ck.channel_mean, ck.channel_std)).values;
}

Checkpoint load_matching(const std::string& path, const Dataset& d) {
  Checkpoint ck = train::load_checkpoint(path);
  if (ck.kind != d.kind) {
    throw ConfigError("checkpoint holds a " + train::to_string(ck.kind) + " model but dataset '" + d.id + "' is " +
                      train::to_string(d.kind));
  }
  const long dim = d.kind == DataKind::images ? d.images.dim() : d.series.dim();
  if (dim != ck.input_dim) {
    throw DimensionError("dataset has " + std::to_string(dim) + " input dimensions, checkpoint expects " +
                         std::to_string(ck.input_dim));
  }
  return ck;
}

std::string default_split(DataKind kind, const std::string& split) {
  if (!split.empty()) return split;
  return kind == DataKind::series ? "test" : "all";
}

train::TrainHooks progress(std::ostream& out, bool quiet) {
  train::TrainHooks hooks;
  if (quiet) return hooks;
  hooks.on_epoch = [&out](const train::EpochRecord& r) {
    out << r.phase << " epoch " << r.epoch;
    for (const auto& [k, v] : r.values) out << ' ' << k << '=' << format_number(v);
    out << '\n' << std::flush;
  };
  return hooks;
}

int cmd_train(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const DataKind kind = kind_of(o.common.dataset);
  const TrainConfig config = resolve_config(o.common, kind);
  const Dataset d = load_dataset(o.common.dataset, config, o.common.limit);
  const fs::path dir = o.common.out;
  fs::create_directories(dir);
  const Checkpoint ck = train_on(config, d, progress(out, o.quiet));
  train::save_checkpoint(ck, dir / kCheckpointFile);
  json metrics = history_json(ck.history);
  const auto hp = train::diagnose_hparams(ck);
  metrics["gamma_heuristic_ok"] = hp.gamma_ok;
  metrics["beta_heuristic_ok"] = hp.beta_ok;
  write_json(dir / "metrics.json", metrics);
  json outputs = export_grid(dir, ck, d, "train");
  outputs["checkpoint"] = (dir / kCheckpointFile).string();
  outputs["metrics"] = (dir / "metrics.json").string();
  write_json(dir / "manifest.json", manifest("train", args, config, d, outputs));
  out << "wrote " << (dir / kCheckpointFile).string() << '\n';
  return kExitOk;
}

int cmd_eval(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const Checkpoint probe = train::load_checkpoint(o.checkpoint);
  if (!o.grid.empty()) {
    const auto g = som::GridSpec::parse(o.grid);
    if (g.rows() != probe.config.grid.rows() || g.cols() != probe.config.grid.cols()) {
      throw ConfigError("grid " + o.grid + " does not match the checkpoint grid " +
                        std::to_string(probe.config.grid.rows()) + "x" + std::to_string(probe.config.grid.cols()));
    }
  }
  const Dataset d = load_dataset(o.common.dataset, probe.config, o.common.limit);
  const Checkpoint ck = load_matching(o.checkpoint, d);
  const std::string part = default_split(d.kind, o.split);
  auto values = evaluate_on(ck, d, part);
  if (o.baseline) {
    const auto k = ck.config.grid.size();
    const auto b = d.kind == DataKind::images
                       ? kmeans_baseline(d.images.x, d.images.labels, k, ck.config.seed)
                       : [&] {
                           const auto s = normalized(series_part(d, part), ck.channel_mean, ck.channel_std);
                           return kmeans_baseline(s.x, s.step_labels, k, ck.config.seed);
                         }();
    values.insert(b.begin(), b.end());
  }
  const fs::path dir = o.common.out;
  fs::create_directories(dir);
  json metrics = to_json_values(values);
  metrics["split"] = part;
  write_json(dir / "metrics.json", metrics);
  write_json(dir / "manifest.json",
             manifest("eval", args, ck.config, d, {{"metrics", (dir / "metrics.json").string()}}));
  for (const auto& [k, v] : values) out << k << '=' << format_number(v) << '\n';
  return kExitOk;
}

int cmd_forecast(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const Checkpoint probe = train::load_checkpoint(o.checkpoint);
  if (probe.kind != DataKind::series) throw ConfigError("forecast needs a series checkpoint");
  if (kind_of(o.common.dataset) != DataKind::series) throw ConfigError("forecast needs a series dataset");
  const Dataset d = load_dataset(o.common.dataset, probe.config, o.common.limit);
  const Checkpoint ck = load_matching(o.checkpoint, d);
  const std::string part = default_split(d.kind, o.split);
  const auto s = normalized(series_part(d, part), ck.channel_mean, ck.channel_std);
  const auto f = evaluate_forecast(ck, s, o.horizon);
  const fs::path dir = o.common.out;
  fs::create_directories(dir);
  const Matrix in_units = (f.predicted.array().rowwise() * ck.channel_std.array()).rowwise() + ck.channel_mean.array();
  write_predictions_csv(dir / "predictions.csv", s, o.horizon, in_units);
  json metrics{{"forecast_mse", f.mse},
               {"copy_last_mse", f.copy_last_mse},
               {"horizon", o.horizon},
               {"series", s.n_series},
               {"split", part}};
  write_json(dir / "metrics.json", metrics);
  write_json(dir / "manifest.json", manifest("forecast", args, ck.config, d,
                                             {{"metrics", (dir / "metrics.json").string()},
                                              {"predictions", (dir / "predictions.csv").string()}}));
  out << "forecast_mse=" << format_number(f.mse) << " copy_last_mse=" << format_number(f.copy_last_mse) << '\n';
  return kExitOk;
}

int cmd_export_grid(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const Checkpoint probe = train::load_checkpoint(o.checkpoint);
  const Dataset d = load_dataset(o.common.dataset, probe.config, o.common.limit);
  const Checkpoint ck = load_matching(o.checkpoint, d);
  const fs::path dir = o.common.out;
  fs::create_directories(dir);
  const json outputs = export_grid(dir, ck, d, default_split(d.kind, o.split));
  write_json(dir / "manifest.json", manifest("export-grid", args, ck.config, d, outputs));
  out << "wrote " << (dir / "grid.csv").string() << '\n';
  return kExitOk;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

int cmd_sweep(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  if (o.param != "beta" && o.param != "gamma" && o.param != "grid") {
    throw ConfigError("sweep parameter must be beta, gamma or grid, got '" + o.param + "'");
  }
  const auto values = split_list(o.values);
  const auto seeds = split_list(o.seeds);
  if (values.empty() || seeds.empty()) throw ConfigError("sweep needs --values and --seeds");
  const DataKind kind = kind_of(o.common.dataset);
  const TrainConfig base = resolve_config(o.common, kind);
  const fs::path dir = o.common.out;
  fs::create_directories(dir);
  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw InputError("cannot write " + (dir / "sweep.csv").string());
  csv << "param,value,seed,purity,nmi,morans_i\n";
  auto cell = [](const std::map<std::string, double>& m, const std::string& k) {
    const auto it = m.find(k);
    return it == m.end() || !std::isfinite(it->second) ? std::string() : format_number(it->second);
  };
  std::string checksum;
  for (const auto& value : values) {
    for (const auto& seed_text : seeds) {
      TrainConfig config = base;
      train::apply_override(config, o.param + "=" + (o.param == "grid" ? "\"" + value + "\"" : value));
      train::apply_override(config, "seed=" + seed_text);
      config.validate();
      const Dataset d = load_dataset(o.common.dataset, config, o.common.limit);
      checksum = d.checksum;
      const Checkpoint ck = train_on(config, d, {});
      const auto m = evaluate_on(ck, d, default_split(d.kind, o.split));
      csv << o.param << ',' << value << ',' << seed_text << ',' << cell(m, "purity") << ',' << cell(m, "nmi") << ','
          << cell(m, "morans_i") << '\n'
          << std::flush;
      if (!o.quiet) {
        out << o.param << '=' << value << " seed=" << seed_text << " purity=" << cell(m, "purity")
            << " nmi=" << cell(m, "nmi") << " morans_i=" << cell(m, "morans_i") << '\n'
            << std::flush;
      }
    }
  }
  json doc{{"command", "sweep"},
           {"arguments", std::vector<std::string>(args.begin() + 1, args.end())},
           {"config", train::to_json(base)},
           {"dataset", {{"id", o.common.dataset}, {"checksum_last", checksum}}},
           {"param", o.param},
           {"values", values},
           {"seeds", seeds},
           {"outputs", {{"sweep", (dir / "sweep.csv").string()}}},
           {"version", DPSOM_VERSION}};
  write_json(dir / "manifest.json", doc);
  return kExitOk;
}

int cmd_check_grad(const Options& o, std::ostream& out) {
  const DataKind kind = kind_of(o.common.dataset);
  const TrainConfig config = resolve_config(o.common, kind);
  const Dataset d = load_dataset(o.common.dataset, config, o.common.limit);
  bool passed = true;
  for (int point = 0; point < o.points; ++point) {
    TrainConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(point);
    for (const auto term : train::kAllTerms) {
      if (kind == DataKind::images && (term == train::Term::smooth || term == train::Term::pred)) continue;
      train::ObjectiveContext ctx;
      ctx.seed = c.seed;
      ctx.only = std::vector<train::Term>{term};
      nd::GradientCheckReport rep;
      if (kind == DataKind::images) {
        data::Indices first;
        for (int i = 0; i < std::min<long>(o.samples, d.images.size()); ++i) first.push_back(i);
        const auto params = train::new_params(c, static_cast<int>(d.images.dim()), kind);
        rep = train::check_gradient(params, d.images.select(first), c, o.h, o.tol, ctx);
      } else {
        const auto stats = data::ChannelStats::fit(d.parts.train.x);
        data::Indices first;
        for (int i = 0; i < std::min<long>(2, d.parts.train.n_series); ++i) first.push_back(i);
        const auto steps = std::min<Eigen::Index>(std::max(2, o.samples / 2), d.series.steps);
        const auto s = normalized(d.parts.train.select(first).steps_range(0, steps), stats.mean, stats.stddev);
        const auto params = train::new_params(c, static_cast<int>(d.series.dim()), kind);
        rep = train::check_gradient(params, s, c, o.h, o.tol, ctx);
      }
      const bool ok = rep.passed();
      passed = passed && ok;
      out << "point " << point << ' ' << train::to_string(term) << " max_rel_error=" << format_number(rep.max_rel_error())
          << (ok ? " ok" : " FAIL") << '\n';
    }
  }
  return passed ? kExitOk : kExitNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep probabilistic self-organizing maps: train, evaluate and forecast", "dpsom"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DPSOM_VERSION);
  Options o;

  auto add_dataset = [&](CLI::App* sub) {
    sub->add_option("--dataset", o.common.dataset, "mnist, fmnist, synth-icu or csv:<path>")->required();
    sub->add_option("--limit", o.common.limit, "keep only the first N images or series");
  };
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.common.config_file, "JSON config; must state the required fields");
    sub->add_option("--override", o.common.overrides, "key=value, applied after the config file");
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.common.out, "output directory")->required(); };

  auto* train_cmd = app.add_subcommand("train", "train a model and write checkpoint, metrics and exports");
  add_dataset(train_cmd);
  add_config(train_cmd);
  add_out(train_cmd);
  train_cmd->add_flag("--quiet", o.quiet, "no per-epoch progress");

  auto* eval_cmd = app.add_subcommand("eval", "cluster metrics of a checkpoint");
  eval_cmd->add_option("--checkpoint", o.checkpoint)->required();
  add_dataset(eval_cmd);
  add_out(eval_cmd);
  eval_cmd->add_option("--split", o.split, "train, validation, test or all (series; default test)");
  eval_cmd->add_option("--grid", o.grid, "expected grid RxC");
  eval_cmd->add_flag("--baseline", o.baseline, "add raw-input k-means with the same K");

  auto* forecast_cmd = app.add_subcommand("forecast", "roll the forecaster over held-out final steps");
  forecast_cmd->add_option("--checkpoint", o.checkpoint)->required();
  add_dataset(forecast_cmd);
  add_out(forecast_cmd);
  forecast_cmd->add_option("--horizon", o.horizon, "steps to predict")->capture_default_str();
  forecast_cmd->add_option("--split", o.split, "default test");

  auto* export_cmd = app.add_subcommand("export-grid", "grid.csv, trajectories.csv and centroid tiles");
  export_cmd->add_option("--checkpoint", o.checkpoint)->required();
  add_dataset(export_cmd);
  add_out(export_cmd);
  export_cmd->add_option("--split", o.split, "default test");

  auto* sweep_cmd = app.add_subcommand("sweep", "train over values x seeds and write sweep.csv");
  add_dataset(sweep_cmd);
  add_config(sweep_cmd);
  add_out(sweep_cmd);
  sweep_cmd->add_option("--param", o.param, "beta, gamma or grid")->capture_default_str();
  sweep_cmd->add_option("--values", o.values, "comma-separated values")->required();
  sweep_cmd->add_option("--seeds", o.seeds, "comma-separated seeds")->capture_default_str();
  sweep_cmd->add_option("--split", o.split, "evaluation split for series (default test)");
  sweep_cmd->add_flag("--quiet", o.quiet);

  auto* grad_cmd = app.add_subcommand("check-grad", "finite-difference check of every loss term");
  add_dataset(grad_cmd);
  add_config(grad_cmd);
  grad_cmd->add_option("--samples", o.samples, "rows (images) or steps x 2 series")->capture_default_str();
  grad_cmd->add_option("--points", o.points, "random parameter points")->capture_default_str();
  grad_cmd->add_option("--step", o.h, "finite-difference step")->capture_default_str();
  grad_cmd->add_option("--tol", o.tol)->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << DPSOM_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  WarningSink sink = [&err](const std::string& m) { err << "warning: " << m << '\n'; };
  set_warning_sink(sink);
  int code = kExitFailure;
  try {
    if (train_cmd->parsed()) code = cmd_train(o, args, out);
    if (eval_cmd->parsed()) code = cmd_eval(o, args, out);
    if (forecast_cmd->parsed()) code = cmd_forecast(o, args, out);
    if (export_cmd->parsed()) code = cmd_export_grid(o, args, out);
    if (sweep_cmd->parsed()) code = cmd_sweep(o, args, out);
    if (grad_cmd->parsed()) code = cmd_check_grad(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    code = kExitConfig;
  } catch (const InputError& e) {
    err << "data error: " << e.what() << '\n';
    code = kExitData;
  } catch (const DimensionError& e) {
    err << "data error: " << e.what() << '\n';
    code = kExitData;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    code = kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kExitFailure;
  }
  set_warning_sink({});
  return code;
}

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace dpsom::cli
