// Acceptance runner. Usage: dpsom_acceptance [criterion numbers...]
// Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "dpsom/cli/app.hpp"
#include "dpsom/cli/datasets.hpp"
#include "dpsom/cli/evaluation.hpp"
#include "dpsom/data/synth_icu.hpp"
#include "dpsom/format.hpp"
#include "dpsom/genmodel/inference.hpp"
#include "dpsom/metrics/clustering.hpp"
#include "dpsom/psom/assignments.hpp"
#include "dpsom/somgrid/grid.hpp"
#include "dpsom/trainer/checkpoint.hpp"
#include "dpsom/trainer/objective.hpp"
#include "dpsom/trainer/trainer.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace {

using namespace dpsom;
using train::DataKind;
using train::Term;
using train::TrainConfig;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

const std::vector<std::uint64_t> kSeeds{0, 1, 2};

// Gradient correctness ------------------------------------------------------

TrainConfig small_model(DataKind kind) {
  TrainConfig c = TrainConfig::defaults(kind);
  c.grid = som::GridSpec(2, 3);
  c.latent_dim = 3;
  c.hidden = {6};
  c.activation = gen::Activation::tanh;
  c.likelihood = gen::Likelihood::gaussian;
  c.dropout = 0.0;
  c.gamma = 1.3;
  c.beta = 0.7;
  c.smooth_weight = 0.9;
  c.pred_weight = 1.1;
  return c;
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  gen_fixture::Gen g(2024);
  data::Batch rows;
  rows.x = g.matrix(10, 5);
  data::SeriesBatch series;
  series.n_series = 2;
  series.steps = 5;
  series.x = g.matrix(10, 5);

  std::map<Term, double> worst;
  bool pass = true;
  for (int point = 0; point < 20; ++point) {
    for (const Term t : train::kAllTerms) {
      const bool temporal = t == Term::smooth || t == Term::pred;
      const DataKind kind = temporal ? DataKind::series : DataKind::images;
      TrainConfig c = small_model(kind);
      c.seed = 100 + static_cast<std::uint64_t>(point);
      const auto params = train::new_params(c, 5, kind);
      train::ObjectiveContext ctx;
      ctx.seed = c.seed;
      ctx.phase = t == Term::pred ? train::Phase::finetune : train::Phase::joint;
      ctx.only = std::vector<Term>{t};
      const auto rep = temporal ? train::check_gradient(params, series, c, 1e-5, 1e-4, ctx)
                                : train::check_gradient(params, rows, c, 1e-5, 1e-4, ctx);
      worst[t] = std::max(worst[t], rep.max_rel_error());
      pass = pass && rep.passed();
    }
  }
  const double secs = seconds_since(t0);
  std::string detail;
  for (const auto& [t, e] : worst) detail += train::to_string(t) + "=" + num(e) + " ";
  detail += "time=" + num(secs) + "s";
  return {pass && secs < 60.0, detail};
}

// Oracle equivalence --------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  gen_fixture::Gen g(77);
  std::map<std::string, double> worst;
  auto note = [&](const std::string& name, double diff) { worst[name] = std::max(worst[name], diff); };
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };

  for (int trial = 0; trial < 100; ++trial) {
    const int n = g.integer(1, 12);
    const som::GridSpec grid(g.integer(2, 5), g.integer(2, 5));
    const int k = grid.size();
    const Matrix z = g.matrix(n, g.integer(1, 4), 2.0);
    const Matrix mu = g.matrix(k, z.cols(), 2.0);
    const double alpha = g.real(0.5, 12.0);

    const Matrix s = psom::soft_assignments(z, mu, alpha);
    note("soft_assignments", gen_fixture::max_abs_diff(s, oracle::soft_assignments(gen_fixture::to_rows(z),
                                                                                     gen_fixture::to_rows(mu), alpha)));
    const Matrix t = psom::target_distribution(s);
    note("target_distribution", gen_fixture::max_abs_diff(t, oracle::target_distribution(gen_fixture::to_rows(s))));
    const Matrix other = g.row_stochastic(n, k, 0.7);
    note("cah", rel(psom::cah_loss(s, other), oracle::cah(gen_fixture::to_rows(s), gen_fixture::to_rows(other))));
    note("ssom", rel(psom::ssom_loss(s, grid), oracle::ssom(gen_fixture::to_rows(s), grid.rows(), grid.cols())));

    Vector y = g.matrix(k, 1);
    std::vector<double> yv(y.data(), y.data() + y.size());
    note("morans", rel(metrics::morans_index(grid, y), oracle::morans(grid.rows(), grid.cols(), yv)));

    const auto m = static_cast<std::size_t>(g.integer(1, 60));
    const auto a = g.labels(m, g.integer(1, 8));
    const auto l = g.labels(m, g.integer(1, 8));
    note("purity", rel(metrics::purity(a, l), oracle::purity(a, l)));
    note("nmi", rel(metrics::nmi(a, l), oracle::nmi(a, l)));

    const Matrix p = g.matrix(g.integer(1, 10), g.integer(1, 5));
    const Matrix q = g.matrix(p.rows(), p.cols());
    note("mse", rel(metrics::forecast_mse(p, q), oracle::mse(gen_fixture::to_rows(p), gen_fixture::to_rows(q))));
  }
  const double secs = seconds_since(t0);
  bool pass = secs < 60.0;
  std::string detail;
  for (const auto& [name, diff] : worst) {
    pass = pass && diff <= 1e-10;
    detail += name + "=" + num(diff) + " ";
  }
  return {pass, detail + "time=" + num(secs) + "s"};
}

// MNIST clustering ----------------------------------------------------------

Outcome mnist_clustering() {
  const auto t0 = Clock::now();
  TrainConfig c = TrainConfig::defaults(DataKind::images);
  c.grid = som::GridSpec(8, 8);
  c.latent_dim = 32;
  c.hidden = {256, 256};
  c.pretrain_epochs = 30;
  c.som_epochs = 2;
  c.joint_epochs = 50;
  c.finetune_epochs = 0;
  c.dropout = 0.0;
  c.batch_size = 100;
  c.learning_rate = 0.002;

  cli::Dataset d;
  try {
    d = cli::load_dataset("mnist", c, 10000);
  } catch (const std::exception& e) {
    return {false, std::string("cannot load mnist: ") + e.what()};
  }
  double purity = 0.0, nmi = 0.0, km_purity = 0.0;
  std::string per_seed;
  for (const auto seed : kSeeds) {
    c.seed = seed;
    const auto ck = train::train_dpsom(c, d.images);
    const auto ev = cli::evaluate_static(ck, d.images);
    const auto km = cli::kmeans_baseline(d.images.x, d.images.labels, c.grid.size(), seed);
    purity += ev.values.at("purity") / 3.0;
    nmi += ev.values.at("nmi") / 3.0;
    km_purity += km.at("kmeans_purity") / 3.0;
    per_seed += " seed" + std::to_string(seed) + "=" + num(ev.values.at("purity")) + "/" + num(ev.values.at("nmi"));
  }
  const double secs = seconds_since(t0);
  const bool pass = purity >= km_purity + 0.03 && purity >= 0.80 && nmi >= 0.55 && secs < 45 * 60;
  return {pass, "purity=" + num(purity) + " nmi=" + num(nmi) + " kmeans_purity=" + num(km_purity) + per_seed +
                    " time=" + num(secs) + "s"};
}

// synth-icu runs ------------------------------------------------------------

TrainConfig icu_config(std::uint64_t seed, double beta) {
  TrainConfig c = TrainConfig::defaults(DataKind::series);
  c.synth_series = 1000;
  c.synth_steps = 72;
  c.synth_dim = 20;
  c.grid = som::GridSpec(8, 8);
  c.latent_dim = 16;
  c.hidden = {64, 64};
  c.dropout = 0.0;
  c.batch_size = 50;
  c.pretrain_epochs = 40;
  c.som_epochs = 2;
  c.joint_epochs = 20;
  c.finetune_epochs = 50;
  c.gamma = 50.0;
  c.beta = beta;
  c.seed = seed;
  return c;
}

struct IcuRun {
  train::Checkpoint ckpt;
  data::SeriesBatch test;
  data::SeriesBatch train;
};

IcuRun run_icu(const TrainConfig& c) {
  static std::map<std::pair<std::uint64_t, double>, IcuRun> cache;
  const auto key = std::make_pair(c.seed, c.beta);
  if (const auto it = cache.find(key); it != cache.end()) return it->second;
  const auto d = cli::load_dataset("synth-icu", c);
  const auto stats = data::ChannelStats::fit(d.parts.train.x);
  IcuRun run;
  run.train = cli::normalized(d.parts.train, stats.mean, stats.stddev);
  run.test = cli::normalized(d.parts.test, stats.mean, stats.stddev);
  run.ckpt = train::train_tdpsom(c, run.train);
  run.ckpt.channel_mean = stats.mean;
  run.ckpt.channel_std = stats.stddev;
  cache.emplace(key, run);
  return run;
}

Outcome beta_coherence() {
  const auto t0 = Clock::now();
  const std::vector<double> betas{0.0, 10.0, 50.0, 100.0};
  std::vector<double> moran;
  for (const double beta : betas) {
    double mean = 0.0;
    for (const auto seed : kSeeds) {
      const auto run = run_icu(icu_config(seed, beta));
      const double v = cli::evaluate_series(run.ckpt, run.test).values.at("morans_i");
      mean += (std::isnan(v) ? 0.0 : v) / 3.0;
    }
    moran.push_back(mean);
  }
  int inversions = 0;
  for (std::size_t i = 1; i < moran.size(); ++i) inversions += moran[i] < moran[i - 1];
  const double gain = moran.back() - moran.front();
  const double secs = seconds_since(t0);
  std::string detail;
  for (std::size_t i = 0; i < betas.size(); ++i) detail += "I(" + num(betas[i]) + ")=" + num(moran[i]) + " ";
  return {inversions <= 1 && gain >= 0.1 && secs < 60 * 60,
          detail + "inversions=" + std::to_string(inversions) + " gain=" + num(gain) + " time=" + num(secs) + "s"};
}

Outcome temporal_advantage() {
  const auto t0 = Clock::now();
  double nmi = 0.0, km_nmi = 0.0, mse = 0.0, copy_last = 0.0;
  for (const auto seed : kSeeds) {
    const TrainConfig c = icu_config(seed, 10.0);
    const auto run = run_icu(c);
    nmi += cli::evaluate_series(run.ckpt, run.test).values.at("enrichment_nmi") / 3.0;
    km_nmi += cli::kmeans_baseline(run.test.x, run.test.step_labels, c.grid.size(), seed).at("kmeans_nmi") / 3.0;
    const auto f = cli::evaluate_forecast(run.ckpt, run.test, 6);
    mse += f.mse / 3.0;
    copy_last += f.copy_last_mse / 3.0;
  }
  const bool a = nmi > km_nmi;
  const bool b = mse < copy_last;
  return {a && b, std::string("(a) ") + (a ? "pass" : "fail") + " enrichment_nmi=" + num(nmi) +
                      " kmeans_nmi=" + num(km_nmi) + " (b) " + (b ? "pass" : "fail") + " forecast_mse=" + num(mse) +
                      " copy_last_mse=" + num(copy_last) + " time=" + num(seconds_since(t0)) + "s"};
}

// Ablations -----------------------------------------------------------------

data::Batch blobs(int n, std::uint64_t seed) {
  gen_fixture::Gen g(seed);
  data::Batch b;
  b.x = g.matrix(n, 6, 0.3);
  b.labels.resize(static_cast<std::size_t>(n));
  b.num_classes = 4;
  for (int i = 0; i < n; ++i) {
    b.labels[static_cast<std::size_t>(i)] = i % 4;
    b.x(i, i % 4) += 3.0;
  }
  return b;
}

TrainConfig blob_config() {
  TrainConfig c = TrainConfig::defaults(DataKind::images);
  c.grid = som::GridSpec(2, 2);
  c.latent_dim = 2;
  c.hidden = {16};
  c.likelihood = gen::Likelihood::gaussian;
  c.dropout = 0.0;
  c.batch_size = 20;
  c.pretrain_epochs = 5;
  c.som_epochs = 2;
  c.joint_epochs = 5;
  c.finetune_epochs = 0;
  return c;
}

bool joint_values_all(const train::Checkpoint& ck, const std::string& key, double value) {
  bool any = false;
  for (const auto& r : ck.history) {
    if (r.phase != "joint") continue;
    any = true;
    if (!r.values.count(key) || r.values.at(key) != value || !r.values.count("purity")) return false;
  }
  return any;
}

Outcome ablation_contracts() {
  const auto data = blobs(200, 5);
  TrainConfig no_ssom = blob_config();
  no_ssom.beta = 0.0;
  const auto ck = train::train_dpsom(no_ssom, data);
  const auto grad = train::term_gradient(ck.params, data, no_ssom, Term::ssom);
  const bool zero_blocks = (grad.values().array() == 0.0).all();
  const bool ssom_logged = joint_values_all(ck, "ssom", 0.0);

  TrainConfig plain = blob_config();
  plain.use_plain_ae = true;
  const auto ae = train::train_dpsom(plain, data);
  bool kl_zero = joint_values_all(ae, "elbo_kl", 0.0);
  for (const auto& r : ae.history) {
    if (r.phase == "pretrain") kl_zero = kl_zero && r.values.at("elbo_kl") == 0.0;
  }
  const bool pass = zero_blocks && ssom_logged && kl_zero;
  return {pass, "ssom_gradient_max=" + num(grad.values().cwiseAbs().maxCoeff()) +
                    " ssom_logged_zero=" + (ssom_logged ? "yes" : "no") + " plain_ae_kl_zero=" + (kl_zero ? "yes" : "no")};
}

// Invariants ----------------------------------------------------------------

Outcome invariant_suite() {
  gen_fixture::Gen g(31);
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& name) {
    if (!ok && std::find(failed.begin(), failed.end(), name) == failed.end()) failed.push_back(name);
  };

  for (int trial = 0; trial < 200; ++trial) {
    const som::GridSpec grid(g.integer(2, 6), g.integer(2, 6));
    const Matrix z = g.matrix(g.integer(1, 20), g.integer(1, 5), g.real(0.1, 10.0));
    const Matrix s = psom::soft_assignments(z, g.matrix(grid.size(), z.cols(), 3.0), g.real(0.5, 20.0));
    const Matrix t = psom::target_distribution(s);
    check(((s.rowwise().sum().array() - 1.0).abs() <= 1e-9).all(), "S row-stochastic");
    check(((t.rowwise().sum().array() - 1.0).abs() <= 1e-9).all(), "T row-stochastic");
    check((s.array() >= 0.0).all() && (t.array() >= 0.0).all(), "S/T non-negative");

    const Matrix one = g.row_stochastic(1, grid.size(), 0.5);
    check((psom::target_distribution(one) - one).cwiseAbs().maxCoeff() <= 1e-12, "N=1 fixed point");

    const int n_series = g.integer(1, 4), steps = g.integer(2, 8);
    const double smooth = gen::smooth_loss(g.matrix(n_series * steps, 3, g.real(0.1, 5.0)), n_series, steps, 10.0);
    check(smooth >= -1.0 && smooth <= 0.0, "smooth in [-1,0]");

    TrainConfig c = small_model(DataKind::images);
    c.seed = static_cast<std::uint64_t>(trial);
    auto params = train::new_params(c, 4, DataKind::images);
    params.values() += g.matrix(params.size(), 1, 0.5);
    data::Batch b;
    b.x = g.matrix(g.integer(1, 10), 4, 2.0);
    train::ObjectiveContext ctx;
    ctx.only = std::vector<Term>{Term::elbo_kl};
    check(train::evaluate_loss(params, b, c, ctx).term(Term::elbo_kl) >= 0.0, "KL >= 0");
  }

  for (int r = 2; r <= 12; ++r) {
    for (int col = 2; col <= 12; ++col) {
      const som::GridSpec grid(r, col);
      std::set<int> seen;
      for (int j = 0; j < grid.size(); ++j)
        for (const int e : som::neighbors(grid, j)) seen.insert(e);
      check(static_cast<int>(seen.size()) == grid.size(), "neighbor union");
    }
  }

  for (int trial = 0; trial < 30; ++trial) {
    const Matrix x = g.matrix(g.integer(5, 80), g.integer(1, 6));
    const auto km = metrics::kmeans(x, g.integer(1, 5), static_cast<std::uint64_t>(trial));
    for (std::size_t i = 1; i < km.inertia_history.size(); ++i) {
      check(km.inertia_history[i] <= km.inertia_history[i - 1] * (1.0 + 1e-12), "k-means inertia monotone");
    }
  }

  {
    const auto data = blobs(60, 9);
    const auto ck = train::train_dpsom(blob_config(), data);
    const auto path = std::filesystem::temp_directory_path() / ("dpsom_accept_" + std::to_string(::getpid()) + ".dpsom");
    train::save_checkpoint(ck, path);
    const auto back = train::load_checkpoint(path);
    std::filesystem::remove(path);
    const bool same_bits = back.params.same_layout(ck.params) &&
                           std::memcmp(back.params.values().data(), ck.params.values().data(),
                                       sizeof(double) * static_cast<std::size_t>(ck.params.size())) == 0;
    const Matrix s0 = train::soft_assign(ck, data.x), s1 = train::soft_assign(back, data.x);
    check(same_bits && back.history == ck.history && back.epoch == ck.epoch &&
              std::memcmp(s0.data(), s1.data(), sizeof(double) * static_cast<std::size_t>(s0.size())) == 0,
          "checkpoint round trip");
  }

  std::string detail = failed.empty() ? "all invariants hold" : "violated:";
  for (const auto& f : failed) detail += " [" + f + "]";
  return {failed.empty(), detail};
}

// Scaling -------------------------------------------------------------------

double joint_epoch_seconds(long n_series, int grid_side) {
  TrainConfig c = icu_config(0, 10.0);
  c.synth_series = n_series;
  c.grid = som::GridSpec(grid_side, grid_side);
  c.pretrain_epochs = 1;
  c.som_epochs = 1;
  c.joint_epochs = 9;
  c.finetune_epochs = 0;
  const auto d = cli::load_dataset("synth-icu", c);
  const auto stats = data::ChannelStats::fit(d.parts.train.x);
  std::vector<double> stamps;
  train::TrainHooks hooks;
  hooks.on_epoch = [&](const train::EpochRecord& r) {
    if (r.phase == "joint") stamps.push_back(std::chrono::duration<double>(Clock::now().time_since_epoch()).count());
  };
  train::train_tdpsom(c, cli::normalized(d.parts.train, stats.mean, stats.stddev), hooks);
  std::vector<double> durations;
  for (std::size_t i = 1; i < stamps.size(); ++i) durations.push_back(stamps[i] - stamps[i - 1]);
  std::sort(durations.begin(), durations.end());
  return durations[durations.size() / 2];
}

Outcome scaling_sanity() {
  const double base = joint_epoch_seconds(250, 8);
  const double doubled_n = joint_epoch_seconds(500, 8);
  const double quad_k = joint_epoch_seconds(250, 16);
  const double rn = doubled_n / base, rk = quad_k / base;
  return {rn < 2.5 && rk < 2.0, "epoch=" + num(base) + "s 2N_ratio=" + num(rn) + " 4K_ratio=" + num(rk)};
}

}  // namespace

int main(int argc, char** argv) {
  cli::tune_allocator();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness}, {"oracle equivalence", oracle_equivalence},
      {"mnist clustering", mnist_clustering},         {"beta spatial coherence", beta_coherence},
      {"temporal advantage", temporal_advantage},     {"ablation contracts", ablation_contracts},
      {"invariant suite", invariant_suite},           {"scaling sanity", scaling_sanity}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << argv[i] << "\n";
      return 2;
    }
    selected.insert(k);
  }
  if (selected.empty())
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.insert(k);

  bool all = true;
  for (const int k : selected) {
    const auto& [name, fn] = criteria[static_cast<std::size_t>(k - 1)];
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << k << " " << name << ": " << (o.pass ? "PASS" : "FAIL") << " " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
