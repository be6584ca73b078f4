#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dpsom/cli/app.hpp"
#include "dpsom/cli/exports.hpp"
#include "dpsom/data/series_csv.hpp"
#include "dpsom/data/synth_icu.hpp"
#include "dpsom/format.hpp"
#include "dpsom/trainer/objective.hpp"
#include "fixtures.hpp"

#include <unistd.h>

namespace fs = std::filesystem;
using namespace dpsom;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "dpsom");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dpsom_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

const std::vector<std::string> kTiny{
    "--override", "synth_series=20", "--override", "synth_steps=10", "--override", "synth_dim=4",
    "--override", "hidden=[8]",      "--override", "latent_dim=3",   "--override", "grid=\"2x3\"",
    "--override", "epochs=4",        "--override", "batch_size=5",   "--override", "dropout=0",
    "--quiet"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

fs::path trained_run() {
  static const fs::path dir = [] {
    const auto d = scratch("train");
    const auto r = run(with({"train", "--dataset", "synth-icu", "--out", d.string()}, kTiny));
    EXPECT_EQ(r.code, 0) << r.err;
    return d;
  }();
  return dir;
}

}  // namespace

TEST(Cli, TrainWritesArtifacts) {
  const auto dir = trained_run();
  for (const char* f : {"checkpoint.dpsom", "metrics.json", "manifest.json", "grid.csv", "trajectories.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto m = read_json(dir / "metrics.json");
  EXPECT_TRUE(m.contains("history"));
  EXPECT_EQ(m["history"]["phase"].size(), m["history"]["epoch"].size());
  const auto man = read_json(dir / "manifest.json");
  EXPECT_EQ(man["dataset"]["id"], "synth-icu");
  EXPECT_EQ(man["dataset"]["checksum"].get<std::string>().size(), 64u);
  EXPECT_EQ(man["config"]["latent_dim"], 3);
  EXPECT_TRUE(man.contains("version"));
}

TEST(Cli, TrainIsReproducible) {
  const auto dir = scratch("again");
  const auto r = run(with({"train", "--dataset", "synth-icu", "--out", dir.string()}, kTiny));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "checkpoint.dpsom"), slurp(trained_run() / "checkpoint.dpsom"));
  EXPECT_EQ(slurp(dir / "metrics.json"), slurp(trained_run() / "metrics.json"));
  EXPECT_EQ(slurp(dir / "trajectories.csv"), slurp(trained_run() / "trajectories.csv"));
}

TEST(Cli, BetaOverrideZeroesSsom) {
  const auto dir = scratch("beta0");
  const auto r = run(with(with({"train", "--dataset", "synth-icu", "--out", dir.string()}, kTiny),
                          {"--override", "beta=0"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = read_json(dir / "metrics.json");
  const auto& phases = m["history"]["phase"];
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i] == "joint") {
      EXPECT_EQ(m["history"]["ssom"][i], 0.0);
    }
  }
}

TEST(Cli, MissingConfigFieldExitsTwo) {
  const auto dir = scratch("cfg");
  auto doc = train::to_json(train::TrainConfig{});
  doc.erase("latent_dim");
  std::ofstream(dir / "c.json") << doc.dump();
  const auto r = run({"train", "--dataset", "synth-icu", "--config", (dir / "c.json").string(), "--out",
                      (dir / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("latent_dim"), std::string::npos) << r.err;
}

TEST(Cli, ErrorCodes) {
  const auto dir = scratch("errors");
  EXPECT_EQ(run({"train", "--dataset", "nope", "--out", dir.string()}).code, 2);
  EXPECT_EQ(run({"train", "--dataset", "synth-icu", "--out", dir.string(), "--override", "betta=1"}).code, 2);
  EXPECT_EQ(run({"train", "--dataset", "csv:/no/such/file.csv", "--out", dir.string()}).code, 3);
  EXPECT_EQ(run({"eval", "--checkpoint", (dir / "missing").string(), "--dataset", "synth-icu", "--out",
                 dir.string()})
                .code,
            3);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, EvalWritesMetricsDeterministically) {
  const auto ck = (trained_run() / "checkpoint.dpsom").string();
  const auto a = scratch("eval_a"), b = scratch("eval_b");
  ASSERT_EQ(run({"eval", "--checkpoint", ck, "--dataset", "synth-icu", "--out", a.string(), "--baseline"}).code, 0);
  ASSERT_EQ(run({"eval", "--checkpoint", ck, "--dataset", "synth-icu", "--out", b.string(), "--baseline"}).code, 0);
  const auto m = read_json(a / "metrics.json");
  for (const char* k : {"purity", "nmi", "enrichment_nmi", "regime_nmi", "morans_i", "clusters_used", "kmeans_nmi"}) {
    EXPECT_TRUE(m.contains(k)) << k;
  }
  EXPECT_EQ(slurp(a / "metrics.json"), slurp(b / "metrics.json"));
  EXPECT_EQ(run({"eval", "--checkpoint", ck, "--dataset", "synth-icu", "--out", a.string(), "--grid", "4x4"}).code, 2);
  EXPECT_EQ(run({"eval", "--checkpoint", ck, "--dataset", "synth-icu", "--out", a.string(), "--grid", "2x3"}).code, 0);
}

TEST(Cli, ForecastWritesPredictions) {
  const auto ck = (trained_run() / "checkpoint.dpsom").string();
  const auto dir = scratch("forecast");
  const auto r = run({"forecast", "--checkpoint", ck, "--dataset", "synth-icu", "--out", dir.string(), "--horizon", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = read_json(dir / "metrics.json");
  EXPECT_TRUE(m.contains("forecast_mse"));
  EXPECT_TRUE(m.contains("copy_last_mse"));
  const auto rows = lines(dir / "predictions.csv");
  EXPECT_EQ(rows.size(), 1u + m["series"].get<std::size_t>() * 3);
  EXPECT_EQ(run({"forecast", "--checkpoint", ck, "--dataset", "synth-icu", "--out", dir.string(), "--horizon", "10"})
                .code,
            2);
  EXPECT_EQ(run({"forecast", "--checkpoint", ck, "--dataset", "mnist", "--out", dir.string()}).code, 2);
}

TEST(Cli, ExportGridShapes) {
  const auto ck = (trained_run() / "checkpoint.dpsom").string();
  const auto dir = scratch("export");
  ASSERT_EQ(run({"export-grid", "--checkpoint", ck, "--dataset", "synth-icu", "--out", dir.string()}).code, 0);
  const auto grid = lines(dir / "grid.csv");
  EXPECT_EQ(grid.size(), 1u + 6u);
  EXPECT_EQ(grid[0], "row,col,cluster_id,mean_label,count");
  const auto traj = lines(dir / "trajectories.csv");
  ASSERT_GT(traj.size(), 1u);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    std::stringstream ss(traj[i]);
    std::string cell;
    double sum = 0.0;
    for (int col = 0; std::getline(ss, cell, ','); ++col) {
      if (col >= 4) sum += *parse_number(cell);
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(Cli, SweepWritesOneRowPerRun) {
  const auto dir = scratch("sweep");
  const auto r = run(with({"sweep", "--dataset", "synth-icu", "--out", dir.string(), "--param", "beta", "--values",
                           "0,10", "--seeds", "0,1"},
                          kTiny));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(dir / "sweep.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "param,value,seed,purity,nmi,morans_i");
  EXPECT_EQ(rows[1].rfind("beta,0,0,", 0), 0u);
  EXPECT_EQ(run({"sweep", "--dataset", "synth-icu", "--out", dir.string(), "--param", "alpha", "--values", "1"}).code,
            2);
}

TEST(Cli, CheckGradPasses) {
  const auto r = run({"check-grad", "--dataset", "synth-icu", "--override", "synth_series=10", "--override",
                      "synth_steps=8", "--override", "synth_dim=4", "--override", "hidden=[5]", "--override",
                      "latent_dim=3", "--override", "grid=\"2x2\"", "--override", "dropout=0"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("pred"), std::string::npos);
}

TEST(Cli, CsvDatasetRoundTrip) {
  const auto dir = scratch("csv");
  const auto s = data::synth_icu(12, 8, 3, 4);
  data::write_series_csv(dir / "s.csv", s);
  const auto r = run(with({"train", "--dataset", "csv:" + (dir / "s.csv").string(), "--out", (dir / "run").string()},
                          {"--override", "hidden=[6]", "--override", "latent_dim=2", "--override", "grid=\"2x2\"",
                           "--override", "epochs=3", "--override", "batch_size=4", "--quiet"}));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "run" / "grid.csv"));
}

TEST(Exports, CentroidTilesAreImageSized) {
  auto c = fixture::tiny_static_config();
  c.likelihood = gen::Likelihood::bernoulli;
  train::Checkpoint ck;
  ck.config = c;
  ck.input_dim = 784;
  ck.params = train::new_params(c, 784, train::DataKind::images);
  const auto dir = scratch("tiles");
  EXPECT_EQ(cli::write_centroid_tiles(dir, ck), 6);
  const auto tile = slurp(dir / "cluster_0.pgm");
  EXPECT_EQ(tile.rfind("P5\n28 28\n255\n", 0), 0u);
  EXPECT_EQ(tile.size(), std::string("P5\n28 28\n255\n").size() + 784);
  EXPECT_EQ(slurp(dir / "grid.pgm").rfind("P5\n84 56\n255\n", 0), 0u);
  ck.input_dim = 20;
  ck.params = train::new_params(c, 20, train::DataKind::images);
  EXPECT_EQ(cli::write_centroid_tiles(scratch("no_tiles"), ck), 0);
}

TEST(Exports, HistoryJsonUsesNullForMissing) {
  std::vector<train::EpochRecord> h{{"som", 1, {{"quantization_error", 0.5}}}, {"joint", 2, {{"cah", 0.25}}}};
  const auto doc = cli::history_json(h);
  EXPECT_EQ(doc["cah"], 0.25);
  EXPECT_EQ(doc["epochs"], 2);
  EXPECT_TRUE(doc["history"]["cah"][0].is_null());
  EXPECT_EQ(doc["history"]["quantization_error"][0], 0.5);
}
