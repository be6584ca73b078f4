#include "dpsom/cli/exports.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "dpsom/errors.hpp"
#include "dpsom/format.hpp"
#include "dpsom/genmodel/architecture.hpp"
#include "dpsom/genmodel/inference.hpp"

namespace dpsom::cli {
namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void write_row(std::ostream& out, const Eigen::Ref<const RowVector>& row) {
  for (Eigen::Index j = 0; j < row.size(); ++j) out << ',' << format_number(row[j]);
}

}  // namespace

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

nlohmann::json history_json(const std::vector<train::EpochRecord>& history) {
  nlohmann::json doc = nlohmann::json::object();
  std::set<std::string> keys;
  for (const auto& r : history)
    for (const auto& [k, v] : r.values) keys.insert(k);
  nlohmann::json series = nlohmann::json::object();
  series["phase"] = nlohmann::json::array();
  series["epoch"] = nlohmann::json::array();
  for (const auto& k : keys) series[k] = nlohmann::json::array();
  for (const auto& r : history) {
    series["phase"].push_back(r.phase);
    series["epoch"].push_back(r.epoch);
    for (const auto& k : keys) {
      const auto it = r.values.find(k);
      if (it == r.values.end() || !std::isfinite(it->second)) {
        series[k].push_back(nullptr);
      } else {
        series[k].push_back(it->second);
      }
    }
  }
  if (!history.empty()) {
    for (const auto& [k, v] : history.back().values) doc[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
    doc["epochs"] = history.back().epoch;
  }
  doc["history"] = std::move(series);
  return doc;
}

void write_grid_csv(const std::filesystem::path& path, const som::GridSpec& grid, const std::vector<int>& assignment,
                    const std::vector<double>& labels) {
  const int k = grid.size();
  std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
  std::vector<long> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto a = static_cast<std::size_t>(assignment[i]);
    ++counts.at(a);
    if (!labels.empty()) sums[a] += labels.at(i);
  }
  auto out = open_out(path);
  out << "row,col,cluster_id,mean_label,count\n";
  for (int j = 0; j < k; ++j) {
    const auto node = grid.node(j);
    const auto u = static_cast<std::size_t>(j);
    out << node.row << ',' << node.col << ',' << j << ',';
    if (counts[u] > 0 && !labels.empty()) out << format_number(sums[u] / static_cast<double>(counts[u]));
    out << ',' << counts[u] << '\n';
  }
}

void write_trajectories_csv(const std::filesystem::path& path, const som::GridSpec& grid,
                            const data::SeriesBatch& series, const Matrix& soft) {
  if (soft.rows() != series.rows() || soft.cols() != grid.size()) {
    throw DimensionError("trajectories: assignment matrix does not match series and grid");
  }
  auto out = open_out(path);
  out << "series_id,t,row,col";
  for (int j = 0; j < grid.size(); ++j) out << ",p_" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < series.n_series; ++i) {
    const auto id = series.series_ids.empty() ? static_cast<std::int64_t>(i)
                                              : series.series_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < series.steps; ++t) {
      const Eigen::Index r = i * series.steps + t;
      Eigen::Index best = 0;
      soft.row(r).maxCoeff(&best);
      const auto node = grid.node(static_cast<int>(best));
      out << id << ',' << t << ',' << node.row << ',' << node.col;
      write_row(out, soft.row(r));
      out << '\n';
    }
  }
}

void write_predictions_csv(const std::filesystem::path& path, const data::SeriesBatch& series, int horizon,
                           const Matrix& predicted) {
  if (predicted.rows() != series.n_series * horizon || predicted.cols() != series.dim()) {
    throw DimensionError("predictions do not match series count and horizon");
  }
  auto out = open_out(path);
  out << "series_id,t";
  for (Eigen::Index c = 0; c < series.dim(); ++c) out << ",ch_" << c;
  out << '\n';
  for (Eigen::Index i = 0; i < series.n_series; ++i) {
    const auto id = series.series_ids.empty() ? static_cast<std::int64_t>(i)
                                              : series.series_ids[static_cast<std::size_t>(i)];
    for (int h = 0; h < horizon; ++h) {
      out << id << ',' << series.steps - horizon + h;
      write_row(out, predicted.row(i * horizon + h));
      out << '\n';
    }
  }
}

void write_pgm(const std::filesystem::path& path, const Matrix& image) {
  auto out = open_out(path, true);
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const double v = std::clamp(image(r, c), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
}

int write_centroid_tiles(const std::filesystem::path& dir, const train::Checkpoint& ckpt) {
  const auto side = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(ckpt.input_dim))));
  if (side * side != ckpt.input_dim) return 0;
  const auto arch = ckpt.config.architecture(ckpt.input_dim);
  const Matrix decoded = gen::decode(ckpt.params, arch, ckpt.params.block(gen::kCentroids)).mean;
  const auto& grid = ckpt.config.grid;
  Matrix mosaic = Matrix::Zero(grid.rows() * side, grid.cols() * side);
  for (int j = 0; j < grid.size(); ++j) {
    Matrix tile(side, side);
    for (Eigen::Index p = 0; p < decoded.cols(); ++p) tile(p / side, p % side) = decoded(j, p);
    write_pgm(dir / ("cluster_" + std::to_string(j) + ".pgm"), tile);
    const auto node = grid.node(j);
    mosaic.block(node.row * side, node.col * side, side, side) = tile;
  }
  write_pgm(dir / "grid.pgm", mosaic);
  return grid.size();
}

}  // namespace dpsom::cli
