#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpsom/cli/evaluation.hpp"
#include "dpsom/data/batch.hpp"
#include "dpsom/somgrid/grid.hpp"
#include "dpsom/trainer/checkpoint.hpp"

namespace dpsom::cli {

/// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Flat final values from the last epoch plus one array per key over the
/// history (null where an epoch lacks the key).
nlohmann::json history_json(const std::vector<train::EpochRecord>& history);

/// row,col,cluster_id,mean_label,count; one line per node. mean_label is
/// empty for clusters without points.
void write_grid_csv(const std::filesystem::path& path, const som::GridSpec& grid, const std::vector<int>& assignment,
                    const std::vector<double>& labels);

/// series_id,t,row,col,p_0..p_{K-1}; row/col of the most probable node.
void write_trajectories_csv(const std::filesystem::path& path, const som::GridSpec& grid,
                            const data::SeriesBatch& series, const Matrix& soft);

/// series_id,t,ch_0..ch_{d-1} for each forecast step.
void write_predictions_csv(const std::filesystem::path& path, const data::SeriesBatch& series, int horizon,
                           const Matrix& predicted);

/// Binary PGM (P5, maxval 255) of values in [0, 1], clipped.
void write_pgm(const std::filesystem::path& path, const Matrix& image);

/// Decodes every centroid and writes tiles/cluster_<k>.pgm plus a grid
/// mosaic when the input dimension is a perfect square. Returns the number
/// of tiles written.
int write_centroid_tiles(const std::filesystem::path& dir, const train::Checkpoint& ckpt);

}  // namespace dpsom::cli
