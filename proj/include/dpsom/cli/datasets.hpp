#pragma once

#include <filesystem>
#include <string>

#include "dpsom/data/batch.hpp"
#include "dpsom/trainer/config.hpp"

namespace dpsom::cli {

/// $DPSOM_DATA_ROOT, or the directory configured at build time.
std::filesystem::path data_root();

struct Dataset {
  /// As given on the command line: mnist, fmnist, synth-icu or csv:<path>.
  std::string id;
  train::DataKind kind = train::DataKind::images;
  /// Static data (images).
  data::Batch images;
  /// Series data in input units, whole and split by series.
  data::SeriesBatch series;
  data::Split<data::SeriesBatch> parts;
  /// SHA-256 of the values and labels, hex.
  std::string checksum;
};

/// Loads a dataset. Series are split 80/10/10 by series with the config
/// seed; synth-icu is generated from the synth_* fields and the seed.
/// `limit` > 0 keeps only the first rows (images) or series.
/// Throws ConfigError for an unknown name and InputError for missing files.
Dataset load_dataset(const std::string& id, const train::TrainConfig& config, long limit = 0);

/// "train", "validation", "test" or "all".
const data::SeriesBatch& series_part(const Dataset& d, const std::string& part);

/// z-scores with the given statistics.
data::SeriesBatch normalized(const data::SeriesBatch& b, const RowVector& mean, const RowVector& stddev);

/// Hex SHA-256 of a byte range.
std::string sha256_hex(const void* bytes, std::size_t size);

}  // namespace dpsom::cli
