#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dpsom/ndcore/param_vector.hpp"
#include "dpsom/trainer/config.hpp"

namespace dpsom::train {

/// One line of the training history: loss terms averaged over the epoch's
/// batches, plus purity/nmi when labels exist.
struct EpochRecord {
  std::string phase;
  int epoch = 0;
  std::map<std::string, double> values;

  bool operator==(const EpochRecord&) const = default;
};

struct Checkpoint {
  TrainConfig config;
  DataKind kind = DataKind::images;
  int input_dim = 0;
  nd::ParamVector params;
  /// Epochs completed over all phases.
  int epoch = 0;
  std::vector<EpochRecord> history;
  /// Per-channel z-score statistics of the training split (series only).
  RowVector channel_mean;
  RowVector channel_std;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: 8-byte magic "DPSOMCKP", u32 version, u64 header length, UTF-8
/// JSON header (config, kind, input_dim, epoch, history, block layout,
/// channel statistics), u64 value count, little-endian float64 values.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws FormatError naming the byte offset of any inconsistency.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string to_string(DataKind kind);
DataKind parse_data_kind(const std::string& text);

}  // namespace dpsom::train
