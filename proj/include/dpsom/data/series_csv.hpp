#pragma once

#include <filesystem>

#include "dpsom/data/batch.hpp"

namespace dpsom::data {

/// Reads `series_id,t,ch_0..ch_{d-1}[,label]`, rows sorted by (series_id, t),
/// t running 0..T-1 in every series. Throws FormatError naming the line.
SeriesBatch load_series_csv(const std::filesystem::path& path);

/// Writes the same format; the label column is emitted when step_labels exist.
void write_series_csv(const std::filesystem::path& path, const SeriesBatch& batch);

}  // namespace dpsom::data
