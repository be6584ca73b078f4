#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dpsom/data/batch.hpp"

namespace dpsom::data {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads an IDX image file (u8, N x rows x cols) and its label file. Pixels
/// are scaled to [0, 1] and flattened row-major. num_classes is
/// max(label) + 1. Throws FormatError naming the byte offset on bad magic,
/// truncation, or mismatched counts; InputError if a file cannot be opened.
Batch load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Writes raw u8 pixels (size = count * rows * cols) as an IDX image file.
void write_idx_images(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels, std::uint32_t count,
                      std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

}  // namespace dpsom::data
