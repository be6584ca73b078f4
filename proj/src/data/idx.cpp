#include "dpsom/data/idx.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "dpsom/errors.hpp"

namespace dpsom::data {
namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw FormatError(path.string() + ": truncated header at offset " + std::to_string(offset));
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string hex(std::uint32_t v) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

}  // namespace

Batch load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_all(images);
  const auto lab = read_all(labels);

  const auto img_magic = read_be32(img, 0, images);
  if (img_magic != kIdxImageMagic) {
    throw FormatError(images.string() + ": bad image magic " + hex(img_magic) + " at offset 0");
  }
  const auto lab_magic = read_be32(lab, 0, labels);
  if (lab_magic != kIdxLabelMagic) {
    throw FormatError(labels.string() + ": bad label magic " + hex(lab_magic) + " at offset 0");
  }
  const std::size_t count = read_be32(img, 4, images);
  const std::size_t rows = read_be32(img, 8, images);
  const std::size_t cols = read_be32(img, 12, images);
  const std::size_t label_count = read_be32(lab, 4, labels);
  if (label_count != count) {
    throw FormatError(labels.string() + ": label count " + std::to_string(label_count) + " at offset 4 differs from " +
                      std::to_string(count) + " images");
  }
  const std::size_t pixels = rows * cols;
  const std::size_t img_need = 16 + count * pixels;
  if (img.size() < img_need) {
    throw FormatError(images.string() + ": truncated pixel data at offset " + std::to_string(img.size()) +
                      " (expected " + std::to_string(img_need) + " bytes)");
  }
  if (lab.size() < 8 + count) {
    throw FormatError(labels.string() + ": truncated label data at offset " + std::to_string(lab.size()) +
                      " (expected " + std::to_string(8 + count) + " bytes)");
  }

  Batch out;
  out.x.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  for (std::size_t i = 0; i < count * pixels; ++i) out.x.data()[i] = img[16 + i] / 255.0;
  out.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) out.labels[i] = lab[8 + i];
  out.num_classes = count ? *std::max_element(out.labels.begin(), out.labels.end()) + 1 : 0;
  return out;
}

void write_idx_images(const std::filesystem::path& path, const std::vector<std::uint8_t>& pixels, std::uint32_t count,
                      std::uint32_t rows, std::uint32_t cols) {
  if (pixels.size() != std::size_t{count} * rows * cols) throw DimensionError("write_idx_images: pixel count mismatch");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(16 + pixels.size());
  put_be32(bytes, kIdxImageMagic);
  put_be32(bytes, count);
  put_be32(bytes, rows);
  put_be32(bytes, cols);
  bytes.insert(bytes.end(), pixels.begin(), pixels.end());
  write_bytes(path, bytes);
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> bytes;
  put_be32(bytes, kIdxLabelMagic);
  put_be32(bytes, static_cast<std::uint32_t>(labels.size()));
  bytes.insert(bytes.end(), labels.begin(), labels.end());
  write_bytes(path, bytes);
}

}  // namespace dpsom::data
