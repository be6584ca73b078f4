#include "dpsom/trainer/checkpoint.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "dpsom/errors.hpp"

namespace dpsom::train {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

using nlohmann::json;
constexpr std::array<char, 8> kMagic{'D', 'P', 'S', 'O', 'M', 'C', 'K', 'P'};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(std::ifstream& in, const std::filesystem::path& path) : in_(in), path_(path) {}

  template <class T>
  T get(const char* what) {
    T v{};
    read(reinterpret_cast<char*>(&v), sizeof(T), what);
    return v;
  }

  void read(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail(std::string("truncated ") + what);
    offset_ += n;
  }

  [[noreturn]] void fail(const std::string& what) const { fail_at(what, offset_); }

  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    throw FormatError(path_.string() + ": " + what + " at byte offset " + std::to_string(at));
  }

  std::size_t offset() const { return offset_; }

 private:
  std::ifstream& in_;
  const std::filesystem::path& path_;
  std::size_t offset_ = 0;
};

}  // namespace

std::string to_string(DataKind kind) { return kind == DataKind::images ? "images" : "series"; }

DataKind parse_data_kind(const std::string& text) {
  if (text == "images") return DataKind::images;
  if (text == "series") return DataKind::series;
  throw ConfigError("unknown data kind '" + text + "'");
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  json history = json::array();
  for (const auto& rec : ckpt.history) {
    json values = json::object();
    for (const auto& [k, v] : rec.values) values[k] = number_or_null(v);
    history.push_back({{"phase", rec.phase}, {"epoch", rec.epoch}, {"values", values}});
  }
  json layout = json::array();
  for (const auto& name : ckpt.params.names_in_storage_order()) {
    const auto& info = ckpt.params.info(name);
    layout.push_back({{"name", name}, {"offset", info.offset}, {"rows", info.rows}, {"cols", info.cols}});
  }
  const json header{{"config", to_json(ckpt.config)},
                    {"kind", to_string(ckpt.kind)},
                    {"input_dim", ckpt.input_dim},
                    {"epoch", ckpt.epoch},
                    {"history", history},
                    {"layout", layout},
                    {"channels", ckpt.channel_mean.size()}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put(out, kCheckpointVersion);
  put(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto count = static_cast<std::uint64_t>(ckpt.params.size());
  put(out, count);
  out.write(reinterpret_cast<const char*>(ckpt.params.values().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  out.write(reinterpret_cast<const char*>(ckpt.channel_mean.data()),
            static_cast<std::streamsize>(ckpt.channel_mean.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(ckpt.channel_std.data()),
            static_cast<std::streamsize>(ckpt.channel_std.size() * sizeof(double)));
  if (!out) throw InputError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  Reader r(in, path);
  std::array<char, 8> magic{};
  r.read(magic.data(), magic.size(), "magic");
  if (magic != kMagic) r.fail_at("bad magic", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));
  const auto header_size = r.get<std::uint64_t>("header length");
  if (header_size > (1ull << 32)) r.fail("implausible header length");
  std::string text(header_size, '\0');
  const std::size_t header_offset = r.offset();
  r.read(text.data(), text.size(), "header");

  Checkpoint ckpt;
  json header;
  try {
    header = json::parse(text);
    ckpt.config = from_json(header.at("config"));
    ckpt.kind = parse_data_kind(header.at("kind").get<std::string>());
    ckpt.input_dim = header.at("input_dim").get<int>();
    ckpt.epoch = header.at("epoch").get<int>();
    for (const auto& rec : header.at("history")) {
      EpochRecord e{rec.at("phase").get<std::string>(), rec.at("epoch").get<int>(), {}};
      for (const auto& [k, v] : rec.at("values").items()) e.values[k] = number_from(v);
      ckpt.history.push_back(std::move(e));
    }
    for (const auto& block : header.at("layout")) {
      ckpt.params.add_block(block.at("name").get<std::string>(), block.at("rows").get<Eigen::Index>(),
                            block.at("cols").get<Eigen::Index>());
      if (ckpt.params.info(block.at("name")).offset != block.at("offset").get<Eigen::Index>()) {
        throw FormatError("layout offsets are inconsistent");
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": invalid header at byte offset " + std::to_string(header_offset) + ": " +
                      e.what());
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": invalid header at byte offset " + std::to_string(header_offset) + ": " +
                      e.what());
  }
  const auto count = r.get<std::uint64_t>("value count");
  if (count != static_cast<std::uint64_t>(ckpt.params.size())) {
    r.fail("value count " + std::to_string(count) + " does not match layout size " +
           std::to_string(ckpt.params.size()));
  }
  r.read(reinterpret_cast<char*>(ckpt.params.values().data()), count * sizeof(double), "parameter values");
  const auto channels = header.at("channels").get<Eigen::Index>();
  ckpt.channel_mean.resize(channels);
  ckpt.channel_std.resize(channels);
  r.read(reinterpret_cast<char*>(ckpt.channel_mean.data()), channels * sizeof(double), "channel means");
  r.read(reinterpret_cast<char*>(ckpt.channel_std.data()), channels * sizeof(double), "channel deviations");
  return ckpt;
}

}  // namespace dpsom::train
