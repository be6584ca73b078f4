#include "dpsom/cli/datasets.hpp"

#include <cstdlib>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "dpsom/data/idx.hpp"
#include "dpsom/data/series_csv.hpp"
#include "dpsom/data/synth_icu.hpp"
#include "dpsom/errors.hpp"

#ifndef DPSOM_DEFAULT_DATA_ROOT
#define DPSOM_DEFAULT_DATA_ROOT "data"
#endif

namespace dpsom::cli {
namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* bytes, std::size_t size) { EVP_DigestUpdate(ctx_, bytes, size); }
  template <class T>
  void update(const std::vector<T>& v) {
    update(v.data(), v.size() * sizeof(T));
  }
  void update(const Matrix& m) { update(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double)); }

  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, digest, &len);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
  }

 private:
  EVP_MD_CTX* ctx_;
};

data::Batch load_images(const std::string& name, long limit) {
  const auto dir = data_root() / name;
  data::Batch b = data::load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  if (limit > 0 && limit < b.size()) {
    data::Indices first(static_cast<std::size_t>(limit));
    for (long i = 0; i < limit; ++i) first[static_cast<std::size_t>(i)] = i;
    const int classes = b.num_classes;
    b = b.select(first);
    b.num_classes = classes;
  }
  return b;
}

}  // namespace

std::filesystem::path data_root() {
  if (const char* env = std::getenv("DPSOM_DATA_ROOT"); env != nullptr && *env != '\0') return env;
  return DPSOM_DEFAULT_DATA_ROOT;
}

std::string sha256_hex(const void* bytes, std::size_t size) {
  Sha256 h;
  h.update(bytes, size);
  return h.hex();
}

Dataset load_dataset(const std::string& id, const train::TrainConfig& config, long limit) {
  Dataset d;
  d.id = id;
  Sha256 hash;
  if (id == "mnist" || id == "fmnist") {
    d.kind = train::DataKind::images;
    d.images = load_images(id, limit);
    hash.update(d.images.x);
    hash.update(d.images.labels);
    d.checksum = hash.hex();
    return d;
  }
  d.kind = train::DataKind::series;
  if (id == "synth-icu") {
    data::SynthIcuOptions o;
    o.n_series = config.synth_series;
    o.steps = config.synth_steps;
    o.dim = config.synth_dim;
    o.seed = config.seed;
    d.series = data::synth_icu(o);
  } else if (id.rfind("csv:", 0) == 0) {
    d.series = data::load_series_csv(id.substr(4));
  } else {
    throw ConfigError("unknown dataset '" + id + "' (expected mnist, fmnist, synth-icu or csv:<path>)");
  }
  if (limit > 0 && limit < d.series.n_series) {
    data::Indices first(static_cast<std::size_t>(limit));
    for (long i = 0; i < limit; ++i) first[static_cast<std::size_t>(i)] = i;
    d.series = d.series.select(first);
  }
  if (d.series.n_series < 3) throw InputError("dataset '" + id + "' needs at least 3 series to split");
  d.parts = data::split(d.series, {0.8, 0.1, 0.1}, config.seed);
  hash.update(d.series.x);
  hash.update(d.series.step_labels);
  d.checksum = hash.hex();
  return d;
}

const data::SeriesBatch& series_part(const Dataset& d, const std::string& part) {
  if (d.kind != train::DataKind::series) throw ConfigError("dataset '" + d.id + "' is not a series dataset");
  if (part == "train") return d.parts.train;
  if (part == "validation") return d.parts.validation;
  if (part == "test") return d.parts.test;
  if (part == "all") return d.series;
  throw ConfigError("unknown split '" + part + "' (expected train, validation, test or all)");
}

data::SeriesBatch normalized(const data::SeriesBatch& b, const RowVector& mean, const RowVector& stddev) {
  if (mean.size() != b.dim() || stddev.size() != b.dim()) {
    throw DimensionError("channel statistics have " + std::to_string(mean.size()) + " entries for " +
                         std::to_string(b.dim()) + " channels");
  }
  data::ChannelStats stats{mean, stddev};
  data::SeriesBatch out = b;
  out.x = stats.apply(b.x);
  return out;
}

}  // namespace dpsom::cli
