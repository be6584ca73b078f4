#include "dpsom/data/series_csv.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpsom/errors.hpp"
#include "dpsom/format.hpp"

namespace dpsom::data {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return std::string(s);
}

}  // namespace

SeriesBatch load_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  const std::string where = path.string() + ":";

  std::string line;
  if (!std::getline(in, line)) throw FormatError(where + "1: missing header");
  const auto header = split_commas(line);
  if (header.size() < 3 || trim(header[0]) != "series_id" || trim(header[1]) != "t") {
    throw FormatError(where + "1: header must start with series_id,t");
  }
  const bool has_label = trim(header.back()) == "label";
  const std::size_t d = header.size() - 2 - (has_label ? 1 : 0);
  if (d == 0) throw FormatError(where + "1: no channel columns");
  for (std::size_t c = 0; c < d; ++c) {
    if (trim(header[2 + c]) != "ch_" + std::to_string(c)) {
      throw FormatError(where + "1: expected column ch_" + std::to_string(c));
    }
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::int64_t> ids;
  std::int64_t steps = -1;
  std::int64_t current_t = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string at = where + std::to_string(line_no) + ": ";
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) throw FormatError(at + "expected " + std::to_string(header.size()) + " fields");
    const auto id = parse_number(fields[0]);
    const auto t = parse_number(fields[1]);
    if (!id || !t) throw FormatError(at + "series_id and t must be integers");
    const auto sid = static_cast<std::int64_t>(*id);
    const auto step = static_cast<std::int64_t>(*t);
    if (ids.empty() || sid != ids.back()) {
      if (!ids.empty()) {
        if (sid < ids.back()) throw FormatError(at + "rows are not sorted by series_id");
        if (steps < 0) steps = current_t + 1;
        if (current_t + 1 != steps) throw FormatError(at + "series " + std::to_string(ids.back()) + " has a different length");
      }
      if (step != 0) throw FormatError(at + "series must start at t = 0");
      ids.push_back(sid);
    } else if (step != current_t + 1) {
      throw FormatError(at + "t must increase by 1 within a series");
    }
    current_t = step;
    for (std::size_t c = 0; c < d; ++c) {
      const auto v = parse_number(fields[2 + c]);
      if (!v) throw FormatError(at + "column ch_" + std::to_string(c) + " is not a number");
      values.push_back(*v);
    }
    if (has_label) {
      const auto v = parse_number(fields.back());
      if (!v || *v < 0) throw FormatError(at + "label must be a non-negative integer");
      labels.push_back(static_cast<int>(*v));
    }
  }
  if (ids.empty()) throw FormatError(where + "no data rows");
  if (steps < 0) steps = current_t + 1;
  if (current_t + 1 != steps) throw FormatError(where + "last series has a different length");

  SeriesBatch out;
  out.n_series = static_cast<Eigen::Index>(ids.size());
  out.steps = steps;
  out.x = Eigen::Map<Matrix>(values.data(), out.n_series * steps, static_cast<Eigen::Index>(d));
  out.series_ids = std::move(ids);
  if (has_label) {
    out.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    out.step_labels = std::move(labels);
  }
  out.validate();
  return out;
}

void write_series_csv(const std::filesystem::path& path, const SeriesBatch& batch) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << "series_id,t";
  for (Eigen::Index c = 0; c < batch.dim(); ++c) out << ",ch_" << c;
  if (batch.labeled()) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < batch.n_series; ++i) {
    const std::int64_t id = batch.series_ids.empty() ? i : batch.series_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < batch.steps; ++t) {
      const Eigen::Index r = i * batch.steps + t;
      out << id << ',' << t;
      for (Eigen::Index c = 0; c < batch.dim(); ++c) out << ',' << format_number(batch.x(r, c));
      if (batch.labeled()) out << ',' << batch.step_labels[static_cast<std::size_t>(r)];
      out << '\n';
    }
  }
}

}  // namespace dpsom::data
