#include "dpsom/somgrid/grid.hpp"

#include <algorithm>
#include <cstdlib>

#include "dpsom/errors.hpp"

namespace dpsom::som {

GridSpec::GridSpec(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 2 || cols < 2) {
    throw ConfigError("grid must be at least 2x2, got " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

GridSpec GridSpec::parse(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw ConfigError("grid '" + text + "' is not of the form RxC");
  try {
    std::size_t used_r = 0, used_c = 0;
    const int r = std::stoi(text.substr(0, x), &used_r);
    const int c = std::stoi(text.substr(x + 1), &used_c);
    if (used_r != x || used_c != text.size() - x - 1) throw ConfigError("grid '" + text + "' is not of the form RxC");
    return GridSpec(r, c);
  } catch (const std::logic_error&) {
    throw ConfigError("grid '" + text + "' is not of the form RxC");
  }
}

GridNode GridSpec::node(int j) const {
  if (j < 0 || j >= size()) throw IndexError("node " + std::to_string(j) + " outside grid " + to_string());
  return {j / cols_, j % cols_};
}

int GridSpec::index(GridNode n) const {
  if (n.row < 0 || n.row >= rows_ || n.col < 0 || n.col >= cols_) throw IndexError("grid position out of range");
  return n.row * cols_ + n.col;
}

std::string GridSpec::to_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

std::array<int, 4> neighbors(const GridSpec& spec, int j) {
  const auto [r, c] = spec.node(j);
  const int R = spec.rows();
  const int C = spec.cols();
  return {spec.index({(r + R - 1) % R, c}), spec.index({(r + 1) % R, c}), spec.index({r, (c + C - 1) % C}),
          spec.index({r, (c + 1) % C})};
}

int grid_distance(const GridSpec& spec, int i, int j) {
  const auto a = spec.node(i);
  const auto b = spec.node(j);
  const int dr = std::abs(a.row - b.row);
  const int dc = std::abs(a.col - b.col);
  return std::min(dr, spec.rows() - dr) + std::min(dc, spec.cols() - dc);
}

Matrix neighbor_count_matrix(const GridSpec& spec) {
  const int K = spec.size();
  Matrix a = Matrix::Zero(K, K);
  for (int j = 0; j < K; ++j) {
    for (int e : neighbors(spec, j)) a(e, j) += 1.0;
  }
  return a;
}

}  // namespace dpsom::som
