#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "dpsom/ndcore/types.hpp"

namespace dpsom::som {

struct GridNode {
  int row = 0;
  int col = 0;
  bool operator==(const GridNode&) const = default;
};

/// Rectangular grid wrapped on both axes (surface of a torus). Node j sits at
/// (j / cols, j % cols).
class GridSpec {
 public:
  /// Throws ConfigError unless rows >= 2 and cols >= 2.
  GridSpec(int rows, int cols);

  /// Parses "RxC", e.g. "8x8".
  static GridSpec parse(const std::string& text);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int size() const noexcept { return rows_ * cols_; }

  GridNode node(int j) const;
  int index(GridNode n) const;
  std::string to_string() const;

  bool operator==(const GridSpec&) const = default;

 private:
  int rows_;
  int cols_;
};

/// Up, down, left, right with wraparound. On 2-wide axes the two neighbors
/// along that axis coincide, so the result is a multiset.
std::array<int, 4> neighbors(const GridSpec& spec, int j);

/// Toroidal Manhattan distance.
int grid_distance(const GridSpec& spec, int i, int j);

/// K x K matrix A with A(e, j) = multiplicity of e in neighbors(j).
Matrix neighbor_count_matrix(const GridSpec& spec);

}  // namespace dpsom::som
