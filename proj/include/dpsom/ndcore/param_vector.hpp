#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpsom/ndcore/types.hpp"

namespace dpsom::nd {

struct BlockInfo {
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
  bool operator==(const BlockInfo&) const = default;
};

using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

/// Flat parameter storage with a named block layout. Blocks are laid out in
/// insertion order; the layout map is ordered by name.
class ParamVector {
 public:
  ParamVector() = default;

  /// Appends a zero-initialised block. Throws ConfigError on duplicate names.
  void add_block(const std::string& name, Eigen::Index rows, Eigen::Index cols);

  bool has(const std::string& name) const { return layout_.count(name) != 0; }
  const BlockInfo& info(const std::string& name) const;
  const std::map<std::string, BlockInfo>& layout() const noexcept { return layout_; }
  std::vector<std::string> names_in_storage_order() const;

  MatrixMap block(const std::string& name);
  ConstMatrixMap block(const std::string& name) const;

  Vector& values() noexcept { return values_; }
  const Vector& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }

  /// Same layout, all zeros.
  ParamVector zeros_like() const;
  bool same_layout(const ParamVector& other) const { return layout_ == other.layout_; }
  bool all_finite() const { return values_.allFinite(); }

 private:
  std::map<std::string, BlockInfo> layout_;
  Vector values_;
};

}  // namespace dpsom::nd
