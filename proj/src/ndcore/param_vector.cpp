#include "dpsom/ndcore/param_vector.hpp"

#include <algorithm>

#include "dpsom/errors.hpp"

namespace dpsom::nd {

void ParamVector::add_block(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  if (rows <= 0 || cols <= 0) throw ConfigError("parameter block '" + name + "' has an empty shape");
  if (has(name)) throw ConfigError("duplicate parameter block '" + name + "'");
  BlockInfo info{values_.size(), rows, cols};
  layout_.emplace(name, info);
  values_.conservativeResize(values_.size() + info.size());
  values_.tail(info.size()).setZero();
}

const BlockInfo& ParamVector::info(const std::string& name) const {
  auto it = layout_.find(name);
  if (it == layout_.end()) throw IndexError("unknown parameter block '" + name + "'");
  return it->second;
}

std::vector<std::string> ParamVector::names_in_storage_order() const {
  std::vector<std::string> names;
  names.reserve(layout_.size());
  for (const auto& [name, _] : layout_) names.push_back(name);
  std::sort(names.begin(), names.end(),
            [&](const auto& a, const auto& b) { return layout_.at(a).offset < layout_.at(b).offset; });
  return names;
}

MatrixMap ParamVector::block(const std::string& name) {
  const auto& b = info(name);
  return MatrixMap(values_.data() + b.offset, b.rows, b.cols);
}

ConstMatrixMap ParamVector::block(const std::string& name) const {
  const auto& b = info(name);
  return ConstMatrixMap(values_.data() + b.offset, b.rows, b.cols);
}

ParamVector ParamVector::zeros_like() const {
  ParamVector out;
  out.layout_ = layout_;
  out.values_ = Vector::Zero(values_.size());
  return out;
}

}  // namespace dpsom::nd
