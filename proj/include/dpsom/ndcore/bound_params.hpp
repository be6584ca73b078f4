#pragma once

#include <functional>
#include <map>
#include <string>

#include "dpsom/ndcore/param_vector.hpp"
#include "dpsom/ndcore/tape.hpp"

namespace dpsom::nd {

/// Parameter blocks placed on a tape: trainable blocks as variables, the rest
/// as constants.
class BoundParams {
 public:
  using Filter = std::function<bool(const std::string& block)>;

  /// Binds every block; `trainable` (or all, when empty) become variables.
  BoundParams(Tape& tape, const ParamVector& params, const Filter& trainable = {});

  const Var& operator[](const std::string& name) const;
  bool has(const std::string& name) const { return vars_.count(name) != 0; }

  /// Writes the tape gradients of all variables into `grad` (same layout as
  /// the bound params); constant blocks are zeroed.
  void collect_gradient(ParamVector& grad) const;

 private:
  std::map<std::string, Var> vars_;
};

/// Filter accepting blocks whose name starts with one of `prefixes`.
BoundParams::Filter prefix_filter(std::vector<std::string> prefixes);

}  // namespace dpsom::nd
