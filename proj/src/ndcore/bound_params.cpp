#include "dpsom/ndcore/bound_params.hpp"

#include "dpsom/errors.hpp"

namespace dpsom::nd {

BoundParams::BoundParams(Tape& tape, const ParamVector& params, const Filter& trainable) {
  for (const auto& [name, _] : params.layout()) {
    Matrix value = params.block(name);
    const bool train = !trainable || trainable(name);
    vars_.emplace(name, train ? tape.variable(std::move(value)) : tape.constant(std::move(value)));
  }
}

const Var& BoundParams::operator[](const std::string& name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) throw IndexError("parameter block '" + name + "' is not bound");
  return it->second;
}

void BoundParams::collect_gradient(ParamVector& grad) const {
  for (const auto& [name, var] : vars_) {
    auto dst = grad.block(name);
    if (var.requires_grad()) {
      dst = var.tape().grad(var);
    } else {
      dst.setZero();
    }
  }
}

BoundParams::Filter prefix_filter(std::vector<std::string> prefixes) {
  return [prefixes = std::move(prefixes)](const std::string& name) {
    for (const auto& p : prefixes) {
      if (name.rfind(p, 0) == 0) return true;
    }
    return false;
  };
}

}  // namespace dpsom::nd
