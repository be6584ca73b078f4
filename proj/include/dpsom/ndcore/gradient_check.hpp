#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dpsom/ndcore/param_vector.hpp"

namespace dpsom::nd {

struct BlockGradientCheck {
  std::string name;
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradientCheckReport {
  std::vector<BlockGradientCheck> blocks;
  double tolerance = 0.0;

  bool passed() const;
  double max_rel_error() const;
  const BlockGradientCheck& block(const std::string& name) const;
};

using ScalarObjective = std::function<double(const ParamVector&)>;

/// |analytic - cd| / max(|analytic|, |cd|, 1e-8)
double relative_error(double analytic, double central_difference);

/// Compares `analytic` against central differences of `f` with step `h`,
/// coordinate by coordinate, and reports the worst relative error per block.
/// Throws ConfigError if h <= 0 or the layouts differ.
GradientCheckReport check_gradient(const ScalarObjective& f, const ParamVector& params, const ParamVector& analytic,
                                   double h, double tol);

}  // namespace dpsom::nd
