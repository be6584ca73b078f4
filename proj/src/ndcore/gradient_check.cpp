#include "dpsom/ndcore/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "dpsom/errors.hpp"

namespace dpsom::nd {

bool GradientCheckReport::passed() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const auto& b) { return b.passed; });
}

double GradientCheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& b : blocks) worst = std::max(worst, b.max_rel_error);
  return worst;
}

const BlockGradientCheck& GradientCheckReport::block(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return b;
  }
  throw IndexError("no gradient-check entry for block '" + name + "'");
}

double relative_error(double analytic, double central_difference) {
  const double denom = std::max({std::abs(analytic), std::abs(central_difference), 1e-8});
  return std::abs(analytic - central_difference) / denom;
}

GradientCheckReport check_gradient(const ScalarObjective& f, const ParamVector& params, const ParamVector& analytic,
                                   double h, double tol) {
  if (!(h > 0.0)) throw ConfigError("check_gradient: step h must be positive");
  if (!params.same_layout(analytic)) throw ConfigError("check_gradient: gradient layout differs from params");

  GradientCheckReport report;
  report.tolerance = tol;
  ParamVector probe = params;
  for (const auto& name : params.names_in_storage_order()) {
    const auto& info = params.info(name);
    BlockGradientCheck entry{name, 0.0, true};
    for (Eigen::Index k = info.offset; k < info.offset + info.size(); ++k) {
      const double saved = probe.values()[k];
      probe.values()[k] = saved + h;
      const double up = f(probe);
      probe.values()[k] = saved - h;
      const double down = f(probe);
      probe.values()[k] = saved;
      const double cd = (up - down) / (2.0 * h);
      entry.max_rel_error = std::max(entry.max_rel_error, relative_error(analytic.values()[k], cd));
    }
    entry.passed = entry.max_rel_error < tol;
    report.blocks.push_back(entry);
  }
  return report;
}

}  // namespace dpsom::nd
