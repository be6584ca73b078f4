#include "dpsom/ndcore/random.hpp"

#include "dpsom/errors.hpp"

namespace dpsom::nd {

Matrix Rng::normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  Matrix out(rows, cols);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = dist(engine_);
  return out;
}

Vector sample_gaussian(const Vector& mean, const Vector& log_var, Rng& rng) {
  if (mean.size() != log_var.size()) {
    throw DimensionError("sample_gaussian: mean has " + std::to_string(mean.size()) + " entries, log_var has " +
                         std::to_string(log_var.size()));
  }
  Vector out(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double lv = std::clamp(log_var[i], kLogVarMin, kLogVarMax);
    out[i] = mean[i] + std::exp(0.5 * lv) * rng.normal();
  }
  return out;
}

}  // namespace dpsom::nd
