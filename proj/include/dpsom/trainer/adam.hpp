#pragma once

#include "dpsom/ndcore/param_vector.hpp"

namespace dpsom::train {

class Adam {
 public:
  Adam(const nd::ParamVector& like, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  /// params -= lr * m_hat / (sqrt(v_hat) + eps). Throws DimensionError on a
  /// layout mismatch.
  void step(nd::ParamVector& params, const nd::ParamVector& grad);

  long steps() const noexcept { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  Vector m_, v_;
  long t_ = 0;
};

}  // namespace dpsom::train
