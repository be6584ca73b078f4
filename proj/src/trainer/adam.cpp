#include "dpsom/trainer/adam.hpp"

#include <cmath>

#include "dpsom/errors.hpp"

namespace dpsom::train {

Adam::Adam(const nd::ParamVector& like, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(Vector::Zero(like.size())),
      v_(Vector::Zero(like.size())) {}

void Adam::step(nd::ParamVector& params, const nd::ParamVector& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw DimensionError("Adam: size mismatch");
  ++t_;
  const Vector& g = grad.values();
  m_ = beta1_ * m_ + (1.0 - beta1_) * g;
  v_ = beta2_ * v_ + (1.0 - beta2_) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.values().array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

}  // namespace dpsom::train
