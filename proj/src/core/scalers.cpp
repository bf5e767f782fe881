#include "scalers.hpp"

namespace smvr {

ScalerKind scaler_kind_from_string(const std::string& name) {
  if (name == "none") return ScalerKind::None;
  if (name == "adagrad") return ScalerKind::AdaGrad;
  if (name == "adam") return ScalerKind::Adam;
  if (name == "amsgrad") return ScalerKind::AmsGrad;
  if (name == "adabound") return ScalerKind::AdaBound;
  throw ConfigError("unknown scaler kind: " + name);
}

std::string to_string(ScalerKind kind) {
  switch (kind) {
    case ScalerKind::None: return "none";
    case ScalerKind::AdaGrad: return "adagrad";
    case ScalerKind::Adam: return "adam";
    case ScalerKind::AmsGrad: return "amsgrad";
    case ScalerKind::AdaBound: return "adabound";
  }
  return "none";
}

AdaptiveScaler::AdaptiveScaler(ScalerKind kind, int dim, double delta,
                               double beta_prime, double bound_lower,
                               double bound_upper)
    : kind_(kind),
      h_(Vector::Zero(dim)),
      h_aux_(Vector::Zero(dim)),
      sum_sq_(Vector::Zero(dim)),
      delta_(delta),
      beta_prime_(beta_prime),
      bound_lower_(bound_lower),
      bound_upper_(bound_upper) {
  if (dim < 1) throw ContractError("scaler dimension must be positive");
  if (delta <= 0) throw ContractError("delta must be positive");
  if (!(beta_prime > 0 && beta_prime <= 1)) throw ContractError("beta' must lie in (0,1]");
  if (kind == ScalerKind::AdaBound) {
    if (!(bound_lower > 0 && bound_lower <= bound_upper)) {
      throw ContractError("AdaBound requires 0 < c_l <= c_u");
    }
  }
}

void AdaptiveScaler::update(const Vector& v, std::int64_t t) {
  if (v.size() != h_.size()) throw ContractError("scaler dimension mismatch");
  if (t < 1) throw ContractError("iteration index must be 1-based");
  const Vector sq = v.array().square();
  switch (kind_) {
    case ScalerKind::None:
      break;
    case ScalerKind::AdaGrad:
      sum_sq_ += sq;
      h_ = sum_sq_ / static_cast<double>(t);
      break;
    case ScalerKind::Adam:
      h_ = (1.0 - beta_prime_) * h_ + beta_prime_ * sq;
      break;
    case ScalerKind::AmsGrad:
      h_aux_ = (1.0 - beta_prime_) * h_aux_ + beta_prime_ * sq;
      h_ = h_.cwiseMax(h_aux_);
      break;
    case ScalerKind::AdaBound: {
      h_aux_ = (1.0 - beta_prime_) * h_aux_ + beta_prime_ * sq;
      const double lo = 1.0 / (bound_upper_ * bound_upper_);
      const double hi = 1.0 / (bound_lower_ * bound_lower_);
      h_ = h_aux_.cwiseMax(lo).cwiseMin(hi);
      break;
    }
  }
}

Vector AdaptiveScaler::scaling() const {
  return (h_.array().sqrt() + delta_).inverse();
}

}  // namespace smvr
