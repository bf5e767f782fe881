#ifndef SMVR_CORE_SCALERS_HPP
#define SMVR_CORE_SCALERS_HPP

#include <string>

#include "problem.hpp"

namespace smvr {

// Per-coordinate learning-rate scaler h_t used by the adaptive update
// w_{t+1} = w_t - eta_t * v_t / (sqrt(h_t) + delta).
//
// None keeps h identically zero, which with delta = 1 reduces the adaptive
// update to the plain one.
enum class ScalerKind { None, AdaGrad, Adam, AmsGrad, AdaBound };

ScalerKind scaler_kind_from_string(const std::string& name);
std::string to_string(ScalerKind kind);

class AdaptiveScaler {
 public:
  AdaptiveScaler(ScalerKind kind, int dim, double delta, double beta_prime = 0.1,
                 double bound_lower = 0.1, double bound_upper = 10.0);

  // Fold in the gradient estimate of iteration t (1-based).
  void update(const Vector& v, std::int64_t t);

  const Vector& h() const { return h_; }
  double delta() const { return delta_; }
  ScalerKind kind() const { return kind_; }

  // Per-coordinate step scaling 1 / (sqrt(h) + delta).
  Vector scaling() const;

 private:
  ScalerKind kind_;
  Vector h_;
  Vector h_aux_;    // h' for AMSGrad / AdaBound
  Vector sum_sq_;   // running sum for AdaGrad's 1/t mean
  double delta_;
  double beta_prime_;
  double bound_lower_;  // c_l
  double bound_upper_;  // c_u
};

}  // namespace smvr

#endif
