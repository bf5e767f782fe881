#ifndef SMVR_CORE_SCHEDULES_HPP
#define SMVR_CORE_SCHEDULES_HPP

#include <cmath>
#include <cstdint>
#include <functional>

#include "errors.hpp"

namespace smvr {

// Polynomially decaying step rule eta_t = eta_scale * (a+t)^{-1/3} with
// momentum beta_t = c * base(t-1)^2, where base is the unscaled decay.
// beta_1 = c * a^{-2/3} must not exceed 1; later betas are clamped to 1
// defensively but the construction check makes that unreachable for a >= 2.
struct SmvrSchedule {
  double c = 1;
  double a = 8;
  double eta_scale = 1;

  SmvrSchedule(double c_, double a_, double eta_scale_ = 1)
      : c(c_), a(a_), eta_scale(eta_scale_) {
    if (c <= 0) throw ContractError("schedule constant c must be positive");
    if (a < 2) throw ContractError("schedule constant a must be at least 2");
    if (eta_scale <= 0) throw ContractError("eta scale must be positive");
    if (c * std::pow(a, -2.0 / 3.0) > 1.0 + 1e-12) {
      throw ContractError("schedule yields beta_1 > 1 (c * a^{-2/3} must be <= 1)");
    }
  }

  double base(std::int64_t t) const { return std::pow(a + static_cast<double>(t), -1.0 / 3.0); }
  double eta(std::int64_t t) const { return eta_scale * base(t); }
  double beta(std::int64_t t) const {
    const double b = c * base(t - 1) * base(t - 1);
    return b > 1.0 ? 1.0 : b;
  }

  // Analysis-grade constants in terms of the aggregate constant L_1.
  static SmvrSchedule theoretical(double l1) {
    if (l1 <= 0) throw ContractError("L_1 must be positive");
    return SmvrSchedule(10.0 * l1 * l1, std::pow(20.0 * l1 * l1 * l1, 1.5));
  }

  // Practical constants: pick c so that beta_1 hits the requested value.
  static SmvrSchedule practical(double beta1, double a = 8, double eta_scale = 1) {
    if (!(beta1 > 0 && beta1 <= 1)) throw ContractError("beta_1 must lie in (0,1]");
    return SmvrSchedule(beta1 * std::pow(a, 2.0 / 3.0), a, eta_scale);
  }
};

// Geometric stage rule: beta_s = beta_1 / rho^{s-1}, T_s = T_1 * rho^{s-1},
// eta_s = sqrt(beta_s / c), held constant within a stage.
struct StageSchedule {
  double beta1 = 0.5;
  std::int64_t t1 = 100;
  double c = 16;
  double rho = 2;
  int num_stages = 4;

  StageSchedule(double beta1_, std::int64_t t1_, double c_, int num_stages_,
                double rho_ = 2)
      : beta1(beta1_), t1(t1_), c(c_), rho(rho_), num_stages(num_stages_) {
    if (!(beta1 > 0 && beta1 <= 1)) throw ContractError("beta_1 must lie in (0,1]");
    if (t1 < 1) throw ContractError("T_1 must be positive");
    if (c <= 0) throw ContractError("stage constant c must be positive");
    if (rho <= 1) throw ContractError("halving factor rho must exceed 1");
    if (num_stages < 1) throw ContractError("need at least one stage");
  }

  double beta(int s) const { return beta1 / std::pow(rho, s - 1); }
  std::int64_t stage_length(int s) const {
    return static_cast<std::int64_t>(std::llround(static_cast<double>(t1) * std::pow(rho, s - 1)));
  }
  double eta(int s) const { return std::sqrt(beta(s) / c); }
};

}  // namespace smvr

#endif
