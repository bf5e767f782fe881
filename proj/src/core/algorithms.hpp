#ifndef SMVR_CORE_ALGORITHMS_HPP
#define SMVR_CORE_ALGORITHMS_HPP

#include <optional>
#include <utility>

#include "estimators.hpp"
#include "scalers.hpp"
#include "schedules.hpp"
#include "trace.hpp"

namespace smvr {

struct RunOptions {
  int batch = 1;
  std::int64_t trace_stride = 0;  // 0: max(1, T/500)
  double radius = 0;              // Jacobian projection radius; 0: per-level L_f
};

struct ScalerOptions {
  ScalerKind kind = ScalerKind::None;
  double delta = 1e-8;
  double beta_prime = 0.1;  // Adam/AMSGrad/AdaBound inner momentum
  double bound_lower = 0.1; // AdaBound c_l
  double bound_upper = 10;  // AdaBound c_u
};

struct SampleCounter {
  std::int64_t value_draws = 0;
  std::int64_t jacobian_draws = 0;
};

struct SmvrResult {
  // contract-bearing output: the uniformly random iterate tau
  Vector w_tau;
  EstimatorStack stack_tau;
  std::int64_t tau = 0;
  // practical extras, reported alongside
  Vector w_final;
  EstimatorStack stack_final;
  Vector w_best;
  double best_loss = 0;
  SampleCounter samples;
  RunTrace trace;
};

struct StagewiseResult {
  Vector w_out;  // random iterate of the last stage
  EstimatorStack stack_out;
  SampleCounter samples;
  RunTrace trace;
};

// Algorithm: nested STORM estimators with ball-projected Jacobians and plain
// descent steps; returns the state at a uniformly drawn iterate.
SmvrResult smvr_run(const CompositionProblem& problem, const SmvrSchedule& schedule,
                    std::int64_t T, std::uint64_t seed, const RunOptions& opts = {});

// SMVR with caller-supplied eta/beta rules (constant schedules, grids).
SmvrResult smvr_run_custom(const CompositionProblem& problem,
                           const std::function<double(std::int64_t)>& eta,
                           const std::function<double(std::int64_t)>& beta,
                           std::int64_t T, std::uint64_t seed,
                           const RunOptions& opts = {},
                           const std::string& label = "smvr");

// Same loop with the per-coordinate scaled update
// w_{t+1} = w_t - eta_t v_t / (sqrt(h_t) + delta).
SmvrResult adaptive_smvr_run(const CompositionProblem& problem,
                             const SmvrSchedule& schedule,
                             const ScalerOptions& scaler, std::int64_t T,
                             std::uint64_t seed, const RunOptions& opts = {});

SmvrResult adaptive_smvr_run_custom(const CompositionProblem& problem,
                                    const std::function<double(std::int64_t)>& eta,
                                    const std::function<double(std::int64_t)>& beta,
                                    const ScalerOptions& scaler, std::int64_t T,
                                    std::uint64_t seed, const RunOptions& opts = {},
                                    const std::string& label = "");

// Restarted variant: stage s runs for T_s iterations at constant
// (eta_s, beta_s), warm-starting (w, u, v) from the previous stage's random
// iterate; estimator state is never re-initialized after stage one.
// Requires eta_1 * L_F <= 1/2 for the problem's smoothness constant.
StagewiseResult stagewise_run(const CompositionProblem& problem,
                              const StageSchedule& schedule, std::uint64_t seed,
                              const RunOptions& opts = {});

// OLS slope of log ||grad|| against log t over evaluated records with
// t in [t_lo, t_hi]. Needs at least 10 points with positive gradient norm.
double estimate_rate_exponent(const RunTrace& trace, std::int64_t t_lo,
                              std::int64_t t_hi);

// Same regression on raw (t, grad_norm) points (e.g. a seed-averaged curve).
double rate_exponent_from_points(const std::vector<std::pair<double, double>>& pts);

}  // namespace smvr

#endif
