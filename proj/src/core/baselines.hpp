#ifndef SMVR_CORE_BASELINES_HPP
#define SMVR_CORE_BASELINES_HPP

#include <functional>

#include "algorithms.hpp"

namespace smvr {

using ScheduleFn = std::function<double(std::int64_t)>;

struct BaselineResult {
  Vector w_final;
  SampleCounter samples;
  RunTrace trace;
};

// Plug-in nested SGD: fresh noisy forward pass, fresh Jacobians at the noisy
// points, chain-rule product, plain descent. No estimator memory; the
// resulting gradient estimate is biased on curved compositions.
BaselineResult nested_sgd_run(const CompositionProblem& problem,
                              const ScheduleFn& eta, std::int64_t T,
                              std::uint64_t seed, const RunOptions& opts = {});

// SCSC-style value tracking: level values follow the same-sample momentum
// recursion, Jacobians are fresh draws at the tracked values each iteration
// (no Jacobian recursion, no projection). Reconstructed from a one-sentence
// description; an approximation, not the original algorithm.
BaselineResult scsc_style_run(const CompositionProblem& problem,
                              const ScheduleFn& eta, const ScheduleFn& beta,
                              std::int64_t T, std::uint64_t seed,
                              const RunOptions& opts = {});

// Single plug-in gradient sample at a fixed point (the estimator nested SGD
// descends on); exposed for bias measurements.
Vector plugin_gradient_sample(const CompositionProblem& problem, const Vector& w,
                              int batch, Rng& rng);

}  // namespace smvr

#endif
