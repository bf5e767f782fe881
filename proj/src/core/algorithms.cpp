#include "algorithms.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace smvr {

namespace {

std::int64_t effective_stride(std::int64_t stride, std::int64_t T) {
  if (stride > 0) return stride;
  return std::max<std::int64_t>(1, T / 500);
}

struct LoopOutput {
  Vector w_tau;
  EstimatorStack stack_tau;
  std::int64_t tau = 0;
  Vector w_final;
  EstimatorStack stack_final;
  Vector w_best;
  double best_loss = std::numeric_limits<double>::infinity();
};

// Shared inner loop for SMVR, Adaptive SMVR and the stage-wise stages.
// t_offset shifts the global iteration numbering in the trace; warm, when
// present, continues the estimator recursion instead of re-initializing.
LoopOutput run_loop(const CompositionProblem& problem,
                    const std::function<double(std::int64_t)>& eta_fn,
                    const std::function<double(std::int64_t)>& beta_fn,
                    std::int64_t T, std::int64_t t_offset, int batch, Rng& rng,
                    std::int64_t stride, Vector w,
                    std::optional<EstimatorStack> warm, AdaptiveScaler* scaler,
                    double radius, RunTrace& trace, SampleCounter& counter) {
  if (T < 1) throw ContractError("iteration budget T must be positive");
  if (batch < 1) throw ContractError("batch size must be positive");
  const int K = problem.depth();

  LoopOutput out;
  const std::int64_t tau = 1 + static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(T)));
  EstimatorStack stack;

  for (std::int64_t t = 1; t <= T; ++t) {
    const auto samples = draw_samples(problem, batch, rng);
    const double beta = beta_fn(t);
    if (t == 1 && !warm) {
      stack = init_stack(problem, w, samples, radius);
      counter.value_draws += static_cast<std::int64_t>(K) * batch;
      counter.jacobian_draws += static_cast<std::int64_t>(K) * batch;
    } else {
      if (t == 1) stack = std::move(*warm);
      stack = advance_stack(stack, problem, w, samples, beta, radius);
      counter.value_draws += 2LL * K * batch;
      counter.jacobian_draws += 2LL * K * batch;
    }
    const Vector grad_est = assemble_gradient(stack);
    const double eta = eta_fn(t);

    if ((t - 1) % stride == 0 || t == T) {
      TraceRecord rec;
      rec.iteration = t_offset + t;
      rec.samples = counter.value_draws;
      rec.loss = evaluate_exact(problem, w);
      rec.grad_norm = gradient_exact(problem, w).norm();
      rec.eta = eta;
      rec.beta = beta;
      trace.records.push_back(rec);
      if (rec.loss < out.best_loss) {
        out.best_loss = rec.loss;
        out.w_best = w;
      }
    }
    if (t == tau) {
      out.w_tau = w;
      out.stack_tau = stack;
      out.tau = t_offset + tau;
    }

    if (scaler) {
      scaler->update(grad_est, t_offset + t);
      w -= eta * grad_est.cwiseProduct(scaler->scaling());
    } else {
      w -= eta * grad_est;
    }
  }
  out.w_final = w;
  out.stack_final = std::move(stack);
  return out;
}

SmvrResult finish(LoopOutput&& loop, SampleCounter counter, RunTrace&& trace) {
  SmvrResult res;
  res.w_tau = std::move(loop.w_tau);
  res.stack_tau = std::move(loop.stack_tau);
  res.tau = loop.tau;
  res.w_final = std::move(loop.w_final);
  res.stack_final = std::move(loop.stack_final);
  res.w_best = std::move(loop.w_best);
  res.best_loss = loop.best_loss;
  res.samples = counter;
  res.trace = std::move(trace);
  return res;
}

}  // namespace

SmvrResult smvr_run(const CompositionProblem& problem, const SmvrSchedule& schedule,
                    std::int64_t T, std::uint64_t seed, const RunOptions& opts) {
  Rng rng(seed);
  RunTrace trace;
  trace.algorithm = "smvr";
  trace.seed = seed;
  SampleCounter counter;
  auto loop = run_loop(
      problem, [&](std::int64_t t) { return schedule.eta(t); },
      [&](std::int64_t t) { return schedule.beta(t); }, T, 0, opts.batch, rng,
      effective_stride(opts.trace_stride, T), problem.initial_point(),
      std::nullopt, nullptr, opts.radius, trace, counter);
  return finish(std::move(loop), counter, std::move(trace));
}

SmvrResult smvr_run_custom(const CompositionProblem& problem,
                           const std::function<double(std::int64_t)>& eta,
                           const std::function<double(std::int64_t)>& beta,
                           std::int64_t T, std::uint64_t seed,
                           const RunOptions& opts, const std::string& label) {
  Rng rng(seed);
  RunTrace trace;
  trace.algorithm = label;
  trace.seed = seed;
  SampleCounter counter;
  auto loop = run_loop(problem, eta, beta, T, 0, opts.batch, rng,
                       effective_stride(opts.trace_stride, T),
                       problem.initial_point(), std::nullopt, nullptr,
                       opts.radius, trace, counter);
  return finish(std::move(loop), counter, std::move(trace));
}

SmvrResult adaptive_smvr_run_custom(const CompositionProblem& problem,
                                    const std::function<double(std::int64_t)>& eta,
                                    const std::function<double(std::int64_t)>& beta,
                                    const ScalerOptions& scaler_opts, std::int64_t T,
                                    std::uint64_t seed, const RunOptions& opts,
                                    const std::string& label) {
  Rng rng(seed);
  RunTrace trace;
  trace.algorithm = label.empty() ? "smvr_" + to_string(scaler_opts.kind) : label;
  trace.seed = seed;
  SampleCounter counter;
  AdaptiveScaler scaler(scaler_opts.kind, problem.dimension(), scaler_opts.delta,
                        scaler_opts.beta_prime, scaler_opts.bound_lower,
                        scaler_opts.bound_upper);
  auto loop = run_loop(problem, eta, beta, T, 0, opts.batch, rng,
                       effective_stride(opts.trace_stride, T),
                       problem.initial_point(), std::nullopt, &scaler,
                       opts.radius, trace, counter);
  return finish(std::move(loop), counter, std::move(trace));
}

SmvrResult adaptive_smvr_run(const CompositionProblem& problem,
                             const SmvrSchedule& schedule,
                             const ScalerOptions& scaler_opts, std::int64_t T,
                             std::uint64_t seed, const RunOptions& opts) {
  Rng rng(seed);
  RunTrace trace;
  trace.algorithm = "smvr_" + to_string(scaler_opts.kind);
  trace.seed = seed;
  SampleCounter counter;
  AdaptiveScaler scaler(scaler_opts.kind, problem.dimension(), scaler_opts.delta,
                        scaler_opts.beta_prime, scaler_opts.bound_lower,
                        scaler_opts.bound_upper);
  auto loop = run_loop(
      problem, [&](std::int64_t t) { return schedule.eta(t); },
      [&](std::int64_t t) { return schedule.beta(t); }, T, 0, opts.batch, rng,
      effective_stride(opts.trace_stride, T), problem.initial_point(),
      std::nullopt, &scaler, opts.radius, trace, counter);
  return finish(std::move(loop), counter, std::move(trace));
}

StagewiseResult stagewise_run(const CompositionProblem& problem,
                              const StageSchedule& schedule, std::uint64_t seed,
                              const RunOptions& opts) {
  const double lf_smooth = smoothness_constant(problem);
  if (schedule.eta(1) * lf_smooth > 0.5 + 1e-12) {
    throw ContractError("stage schedule violates eta_1 * L_F <= 1/2");
  }
  Rng rng(seed);
  RunTrace trace;
  trace.algorithm = "smvr_stagewise";
  trace.seed = seed;
  SampleCounter counter;

  StagewiseResult res;
  Vector w = problem.initial_point();
  std::optional<EstimatorStack> warm;
  std::int64_t t_offset = 0;
  std::int64_t total = 0;
  for (int s = 1; s <= schedule.num_stages; ++s) total += schedule.stage_length(s);
  const std::int64_t stride = effective_stride(opts.trace_stride, total);

  for (int s = 1; s <= schedule.num_stages; ++s) {
    const double eta_s = schedule.eta(s);
    const double beta_s = schedule.beta(s);
    const std::int64_t len = schedule.stage_length(s);
    auto loop = run_loop(
        problem, [=](std::int64_t) { return eta_s; },
        [=](std::int64_t) { return beta_s; }, len, t_offset, opts.batch, rng,
        stride, w, std::move(warm), nullptr, opts.radius, trace, counter);
    // restart from the stage's random iterate, estimators included
    w = loop.w_tau;
    warm = std::move(loop.stack_tau);
    t_offset += len;
    trace.stage_ends.push_back(t_offset);
  }
  res.w_out = w;
  res.stack_out = std::move(*warm);
  res.samples = counter;
  res.trace = std::move(trace);
  return res;
}

double rate_exponent_from_points(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 10) throw ContractError("rate regression needs at least 10 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [t, g] : pts) {
    if (!(t > 0) || !(g > 0)) throw ContractError("rate regression needs positive (t, grad) points");
    const double x = std::log(t);
    const double y = std::log(g);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0) throw ContractError("degenerate abscissae in rate regression");
  return (n * sxy - sx * sy) / denom;
}

double estimate_rate_exponent(const RunTrace& trace, std::int64_t t_lo,
                              std::int64_t t_hi) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& rec : trace.records) {
    if (rec.iteration >= t_lo && rec.iteration <= t_hi && rec.grad_norm > 0) {
      pts.emplace_back(static_cast<double>(rec.iteration), rec.grad_norm);
    }
  }
  return rate_exponent_from_points(pts);
}

}  // namespace smvr
