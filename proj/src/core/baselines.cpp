#include "baselines.hpp"

namespace smvr {

namespace {

std::int64_t effective_stride(std::int64_t stride, std::int64_t T) {
  if (stride > 0) return stride;
  return std::max<std::int64_t>(1, T / 500);
}

void record(RunTrace& trace, const CompositionProblem& problem, const Vector& w,
            std::int64_t t, std::int64_t samples, double eta, double beta) {
  TraceRecord rec;
  rec.iteration = t;
  rec.samples = samples;
  rec.loss = evaluate_exact(problem, w);
  rec.grad_norm = gradient_exact(problem, w).norm();
  rec.eta = eta;
  rec.beta = beta;
  trace.records.push_back(rec);
}

Vector plugin_gradient(const CompositionProblem& problem, const Vector& w,
                       const std::vector<LevelSample>& samples) {
  const int K = problem.depth();
  Vector x = w;
  Matrix acc;
  for (int i = 0; i < K; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    const Matrix j = problem.level(i).noisy_jacobian(x, s);
    if (!j.allFinite()) throw DomainError(i, "non-finite Jacobian sample");
    acc = (i == 0) ? j : Matrix(acc * j);
    x = problem.level(i).noisy_value(x, s);
    if (!x.allFinite()) throw DomainError(i, "non-finite value sample");
  }
  return acc.col(0);
}

}  // namespace

Vector plugin_gradient_sample(const CompositionProblem& problem, const Vector& w,
                              int batch, Rng& rng) {
  return plugin_gradient(problem, w, draw_samples(problem, batch, rng));
}

BaselineResult nested_sgd_run(const CompositionProblem& problem,
                              const ScheduleFn& eta, std::int64_t T,
                              std::uint64_t seed, const RunOptions& opts) {
  if (T < 1) throw ContractError("iteration budget T must be positive");
  Rng rng(seed);
  BaselineResult res;
  res.trace.algorithm = "nested_sgd";
  res.trace.seed = seed;
  const std::int64_t stride = effective_stride(opts.trace_stride, T);
  const int K = problem.depth();
  Vector w = problem.initial_point();
  for (std::int64_t t = 1; t <= T; ++t) {
    const auto samples = draw_samples(problem, opts.batch, rng);
    res.samples.value_draws += static_cast<std::int64_t>(K) * opts.batch;
    res.samples.jacobian_draws += static_cast<std::int64_t>(K) * opts.batch;
    const Vector g = plugin_gradient(problem, w, samples);
    const double step = eta(t);
    if ((t - 1) % stride == 0 || t == T) {
      record(res.trace, problem, w, t, res.samples.value_draws, step, 0);
    }
    w -= step * g;
  }
  res.w_final = std::move(w);
  return res;
}

BaselineResult scsc_style_run(const CompositionProblem& problem,
                              const ScheduleFn& eta, const ScheduleFn& beta,
                              std::int64_t T, std::uint64_t seed,
                              const RunOptions& opts) {
  if (T < 1) throw ContractError("iteration budget T must be positive");
  Rng rng(seed);
  BaselineResult res;
  res.trace.algorithm = "scsc_style";
  res.trace.seed = seed;
  const std::int64_t stride = effective_stride(opts.trace_stride, T);
  const int K = problem.depth();
  Vector w = problem.initial_point();
  std::vector<Vector> tracked(static_cast<std::size_t>(K));
  std::vector<Vector> tracked_prev(static_cast<std::size_t>(K));
  Vector w_prev;
  for (std::int64_t t = 1; t <= T; ++t) {
    const auto samples = draw_samples(problem, opts.batch, rng);
    const double b = beta(t);
    Matrix acc;
    Vector x_new = w;
    Vector x_old = w_prev;
    for (int i = 0; i < K; ++i) {
      const auto& level = problem.level(i);
      const auto& s = samples[static_cast<std::size_t>(i)];
      Vector u;
      if (t == 1) {
        u = level.noisy_value(x_new, s);
        res.samples.value_draws += opts.batch;
      } else {
        u = storm_value_update(tracked_prev[static_cast<std::size_t>(i)],
                               level.noisy_value(x_new, s),
                               level.noisy_value(x_old, s), b);
        res.samples.value_draws += 2LL * opts.batch;
      }
      if (!u.allFinite()) throw DomainError(i, "non-finite value estimate");
      const Matrix j = level.noisy_jacobian(x_new, s);
      if (!j.allFinite()) throw DomainError(i, "non-finite Jacobian sample");
      res.samples.jacobian_draws += opts.batch;
      acc = (i == 0) ? j : Matrix(acc * j);
      x_old = (t == 1) ? u : tracked_prev[static_cast<std::size_t>(i)];
      tracked[static_cast<std::size_t>(i)] = std::move(u);
      x_new = tracked[static_cast<std::size_t>(i)];
    }
    const Vector g = acc.col(0);
    const double step = eta(t);
    if ((t - 1) % stride == 0 || t == T) {
      record(res.trace, problem, w, t, res.samples.value_draws, step, b);
    }
    w_prev = w;
    w -= step * g;
    tracked_prev = tracked;
  }
  res.w_final = std::move(w);
  return res;
}

}  // namespace smvr
