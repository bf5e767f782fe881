#include "estimators.hpp"

#include <cmath>

namespace smvr {

namespace {

double level_radius(const CompositionProblem& problem, int i, double radius) {
  if (radius > 0) return radius;
  const double r = problem.level(i).constants.lip_value;
  if (r <= 0) throw ConfigError("level " + std::to_string(i) + " declares no L_f radius");
  return r;
}

void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ContractError("beta must lie in [0,1]");
}

}  // namespace

Matrix project_ball(const Matrix& m, double radius) {
  if (radius <= 0) throw ContractError("projection radius must be positive");
  if (!m.allFinite()) throw ContractError("non-finite input to ball projection");
  const double norm = m.norm();
  if (norm <= radius) return m;
  return m * (radius / norm);
}

Vector storm_value_update(const Vector& u_prev, const Vector& f_new,
                          const Vector& f_old, double beta) {
  check_beta(beta);
  if (u_prev.size() != f_new.size() || f_new.size() != f_old.size()) {
    throw ContractError("storm value update: dimension mismatch");
  }
  if (beta == 1.0) return f_new;
  return (1.0 - beta) * u_prev + beta * f_new + (1.0 - beta) * (f_new - f_old);
}

Matrix storm_jacobian_update(const Matrix& v_prev, const Matrix& j_new,
                             const Matrix& j_old, double beta, double radius) {
  check_beta(beta);
  if (v_prev.rows() != j_new.rows() || v_prev.cols() != j_new.cols() ||
      j_new.rows() != j_old.rows() || j_new.cols() != j_old.cols()) {
    throw ContractError("storm jacobian update: shape mismatch");
  }
  if (beta == 1.0) return project_ball(j_new, radius);
  const Matrix pre =
      (1.0 - beta) * v_prev + beta * j_new + (1.0 - beta) * (j_new - j_old);
  return project_ball(pre, radius);
}

Vector assemble_gradient(const EstimatorStack& stack) {
  if (stack.levels.empty()) throw ContractError("empty estimator stack");
  Matrix acc = stack.levels.front().jacobian;
  for (int i = 1; i < stack.depth(); ++i) {
    const Matrix& j = stack.levels[static_cast<std::size_t>(i)].jacobian;
    if (acc.cols() != j.rows()) throw ContractError("estimator stack shapes do not chain");
    acc = acc * j;
  }
  if (acc.cols() != 1) throw ContractError("estimator stack does not terminate at dimension 1");
  return acc.col(0);
}

EstimatorStack init_stack(const CompositionProblem& problem, const Vector& w,
                          const std::vector<LevelSample>& samples, double radius) {
  if (samples.size() != static_cast<std::size_t>(problem.depth())) {
    throw ContractError("one sample per level required");
  }
  EstimatorStack stack;
  stack.input = w;
  Vector x = w;
  for (int i = 0; i < problem.depth(); ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    LevelEstimatorState st;
    st.value = problem.level(i).noisy_value(x, s);
    if (!st.value.allFinite()) throw DomainError(i, "non-finite value estimate");
    st.jacobian = project_ball(problem.level(i).noisy_jacobian(x, s),
                               level_radius(problem, i, radius));
    x = st.value;
    stack.levels.push_back(std::move(st));
  }
  return stack;
}

EstimatorStack advance_stack(const EstimatorStack& stack,
                             const CompositionProblem& problem,
                             const Vector& w_new,
                             const std::vector<LevelSample>& samples,
                             double beta, double radius) {
  check_beta(beta);
  if (stack.depth() != problem.depth() ||
      samples.size() != static_cast<std::size_t>(problem.depth())) {
    throw ContractError("stack/sample depth does not match the problem");
  }
  EstimatorStack next;
  next.input = w_new;
  Vector x_new = w_new;
  Vector x_old = stack.input;
  for (int i = 0; i < problem.depth(); ++i) {
    const auto& level = problem.level(i);
    const auto& prev = stack.levels[static_cast<std::size_t>(i)];
    const auto& s = samples[static_cast<std::size_t>(i)];
    LevelEstimatorState st;
    st.value = storm_value_update(prev.value, level.noisy_value(x_new, s),
                                  level.noisy_value(x_old, s), beta);
    if (!st.value.allFinite()) throw DomainError(i, "non-finite value estimate");
    st.jacobian = storm_jacobian_update(
        prev.jacobian, level.noisy_jacobian(x_new, s),
        level.noisy_jacobian(x_old, s), beta, level_radius(problem, i, radius));
    x_new = st.value;
    x_old = prev.value;
    next.levels.push_back(std::move(st));
  }
  return next;
}

}  // namespace smvr
