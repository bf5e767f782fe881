#ifndef SMVR_CORE_ESTIMATORS_HPP
#define SMVR_CORE_ESTIMATORS_HPP

#include "problem.hpp"

namespace smvr {

// Per-level recursive estimator pair: u tracks the level value, v the
// transposed Jacobian. After any update ||v||_F <= radius (+1e-12).
struct LevelEstimatorState {
  Vector value;     // u^i, dimension d_i
  Matrix jacobian;  // v^i, d_{i-1} x d_i
};

// Estimator states for all levels plus the anchor u^0 = w they were built at.
struct EstimatorStack {
  Vector input;  // u^0
  std::vector<LevelEstimatorState> levels;

  int depth() const { return static_cast<int>(levels.size()); }
};

// Radial projection onto the Frobenius ball of the given radius.
Matrix project_ball(const Matrix& m, double radius);

// u = (1-beta) u_prev + beta f_new + (1-beta)(f_new - f_old).
// f_new and f_old must come from the same sample.
Vector storm_value_update(const Vector& u_prev, const Vector& f_new,
                          const Vector& f_old, double beta);

// Same recursion on Jacobians, then projected onto the radius ball.
Matrix storm_jacobian_update(const Matrix& v_prev, const Matrix& j_new,
                             const Matrix& j_old, double beta, double radius);

// Chain-rule product v^1 v^2 ... v^K, a d_0 vector.
Vector assemble_gradient(const EstimatorStack& stack);

// First-iteration pass: u^i and v^i from fresh noisy evaluations, Jacobians
// projected into the ball so the norm invariant holds from step one.
// radius <= 0 means "use each level's declared L_f".
EstimatorStack init_stack(const CompositionProblem& problem, const Vector& w,
                          const std::vector<LevelSample>& samples,
                          double radius = 0);

// One recursion step: per level, both the new and the previous tracked input
// are evaluated on the level's fresh sample (2 value + 2 Jacobian oracle
// calls per level).
EstimatorStack advance_stack(const EstimatorStack& stack,
                             const CompositionProblem& problem,
                             const Vector& w_new,
                             const std::vector<LevelSample>& samples,
                             double beta, double radius = 0);

}  // namespace smvr

#endif
