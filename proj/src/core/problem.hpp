#ifndef SMVR_CORE_PROBLEM_HPP
#define SMVR_CORE_PROBLEM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace smvr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Dimension chain d_0 -> d_1 -> ... -> d_K with d_K = 1.
struct DimensionChain {
  std::vector<int> dims;

  int depth() const { return static_cast<int>(dims.size()) - 1; }
  void validate() const;
};

// One mini-batch draw for one level: one index set per sampling domain.
// Most levels have a single domain (their dataset); the grouped TERM level
// has one domain per group.
struct LevelSample {
  std::vector<std::vector<std::int32_t>> index_sets;
  int batch_size = 1;
};

struct LevelConstants {
  double lip_value = 0;       // L_f: Lipschitz bound on the level values
  double lip_jacobian = 0;    // L_J: Lipschitz bound on the Jacobians
  double sigma_value = 0;     // sigma_f: value-oracle noise bound
  double sigma_jacobian = 0;  // sigma_J: Jacobian-oracle noise bound
  double ms_lip_value = 0;    // mean-squared smoothness of the value oracle
  double ms_lip_jacobian = 0; // mean-squared smoothness of the Jacobian oracle
};

// A single stochastic level f_i: R^in_dim -> R^out_dim. Jacobians are stored
// transposed (in_dim x out_dim) so the chain-rule product folds left to right
// into a d_0 vector without per-step transposes.
struct StochasticLevel {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<std::int64_t> index_domains;  // sampling-domain sizes

  std::function<Vector(const Vector&, const LevelSample&)> noisy_value;
  std::function<Matrix(const Vector&, const LevelSample&)> noisy_jacobian;
  std::function<Vector(const Vector&)> exact_value;
  std::function<Matrix(const Vector&)> exact_jacobian;

  LevelConstants constants;
};

// Immutable multi-level composition F = f_K o ... o f_1. Shareable across
// threads; all randomness flows through explicit Rng arguments.
class CompositionProblem {
 public:
  CompositionProblem(std::vector<StochasticLevel> levels, DimensionChain chain,
                     Vector initial_point, std::string name = "");

  int depth() const { return chain_.depth(); }
  int dimension() const { return chain_.dims.front(); }
  const DimensionChain& chain() const { return chain_; }
  const std::vector<StochasticLevel>& levels() const { return levels_; }
  const StochasticLevel& level(int i) const { return levels_[static_cast<std::size_t>(i)]; }
  const Vector& initial_point() const { return initial_point_; }
  const std::string& name() const { return name_; }

  // Shared constants across levels (max of the per-level declarations).
  double lip_value() const;
  double lip_jacobian() const;

 private:
  std::vector<StochasticLevel> levels_;
  DimensionChain chain_;
  Vector initial_point_;
  std::string name_;
};

// Deterministic full-batch objective F(w).
double evaluate_exact(const CompositionProblem& problem, const Vector& w);

// Deterministic full-batch gradient via the chain rule on transposed Jacobians.
Vector gradient_exact(const CompositionProblem& problem, const Vector& w);

// L_F = L_f^{2K-1} L_J sum_{i=1..K} L_f^{-i} with shared per-level maxima.
double smoothness_constant(const CompositionProblem& problem);

// One independent mini-batch per level. Index sets are drawn uniformly
// without replacement when batch_size <= domain size, with replacement
// otherwise.
std::vector<LevelSample> draw_samples(const CompositionProblem& problem,
                                      int batch_size, Rng& rng);

}  // namespace smvr

#endif
