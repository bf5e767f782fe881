#ifndef SMVR_CORE_PROBLEMS_HPP
#define SMVR_CORE_PROBLEMS_HPP

#include <atomic>
#include <memory>

#include "problem.hpp"

namespace smvr {

// ---------------------------------------------------------------------------
// Synthetic strongly convex composition: affine levels with additive centered
// noise drawn from a finite dataset, quadratic top level, known minimizer.
// ---------------------------------------------------------------------------

struct SyntheticOptions {
  std::vector<int> dims;      // d_0 ... d_K, d_K = 1; level K is the quadratic
  double sigma_value = 0.1;   // target per-draw value-noise scale
  double sigma_jacobian = 0.1;
  std::uint64_t seed = 1;
  int dataset_size = 256;     // finite noise population per level
  double init_offset = 2.0;   // ||w_1 - w*||
  bool orthonormal = true;    // draw affine maps with unit singular values
  double radius_margin = 2.0; // headroom on the declared L_f radius
};

struct SyntheticCertificate {
  Vector w_star;
  double f_star = 0;
  double mu = 0;              // smallest eigenvalue of the composed Hessian
  bool strongly_convex = false;
  double smoothness = 0;      // L_F from the declared constants
};

struct SyntheticProblem {
  std::shared_ptr<const CompositionProblem> problem;
  SyntheticCertificate certificate;
};

SyntheticProblem build_synthetic(const SyntheticOptions& options);

// ---------------------------------------------------------------------------
// Mean-deviation risk-averse portfolio selection, three levels:
// f1(x) = (mean <r,x>, x), f2(y,x) = (y, mean (<r,x>-y)^2),
// f3(z1,z2) = -z1 + lambda sqrt(z2 + eps).
// ---------------------------------------------------------------------------

struct PortfolioOptions {
  double lambda = 0.2;
  double eps_guard = 1e-8;   // perturbation under the square root
  double radius = 100;       // declared L_f (the projection radius)
  std::uint64_t seed = 1;    // initial-point draw
};

struct PortfolioProblem {
  std::shared_ptr<const CompositionProblem> problem;
  double lambda = 0;
  double eps_guard = 0;
};

// returns: periods x assets matrix of fractional per-period returns
PortfolioProblem build_portfolio(const Matrix& returns, const PortfolioOptions& options = {});

// ---------------------------------------------------------------------------
// Hierarchical tilted ERM over per-class groups, four levels:
// f1(w) = per-group mean of e^{tau * loss}, f2 = (1/tau) log coordinatewise,
// f3(y) = (1/|D|) sum_G |G| e^{t y_G}, f4(z) = (1/t) log z.
// Loss is the logistic loss of a linear model; labels are +-1.
// ---------------------------------------------------------------------------

struct ClassGroup {
  Matrix features;  // n x p
  Vector labels;    // entries in {-1, +1}
};

struct TermOptions {
  double inner_tilt = -2;   // tau, < 0 suppresses outliers
  double outer_tilt = 10;   // t, > 0 emphasizes the rare class
  double exp_clamp = 50;    // stochastic-path exponent clamp
  double radius = 100;
  std::uint64_t seed = 1;
};

struct TermProblem {
  std::shared_ptr<const CompositionProblem> problem;
  // stochastic-path guard activations (clamped exponent or floored log)
  std::shared_ptr<std::atomic<std::int64_t>> guard_events;
};

TermProblem build_hierarchical_term(const std::vector<ClassGroup>& groups,
                                    const TermOptions& options = {});

// Logistic loss of a linear model on a single sample, shared with tests.
double logistic_loss(const Vector& w, const Vector& x, double label);

}  // namespace smvr

#endif
