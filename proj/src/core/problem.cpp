#include "problem.hpp"

#include <algorithm>
#include <cmath>

namespace smvr {

void DimensionChain::validate() const {
  if (dims.size() < 2) throw ContractError("dimension chain needs at least two entries");
  for (int d : dims) {
    if (d < 1) throw ContractError("dimension chain entries must be positive");
  }
  if (dims.back() != 1) throw ContractError("dimension chain must end at 1");
}

CompositionProblem::CompositionProblem(std::vector<StochasticLevel> levels,
                                       DimensionChain chain, Vector initial_point,
                                       std::string name)
    : levels_(std::move(levels)),
      chain_(std::move(chain)),
      initial_point_(std::move(initial_point)),
      name_(std::move(name)) {
  chain_.validate();
  if (levels_.size() != static_cast<std::size_t>(chain_.depth())) {
    throw ContractError("level count does not match dimension chain");
  }
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].in_dim != chain_.dims[i] || levels_[i].out_dim != chain_.dims[i + 1]) {
      throw ContractError("level " + std::to_string(i) +
                          " dimensions violate the chain adjacency");
    }
    if (levels_[i].index_domains.empty()) {
      throw ConfigError("level " + std::to_string(i) + " has no sampling domain");
    }
    for (auto n : levels_[i].index_domains) {
      if (n < 1) throw ConfigError("level " + std::to_string(i) + " has an empty dataset");
    }
  }
  if (initial_point_.size() != chain_.dims.front()) {
    throw ContractError("initial point dimension does not match the chain");
  }
}

double CompositionProblem::lip_value() const {
  double m = 0;
  for (const auto& l : levels_) m = std::max(m, l.constants.lip_value);
  if (m <= 0) throw ConfigError("no level declares a positive L_f constant");
  return m;
}

double CompositionProblem::lip_jacobian() const {
  double m = 0;
  for (const auto& l : levels_) m = std::max(m, l.constants.lip_jacobian);
  if (m <= 0) throw ConfigError("no level declares a positive L_J constant");
  return m;
}

namespace {

void check_finite(const Vector& v, int level) {
  if (!v.allFinite()) throw DomainError(level, "non-finite level value");
}

}  // namespace

double evaluate_exact(const CompositionProblem& problem, const Vector& w) {
  if (w.size() != problem.dimension()) {
    throw ContractError("point dimension does not match the problem");
  }
  Vector x = w;
  for (int i = 0; i < problem.depth(); ++i) {
    x = problem.level(i).exact_value(x);
    check_finite(x, i);
  }
  return x(0);
}

Vector gradient_exact(const CompositionProblem& problem, const Vector& w) {
  if (w.size() != problem.dimension()) {
    throw ContractError("point dimension does not match the problem");
  }
  const int K = problem.depth();
  // forward pass
  std::vector<Vector> inputs(static_cast<std::size_t>(K));
  Vector x = w;
  for (int i = 0; i < K; ++i) {
    inputs[static_cast<std::size_t>(i)] = x;
    x = problem.level(i).exact_value(x);
    check_finite(x, i);
  }
  // left fold of transposed Jacobians
  Matrix acc = problem.level(0).exact_jacobian(inputs[0]);
  if (!acc.allFinite()) throw DomainError(0, "non-finite Jacobian");
  for (int i = 1; i < K; ++i) {
    const Matrix j = problem.level(i).exact_jacobian(inputs[static_cast<std::size_t>(i)]);
    if (!j.allFinite()) throw DomainError(i, "non-finite Jacobian");
    acc = acc * j;
  }
  return acc.col(0);
}

double smoothness_constant(const CompositionProblem& problem) {
  const double lf = problem.lip_value();
  const double lj = problem.lip_jacobian();
  const int K = problem.depth();
  double sum = 0;
  for (int i = 1; i <= K; ++i) sum += std::pow(lf, -i);
  return std::pow(lf, 2 * K - 1) * lj * sum;
}

std::vector<LevelSample> draw_samples(const CompositionProblem& problem,
                                      int batch_size, Rng& rng) {
  if (batch_size < 1) throw ContractError("batch size must be positive");
  std::vector<LevelSample> samples;
  samples.reserve(static_cast<std::size_t>(problem.depth()));
  for (int i = 0; i < problem.depth(); ++i) {
    LevelSample s;
    s.batch_size = batch_size;
    for (auto n : problem.level(i).index_domains) {
      if (batch_size <= n) {
        s.index_sets.push_back(rng.sample_without_replacement(n, batch_size));
      } else {
        std::vector<std::int32_t> idx(static_cast<std::size_t>(batch_size));
        for (auto& v : idx) v = static_cast<std::int32_t>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        s.index_sets.push_back(std::move(idx));
      }
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace smvr
