#include "problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smvr {

namespace {

// ---- synthetic --------------------------------------------------------

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.gaussian();
  return m;
}

// Matrix with unit singular values (orthonormal columns when rows >= cols,
// orthonormal rows otherwise).
Matrix orthonormal_matrix(int rows, int cols, Rng& rng) {
  if (rows >= cols) {
    const Matrix g = random_matrix(rows, cols, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
    return q;
  }
  const Matrix g = random_matrix(cols, rows, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(cols, rows);
  return q.transpose();
}

struct NoiseSet {
  std::vector<Vector> values;     // centered, one per datum
  std::vector<Matrix> jacobians;  // centered, one per datum
  double sigma_value = 0;         // exact sqrt(mean ||eps||^2)
  double sigma_jacobian = 0;
};

NoiseSet make_noise(int in_dim, int out_dim, int n, double sv, double sj, Rng& rng) {
  NoiseSet set;
  set.values.reserve(static_cast<std::size_t>(n));
  set.jacobians.reserve(static_cast<std::size_t>(n));
  const double value_scale = sv / std::sqrt(static_cast<double>(out_dim));
  const double jac_scale = sj / std::sqrt(static_cast<double>(in_dim * out_dim));
  Vector vmean = Vector::Zero(out_dim);
  Matrix jmean = Matrix::Zero(in_dim, out_dim);
  for (int k = 0; k < n; ++k) {
    Vector v(out_dim);
    for (int i = 0; i < out_dim; ++i) v(i) = value_scale * rng.gaussian();
    Matrix j(in_dim, out_dim);
    for (int c = 0; c < out_dim; ++c)
      for (int r = 0; r < in_dim; ++r) j(r, c) = jac_scale * rng.gaussian();
    vmean += v;
    jmean += j;
    set.values.push_back(std::move(v));
    set.jacobians.push_back(std::move(j));
  }
  vmean /= n;
  jmean /= n;
  // center so the finite-population mean is exactly zero
  for (auto& v : set.values) v -= vmean;
  for (auto& j : set.jacobians) j -= jmean;
  double sv2 = 0, sj2 = 0;
  for (const auto& v : set.values) sv2 += v.squaredNorm();
  for (const auto& j : set.jacobians) sj2 += j.squaredNorm();
  set.sigma_value = std::sqrt(sv2 / n);
  set.sigma_jacobian = std::sqrt(sj2 / n);
  return set;
}

Vector mean_value_noise(const std::shared_ptr<const NoiseSet>& set,
                        const LevelSample& s) {
  Vector acc = Vector::Zero(set->values.front().size());
  for (auto idx : s.index_sets.at(0)) acc += set->values[static_cast<std::size_t>(idx)];
  return acc / static_cast<double>(s.index_sets.at(0).size());
}

Matrix mean_jacobian_noise(const std::shared_ptr<const NoiseSet>& set,
                           const LevelSample& s) {
  Matrix acc = Matrix::Zero(set->jacobians.front().rows(), set->jacobians.front().cols());
  for (auto idx : s.index_sets.at(0)) acc += set->jacobians[static_cast<std::size_t>(idx)];
  return acc / static_cast<double>(s.index_sets.at(0).size());
}

}  // namespace

SyntheticProblem build_synthetic(const SyntheticOptions& options) {
  DimensionChain chain{options.dims};
  chain.validate();
  const int K = chain.depth();
  if (K < 2) throw ContractError("synthetic composition needs depth at least 2");
  if (options.dataset_size < 2) throw ConfigError("noise dataset needs at least 2 entries");

  // Whether a full-column-rank composed map is structurally possible.
  bool sc_possible = true;
  for (int i = 1; i < K; ++i) sc_possible &= chain.dims[static_cast<std::size_t>(i)] >= chain.dims[0];

  std::vector<Matrix> maps;        // A_i, out x in, for the K-1 affine levels
  std::vector<Vector> offsets;     // b_i
  Matrix composed;                 // A_{K-1} ... A_1
  double mu = 0;
  const int max_tries = 50;
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Rng rng = Rng::substream(options.seed, static_cast<std::uint64_t>(attempt));
    maps.clear();
    offsets.clear();
    for (int i = 0; i < K - 1; ++i) {
      const int in = chain.dims[static_cast<std::size_t>(i)];
      const int out = chain.dims[static_cast<std::size_t>(i) + 1];
      maps.push_back(options.orthonormal ? orthonormal_matrix(out, in, rng)
                                         : random_matrix(out, in, rng) / std::sqrt(static_cast<double>(in)));
      Vector b(out);
      for (int r = 0; r < out; ++r) b(r) = 0.1 * rng.gaussian();
      offsets.push_back(std::move(b));
    }
    composed = maps[0];
    for (int i = 1; i < K - 1; ++i) composed = maps[static_cast<std::size_t>(i)] * composed;
    Eigen::SelfAdjointEigenSolver<Matrix> es(composed.transpose() * composed);
    mu = es.eigenvalues().minCoeff();
    if (!sc_possible || mu > 1e-8) break;
  }
  if (sc_possible && mu <= 1e-8) {
    throw ConfigError("could not draw a full-column-rank synthetic composition");
  }

  Rng rng = Rng::substream(options.seed, 1000);
  const int d0 = chain.dims[0];
  Vector w_star(d0);
  for (int i = 0; i < d0; ++i) w_star(i) = rng.gaussian();
  Vector dir(d0);
  for (int i = 0; i < d0; ++i) dir(i) = rng.gaussian();
  dir.normalize();
  const Vector w_init = w_star + options.init_offset * dir;

  // accumulated offset of the affine chain and the quadratic target
  Vector m_acc = Vector::Zero(composed.rows());
  {
    Vector acc = Vector::Zero(chain.dims[1]);
    acc = offsets[0];
    for (int i = 1; i < K - 1; ++i) acc = maps[static_cast<std::size_t>(i)] * acc + offsets[static_cast<std::size_t>(i)];
    m_acc = acc;
  }
  const Vector z_star = composed * w_star + m_acc;
  const double init_residual = (composed * w_init + m_acc - z_star).norm();

  std::vector<StochasticLevel> levels;
  Rng noise_rng = Rng::substream(options.seed, 2000);
  for (int i = 0; i < K - 1; ++i) {
    const int in = chain.dims[static_cast<std::size_t>(i)];
    const int out = chain.dims[static_cast<std::size_t>(i) + 1];
    auto A = std::make_shared<const Matrix>(maps[static_cast<std::size_t>(i)]);
    auto b = std::make_shared<const Vector>(offsets[static_cast<std::size_t>(i)]);
    auto noise = std::make_shared<const NoiseSet>(
        make_noise(in, out, options.dataset_size, options.sigma_value,
                   options.sigma_jacobian, noise_rng));
    StochasticLevel level;
    level.in_dim = in;
    level.out_dim = out;
    level.index_domains = {options.dataset_size};
    level.exact_value = [A, b](const Vector& x) { return Vector(*A * x + *b); };
    level.exact_jacobian = [A](const Vector&) { return Matrix(A->transpose()); };
    level.noisy_value = [A, b, noise](const Vector& x, const LevelSample& s) {
      return Vector(*A * x + *b + mean_value_noise(noise, s));
    };
    level.noisy_jacobian = [A, noise](const Vector&, const LevelSample& s) {
      return Matrix(A->transpose() + mean_jacobian_noise(noise, s));
    };
    level.constants.lip_value = A->norm();  // exact Frobenius bound on the Jacobian
    level.constants.lip_jacobian = 0;
    level.constants.sigma_value = noise->sigma_value;
    level.constants.sigma_jacobian = noise->sigma_jacobian;
    level.constants.ms_lip_value = 1.0;  // unit singular values; noise is additive
    level.constants.ms_lip_jacobian = 0;
    levels.push_back(std::move(level));
  }
  {
    const int in = chain.dims[static_cast<std::size_t>(K - 1)];
    auto target = std::make_shared<const Vector>(z_star);
    auto noise = std::make_shared<const NoiseSet>(
        make_noise(in, 1, options.dataset_size, options.sigma_value,
                   options.sigma_jacobian, noise_rng));
    StochasticLevel level;
    level.in_dim = in;
    level.out_dim = 1;
    level.index_domains = {options.dataset_size};
    level.exact_value = [target](const Vector& z) {
      Vector out(1);
      out(0) = 0.5 * (z - *target).squaredNorm();
      return out;
    };
    level.exact_jacobian = [target](const Vector& z) { return Matrix(z - *target); };
    level.noisy_value = [target, noise](const Vector& z, const LevelSample& s) {
      Vector out(1);
      out(0) = 0.5 * (z - *target).squaredNorm();
      return Vector(out + mean_value_noise(noise, s));
    };
    level.noisy_jacobian = [target, noise](const Vector& z, const LevelSample& s) {
      return Matrix(Matrix(z - *target) + mean_jacobian_noise(noise, s));
    };
    level.constants.lip_value =
        options.radius_margin * (init_residual + 4 * options.sigma_jacobian + 1);
    level.constants.lip_jacobian = 1;
    level.constants.sigma_value = noise->sigma_value;
    level.constants.sigma_jacobian = noise->sigma_jacobian;
    level.constants.ms_lip_value = level.constants.lip_value;
    level.constants.ms_lip_jacobian = 1;
    levels.push_back(std::move(level));
  }

  SyntheticProblem out;
  out.problem = std::make_shared<const CompositionProblem>(
      std::move(levels), chain, w_init, "synthetic");
  out.certificate.w_star = w_star;
  out.certificate.f_star = 0;
  out.certificate.mu = sc_possible ? mu : 0;
  out.certificate.strongly_convex = sc_possible && mu > 1e-8;
  out.certificate.smoothness = smoothness_constant(*out.problem);
  return out;
}

// ---- portfolio --------------------------------------------------------

PortfolioProblem build_portfolio(const Matrix& returns, const PortfolioOptions& options) {
  const auto periods = returns.rows();
  const auto assets = returns.cols();
  if (periods < 2) throw ConfigError("portfolio needs at least 2 return periods");
  if (assets < 2) throw ConfigError("portfolio needs at least 2 assets");
  if (!returns.allFinite()) throw ConfigError("returns matrix contains non-finite entries");
  if (options.lambda < 0) throw ConfigError("risk weight lambda must be non-negative");

  auto R = std::make_shared<const Matrix>(returns);
  auto rbar = std::make_shared<const Vector>(returns.colwise().mean().transpose());
  const int d = static_cast<int>(assets);
  const double lambda = options.lambda;
  const double eps = options.eps_guard;

  Rng rng(options.seed);
  Vector w_init = Vector::Constant(d, 1.0 / d);
  for (int i = 0; i < d; ++i) w_init(i) += 0.01 * rng.gaussian();

  auto batch_mean_returns = [R](const LevelSample& s) {
    Vector acc = Vector::Zero(R->cols());
    for (auto idx : s.index_sets.at(0)) acc += R->row(idx).transpose();
    return Vector(acc / static_cast<double>(s.index_sets.at(0).size()));
  };

  std::vector<StochasticLevel> levels;

  {  // f1(x) = (mean <r,x>, x)
    StochasticLevel level;
    level.in_dim = d;
    level.out_dim = 1 + d;
    level.index_domains = {periods};
    auto value = [d](const Vector& x, const Vector& r) {
      Vector out(1 + d);
      out(0) = r.dot(x);
      out.tail(d) = x;
      return out;
    };
    auto jac = [d](const Vector& r) {
      Matrix j = Matrix::Zero(d, 1 + d);
      j.col(0) = r;
      j.block(0, 1, d, d).setIdentity();
      return j;
    };
    level.exact_value = [value, rbar](const Vector& x) { return value(x, *rbar); };
    level.exact_jacobian = [jac, rbar](const Vector&) { return jac(*rbar); };
    level.noisy_value = [value, batch_mean_returns](const Vector& x, const LevelSample& s) {
      return value(x, batch_mean_returns(s));
    };
    level.noisy_jacobian = [jac, batch_mean_returns](const Vector&, const LevelSample& s) {
      return jac(batch_mean_returns(s));
    };
    levels.push_back(std::move(level));
  }

  {  // f2(y, x) = (y, mean (<r,x> - y)^2)
    StochasticLevel level;
    level.in_dim = 1 + d;
    level.out_dim = 2;
    level.index_domains = {periods};
    auto eval = [R, d](const Vector& in, const std::vector<std::int32_t>* idx,
                       bool want_jacobian) {
      const double y = in(0);
      const Vector x = in.tail(d);
      double mean_sq = 0;
      double mean_dev = 0;
      Vector mean_dev_r = Vector::Zero(d);
      const auto apply = [&](Eigen::Index row, double weight) {
        const double dev = R->row(row).dot(x) - y;
        mean_sq += weight * dev * dev;
        mean_dev += weight * dev;
        mean_dev_r += weight * dev * R->row(row).transpose();
      };
      if (idx) {
        const double w = 1.0 / static_cast<double>(idx->size());
        for (auto row : *idx) apply(row, w);
      } else {
        const double w = 1.0 / static_cast<double>(R->rows());
        for (Eigen::Index row = 0; row < R->rows(); ++row) apply(row, w);
      }
      if (!want_jacobian) {
        Vector out(2);
        out << y, mean_sq;
        return std::pair<Vector, Matrix>(out, Matrix());
      }
      Matrix j = Matrix::Zero(1 + d, 2);
      j(0, 0) = 1;
      j(0, 1) = -2 * mean_dev;
      j.block(1, 1, d, 1) = 2 * mean_dev_r;
      Vector out(2);
      out << y, mean_sq;
      return std::pair<Vector, Matrix>(out, j);
    };
    level.exact_value = [eval](const Vector& in) { return eval(in, nullptr, false).first; };
    level.exact_jacobian = [eval](const Vector& in) { return eval(in, nullptr, true).second; };
    level.noisy_value = [eval](const Vector& in, const LevelSample& s) {
      return eval(in, &s.index_sets.at(0), false).first;
    };
    level.noisy_jacobian = [eval](const Vector& in, const LevelSample& s) {
      return eval(in, &s.index_sets.at(0), true).second;
    };
    levels.push_back(std::move(level));
  }

  {  // f3(z1, z2) = -z1 + lambda sqrt(z2 + eps); z2 clamped at 0 because the
     // tracked estimate feeding this level can transiently go negative
    StochasticLevel level;
    level.in_dim = 2;
    level.out_dim = 1;
    level.index_domains = {periods};
    auto value = [lambda, eps](const Vector& z) {
      Vector out(1);
      out(0) = -z(0) + lambda * std::sqrt(std::max(z(1), 0.0) + eps);
      return out;
    };
    auto jac = [lambda, eps](const Vector& z) {
      Matrix j(2, 1);
      j(0, 0) = -1;
      j(1, 0) = lambda / (2 * std::sqrt(std::max(z(1), 0.0) + eps));
      return j;
    };
    level.exact_value = value;
    level.exact_jacobian = jac;
    level.noisy_value = [value](const Vector& z, const LevelSample&) { return value(z); };
    level.noisy_jacobian = [jac](const Vector& z, const LevelSample&) { return jac(z); };
    levels.push_back(std::move(level));
  }

  // calibrate noise-scale declarations at the initial point's forward pass
  {
    const Vector& x = w_init;
    double var_v1 = 0, var_j1 = 0;
    const double mean_ret = rbar->dot(x);
    for (Eigen::Index row = 0; row < returns.rows(); ++row) {
      const double dev = returns.row(row).dot(x) - mean_ret;
      var_v1 += dev * dev;
      var_j1 += (returns.row(row).transpose() - *rbar).squaredNorm();
    }
    var_v1 /= periods;
    var_j1 /= periods;
    Vector z1(1 + d);
    z1(0) = mean_ret;
    z1.tail(d) = x;
    double var_v2 = 0, var_j2 = 0;
    const double y = z1(0);
    double full_sq = 0, full_dev = 0;
    Vector full_dev_r = Vector::Zero(d);
    for (Eigen::Index row = 0; row < returns.rows(); ++row) {
      const double dev = returns.row(row).dot(x) - y;
      full_sq += dev * dev / periods;
      full_dev += dev / periods;
      full_dev_r += dev * returns.row(row).transpose() / periods;
    }
    for (Eigen::Index row = 0; row < returns.rows(); ++row) {
      const double dev = returns.row(row).dot(x) - y;
      const double dv = dev * dev - full_sq;
      var_v2 += dv * dv / periods;
      const double dj0 = -2 * (dev - full_dev);
      const Vector djx = 2 * (dev * returns.row(row).transpose() - full_dev_r);
      var_j2 += (dj0 * dj0 + djx.squaredNorm()) / periods;
    }
    const double floor_sigma = 1e-12;
    levels[0].constants.sigma_value = 2 * std::sqrt(var_v1) + floor_sigma;
    levels[0].constants.sigma_jacobian = 2 * std::sqrt(var_j1) + floor_sigma;
    levels[1].constants.sigma_value = 2 * std::sqrt(var_v2) + floor_sigma;
    levels[1].constants.sigma_jacobian = 2 * std::sqrt(var_j2) + floor_sigma;
    levels[2].constants.sigma_value = floor_sigma;
    levels[2].constants.sigma_jacobian = floor_sigma;
  }
  for (auto& level : levels) {
    level.constants.lip_value = options.radius;
    level.constants.lip_jacobian = 10;
    level.constants.ms_lip_value = options.radius;
    level.constants.ms_lip_jacobian = 10;
  }

  PortfolioProblem out;
  out.problem = std::make_shared<const CompositionProblem>(
      std::move(levels), DimensionChain{{d, 1 + d, 2, 1}}, w_init, "portfolio");
  out.lambda = lambda;
  out.eps_guard = eps;
  return out;
}

// ---- hierarchical tilted ERM ------------------------------------------

double logistic_loss(const Vector& w, const Vector& x, double label) {
  const double margin = label * w.dot(x);
  if (margin > 0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

namespace {

double loss_slope(const Vector& w, const Vector& x, double label) {
  // d loss / d margin = -1 / (1 + e^margin)
  const double margin = label * w.dot(x);
  if (margin > 0) return -std::exp(-margin) / (1 + std::exp(-margin));
  return -1.0 / (1 + std::exp(margin));
}

}  // namespace

TermProblem build_hierarchical_term(const std::vector<ClassGroup>& groups,
                                    const TermOptions& options) {
  if (groups.empty()) throw ConfigError("tilted ERM needs at least one group");
  if (options.inner_tilt == 0 || options.outer_tilt == 0) {
    throw ConfigError("tilt parameters must be nonzero");
  }
  const int G = static_cast<int>(groups.size());
  const int p = static_cast<int>(groups.front().features.cols());
  std::int64_t total = 0;
  for (const auto& g : groups) {
    if (g.features.rows() == 0) throw ConfigError("empty group in tilted ERM data");
    if (static_cast<int>(g.features.cols()) != p) throw ConfigError("inconsistent feature dimension");
    if (g.labels.size() != g.features.rows()) throw ConfigError("label/feature count mismatch");
    total += g.features.rows();
  }

  auto data = std::make_shared<const std::vector<ClassGroup>>(groups);
  auto guard = std::make_shared<std::atomic<std::int64_t>>(0);
  const double tau = options.inner_tilt;
  const double tilt = options.outer_tilt;
  const double clamp = options.exp_clamp;
  const double floor = std::exp(-options.exp_clamp);

  Rng rng(options.seed);
  Vector w_init = Vector::Zero(p);
  for (int i = 0; i < p; ++i) w_init(i) = 0.01 * rng.gaussian();

  auto clamped_exp = [clamp, guard](double e) {
    if (e > clamp || e < -clamp) {
      guard->fetch_add(1, std::memory_order_relaxed);
      e = std::clamp(e, -clamp, clamp);
    }
    return std::exp(e);
  };

  std::vector<StochasticLevel> levels;

  {  // f1: per-group mean of e^{tau * loss}
    StochasticLevel level;
    level.in_dim = p;
    level.out_dim = G;
    for (const auto& g : groups) level.index_domains.push_back(g.features.rows());
    level.exact_value = [data, tau, G](const Vector& w) {
      Vector out(G);
      for (int g = 0; g < G; ++g) {
        const auto& grp = (*data)[static_cast<std::size_t>(g)];
        double acc = 0;
        for (Eigen::Index i = 0; i < grp.features.rows(); ++i) {
          acc += std::exp(tau * logistic_loss(w, grp.features.row(i).transpose(), grp.labels(i)));
        }
        out(g) = acc / static_cast<double>(grp.features.rows());
      }
      return out;
    };
    level.exact_jacobian = [data, tau, G, p](const Vector& w) {
      Matrix j = Matrix::Zero(p, G);
      for (int g = 0; g < G; ++g) {
        const auto& grp = (*data)[static_cast<std::size_t>(g)];
        Vector acc = Vector::Zero(p);
        for (Eigen::Index i = 0; i < grp.features.rows(); ++i) {
          const Vector x = grp.features.row(i).transpose();
          const double y = grp.labels(i);
          const double e = std::exp(tau * logistic_loss(w, x, y));
          acc += tau * e * loss_slope(w, x, y) * y * x;
        }
        j.col(g) = acc / static_cast<double>(grp.features.rows());
      }
      return j;
    };
    level.noisy_value = [data, tau, G, clamped_exp](const Vector& w, const LevelSample& s) {
      Vector out(G);
      for (int g = 0; g < G; ++g) {
        const auto& grp = (*data)[static_cast<std::size_t>(g)];
        const auto& idx = s.index_sets.at(static_cast<std::size_t>(g));
        double acc = 0;
        for (auto i : idx) {
          acc += clamped_exp(tau * logistic_loss(w, grp.features.row(i).transpose(), grp.labels(i)));
        }
        out(g) = acc / static_cast<double>(idx.size());
      }
      return out;
    };
    level.noisy_jacobian = [data, tau, G, p, clamped_exp](const Vector& w, const LevelSample& s) {
      Matrix j = Matrix::Zero(p, G);
      for (int g = 0; g < G; ++g) {
        const auto& grp = (*data)[static_cast<std::size_t>(g)];
        const auto& idx = s.index_sets.at(static_cast<std::size_t>(g));
        Vector acc = Vector::Zero(p);
        for (auto i : idx) {
          const Vector x = grp.features.row(i).transpose();
          const double y = grp.labels(i);
          const double e = clamped_exp(tau * logistic_loss(w, x, y));
          acc += tau * e * loss_slope(w, x, y) * y * x;
        }
        j.col(g) = acc / static_cast<double>(idx.size());
      }
      return j;
    };
    levels.push_back(std::move(level));
  }

  {  // f2: coordinatewise (1/tau) log
    StochasticLevel level;
    level.in_dim = G;
    level.out_dim = G;
    level.index_domains = {1};
    level.exact_value = [tau, G](const Vector& u) {
      Vector out(G);
      for (int g = 0; g < G; ++g) {
        if (u(g) <= 0) throw DomainError(1, "log of non-positive tilted mean");
        out(g) = std::log(u(g)) / tau;
      }
      return out;
    };
    level.exact_jacobian = [tau, G](const Vector& u) {
      Matrix j = Matrix::Zero(G, G);
      for (int g = 0; g < G; ++g) {
        if (u(g) <= 0) throw DomainError(1, "log of non-positive tilted mean");
        j(g, g) = 1.0 / (tau * u(g));
      }
      return j;
    };
    level.noisy_value = [tau, G, floor, guard](const Vector& u, const LevelSample&) {
      Vector out(G);
      for (int g = 0; g < G; ++g) {
        double v = u(g);
        if (v < floor) {
          guard->fetch_add(1, std::memory_order_relaxed);
          v = floor;
        }
        out(g) = std::log(v) / tau;
      }
      return out;
    };
    level.noisy_jacobian = [tau, G, floor, guard](const Vector& u, const LevelSample&) {
      Matrix j = Matrix::Zero(G, G);
      for (int g = 0; g < G; ++g) {
        double v = u(g);
        if (v < floor) {
          guard->fetch_add(1, std::memory_order_relaxed);
          v = floor;
        }
        j(g, g) = 1.0 / (tau * v);
      }
      return j;
    };
    levels.push_back(std::move(level));
  }

  {  // f3: (1/|D|) sum_G |G| e^{t y_G}
    std::vector<double> weights;
    for (const auto& g : groups) {
      weights.push_back(static_cast<double>(g.features.rows()) / static_cast<double>(total));
    }
    StochasticLevel level;
    level.in_dim = G;
    level.out_dim = 1;
    level.index_domains = {1};
    level.exact_value = [weights, tilt, G](const Vector& y) {
      double acc = 0;
      for (int g = 0; g < G; ++g) acc += weights[static_cast<std::size_t>(g)] * std::exp(tilt * y(g));
      Vector out(1);
      out(0) = acc;
      return out;
    };
    level.exact_jacobian = [weights, tilt, G](const Vector& y) {
      Matrix j(G, 1);
      for (int g = 0; g < G; ++g) {
        j(g, 0) = weights[static_cast<std::size_t>(g)] * tilt * std::exp(tilt * y(g));
      }
      return j;
    };
    level.noisy_value = [weights, tilt, G, clamped_exp](const Vector& y, const LevelSample&) {
      double acc = 0;
      for (int g = 0; g < G; ++g) acc += weights[static_cast<std::size_t>(g)] * clamped_exp(tilt * y(g));
      Vector out(1);
      out(0) = acc;
      return out;
    };
    level.noisy_jacobian = [weights, tilt, G, clamped_exp](const Vector& y, const LevelSample&) {
      Matrix j(G, 1);
      for (int g = 0; g < G; ++g) {
        j(g, 0) = weights[static_cast<std::size_t>(g)] * tilt * clamped_exp(tilt * y(g));
      }
      return j;
    };
    levels.push_back(std::move(level));
  }

  {  // f4: (1/t) log
    StochasticLevel level;
    level.in_dim = 1;
    level.out_dim = 1;
    level.index_domains = {1};
    level.exact_value = [tilt](const Vector& z) {
      if (z(0) <= 0) throw DomainError(3, "log of non-positive tilted sum");
      Vector out(1);
      out(0) = std::log(z(0)) / tilt;
      return out;
    };
    level.exact_jacobian = [tilt](const Vector& z) {
      if (z(0) <= 0) throw DomainError(3, "log of non-positive tilted sum");
      Matrix j(1, 1);
      j(0, 0) = 1.0 / (tilt * z(0));
      return j;
    };
    level.noisy_value = [tilt, floor, guard](const Vector& z, const LevelSample&) {
      double v = z(0);
      if (v < floor) {
        guard->fetch_add(1, std::memory_order_relaxed);
        v = floor;
      }
      Vector out(1);
      out(0) = std::log(v) / tilt;
      return out;
    };
    level.noisy_jacobian = [tilt, floor, guard](const Vector& z, const LevelSample&) {
      double v = z(0);
      if (v < floor) {
        guard->fetch_add(1, std::memory_order_relaxed);
        v = floor;
      }
      Matrix j(1, 1);
      j(0, 0) = 1.0 / (tilt * v);
      return j;
    };
    levels.push_back(std::move(level));
  }

  // noise-scale declaration for the only stochastic level, at the initial point
  {
    double var_v = 0, var_j = 0;
    const Vector u1 = levels[0].exact_value(w_init);
    const Matrix j1 = levels[0].exact_jacobian(w_init);
    for (int g = 0; g < G; ++g) {
      const auto& grp = groups[static_cast<std::size_t>(g)];
      double vv = 0, vj = 0;
      for (Eigen::Index i = 0; i < grp.features.rows(); ++i) {
        const Vector x = grp.features.row(i).transpose();
        const double y = grp.labels(i);
        const double e = std::exp(tau * logistic_loss(w_init, x, y));
        vv += (e - u1(g)) * (e - u1(g));
        const Vector col = tau * e * loss_slope(w_init, x, y) * y * x;
        vj += (col - j1.col(g)).squaredNorm();
      }
      var_v += vv / static_cast<double>(grp.features.rows());
      var_j += vj / static_cast<double>(grp.features.rows());
    }
    const double floor_sigma = 1e-12;
    levels[0].constants.sigma_value = 2 * std::sqrt(var_v) + floor_sigma;
    levels[0].constants.sigma_jacobian = 2 * std::sqrt(var_j) + floor_sigma;
    for (std::size_t i = 1; i < levels.size(); ++i) {
      levels[i].constants.sigma_value = floor_sigma;
      levels[i].constants.sigma_jacobian = floor_sigma;
    }
  }
  for (auto& level : levels) {
    level.constants.lip_value = options.radius;
    level.constants.lip_jacobian = 10;
    level.constants.ms_lip_value = options.radius;
    level.constants.ms_lip_jacobian = 10;
  }

  TermProblem out;
  out.problem = std::make_shared<const CompositionProblem>(
      std::move(levels), DimensionChain{{p, G, G, 1, 1}}, w_init, "term");
  out.guard_events = guard;
  return out;
}

}  // namespace smvr
