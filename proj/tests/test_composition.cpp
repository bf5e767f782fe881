#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <core/problem.hpp>

using namespace smvr;

namespace {

StochasticLevel quadratic_level(int dim) {
  // f(w) = 0.5 ||w||^2
  StochasticLevel level;
  level.in_dim = dim;
  level.out_dim = 1;
  level.index_domains = {4};
  level.exact_value = [](const Vector& w) {
    Vector out(1);
    out(0) = 0.5 * w.squaredNorm();
    return out;
  };
  level.exact_jacobian = [](const Vector& w) { return Matrix(w); };
  level.noisy_value = [level](const Vector& w, const LevelSample&) {
    return level.exact_value(w);
  };
  level.noisy_jacobian = [level](const Vector& w, const LevelSample&) {
    return level.exact_jacobian(w);
  };
  level.constants.lip_value = 100;
  level.constants.lip_jacobian = 1;
  return level;
}

StochasticLevel affine_level(const Matrix& A, const Vector& b) {
  StochasticLevel level;
  level.in_dim = static_cast<int>(A.cols());
  level.out_dim = static_cast<int>(A.rows());
  level.index_domains = {4};
  level.exact_value = [A, b](const Vector& x) { return Vector(A * x + b); };
  level.exact_jacobian = [A](const Vector&) { return Matrix(A.transpose()); };
  level.noisy_value = [A, b](const Vector& x, const LevelSample&) { return Vector(A * x + b); };
  level.noisy_jacobian = [A](const Vector&, const LevelSample&) { return Matrix(A.transpose()); };
  level.constants.lip_value = A.norm();
  level.constants.lip_jacobian = 0;
  return level;
}

CompositionProblem dummy_problem(std::vector<int> dims) {
  std::vector<StochasticLevel> levels;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    if (i + 2 == dims.size() && dims.back() == 1) {
      levels.push_back(quadratic_level(dims[i]));
    } else {
      levels.push_back(affine_level(Matrix::Identity(dims[i + 1], dims[i]),
                                    Vector::Zero(dims[i + 1])));
    }
  }
  return CompositionProblem(std::move(levels), DimensionChain{dims},
                            Vector::Zero(dims.front()));
}

}  // namespace

TEST_CASE("dimension chain validation") {
  CHECK_THROWS_AS((DimensionChain{{5}}.validate()), ContractError);
  CHECK_THROWS_AS((DimensionChain{{5, 0, 1}}.validate()), ContractError);
  CHECK_THROWS_AS((DimensionChain{{5, 3, 2}}.validate()), ContractError);
  CHECK_NOTHROW((DimensionChain{{5, 3, 1}}.validate()));
  CHECK((DimensionChain{{5, 3, 1}}.depth()) == 2);
}

TEST_CASE("construction rejects chain adjacency violations") {
  std::vector<StochasticLevel> levels;
  levels.push_back(affine_level(Matrix::Identity(3, 2), Vector::Zero(3)));
  levels.push_back(quadratic_level(3));
  // chain claims 2 -> 4 -> 1 but the first level maps 2 -> 3
  CHECK_THROWS_AS(CompositionProblem(levels, DimensionChain{{2, 4, 1}}, Vector::Zero(2)),
                  ContractError);
  CHECK_THROWS_AS(CompositionProblem(levels, DimensionChain{{2, 3, 1}}, Vector::Zero(5)),
                  ContractError);
  CHECK_NOTHROW(CompositionProblem(levels, DimensionChain{{2, 3, 1}}, Vector::Zero(2)));
}

TEST_CASE("evaluate_exact on simple compositions") {
  {
    std::vector<StochasticLevel> levels{quadratic_level(2)};
    CompositionProblem p(levels, DimensionChain{{2, 1}}, Vector::Zero(2));
    CHECK(evaluate_exact(p, Vector::Zero(2)) == 0.0);
    Vector w(2);
    w << 3, 4;
    CHECK(evaluate_exact(p, w) == doctest::Approx(12.5).epsilon(1e-15));
  }
  {
    // identity affine then quadratic centered at the origin
    std::vector<StochasticLevel> levels;
    levels.push_back(affine_level(Matrix::Identity(3, 3), Vector::Zero(3)));
    levels.push_back(quadratic_level(3));
    CompositionProblem p(levels, DimensionChain{{3, 3, 1}}, Vector::Zero(3));
    CHECK(evaluate_exact(p, Vector::Zero(3)) == 0.0);
  }
  {
    CompositionProblem p = dummy_problem({2, 2, 1});
    Vector w(3);
    CHECK_THROWS_AS(evaluate_exact(p, w), ContractError);
  }
}

TEST_CASE("gradient_exact matches hand chain rule") {
  {
    std::vector<StochasticLevel> levels{quadratic_level(2)};
    CompositionProblem p(levels, DimensionChain{{2, 1}}, Vector::Zero(2));
    Vector w(2);
    w << 3, 4;
    const Vector g = gradient_exact(p, w);
    CHECK(g(0) == doctest::Approx(3).epsilon(1e-15));
    CHECK(g(1) == doctest::Approx(4).epsilon(1e-15));
  }
  {
    // f1(w) = A w, f2(z) = c^T z -> gradient A^T c
    Matrix A(2, 3);
    A << 1, 2, 3, 4, 5, 6;
    Vector c(2);
    c << -1, 2;
    std::vector<StochasticLevel> levels;
    levels.push_back(affine_level(A, Vector::Zero(2)));
    levels.push_back(affine_level(c.transpose(), Vector::Zero(1)));
    CompositionProblem p(levels, DimensionChain{{3, 2, 1}}, Vector::Zero(3));
    const Vector g = gradient_exact(p, Vector::Random(3));
    const Vector expect = A.transpose() * c;
    CHECK((g - expect).norm() <= 1e-14);
  }
}

TEST_CASE("smoothness constant closed form") {
  {
    std::vector<StochasticLevel> levels{quadratic_level(2)};
    levels[0].constants.lip_value = 1;
    levels[0].constants.lip_jacobian = 1;
    CompositionProblem p(levels, DimensionChain{{2, 1}}, Vector::Zero(2));
    CHECK(smoothness_constant(p) == doctest::Approx(1.0).epsilon(1e-14));
  }
  {
    std::vector<StochasticLevel> levels;
    levels.push_back(affine_level(Matrix::Identity(2, 2), Vector::Zero(2)));
    levels.push_back(quadratic_level(2));
    levels[0].constants.lip_value = 2;
    levels[0].constants.lip_jacobian = 1;
    levels[1].constants.lip_value = 2;
    levels[1].constants.lip_jacobian = 1;
    CompositionProblem p(levels, DimensionChain{{2, 2, 1}}, Vector::Zero(2));
    // 2^3 * 1 * (1/2 + 1/4) = 6
    CHECK(smoothness_constant(p) == doctest::Approx(6.0).epsilon(1e-14));
  }
  {
    std::vector<StochasticLevel> levels;
    levels.push_back(affine_level(Matrix::Identity(2, 2), Vector::Zero(2)));
    levels.push_back(affine_level(Matrix::Identity(2, 2), Vector::Zero(2)));
    levels.push_back(quadratic_level(2));
    for (auto& l : levels) {
      l.constants.lip_value = 1;
      l.constants.lip_jacobian = 1;
    }
    CompositionProblem p(levels, DimensionChain{{2, 2, 2, 1}}, Vector::Zero(2));
    CHECK(smoothness_constant(p) == doctest::Approx(3.0).epsilon(1e-14));
  }
}

TEST_CASE("draw_samples contract") {
  CompositionProblem p = dummy_problem({2, 2, 2, 1});
  Rng rng(7);
  SUBCASE("one sample per level, single index at batch 1") {
    const auto samples = draw_samples(p, 1, rng);
    REQUIRE(samples.size() == 3);
    for (const auto& s : samples) {
      REQUIRE(s.index_sets.size() == 1);
      CHECK(s.index_sets[0].size() == 1);
      CHECK(s.index_sets[0][0] >= 0);
      CHECK(s.index_sets[0][0] < 4);
    }
  }
  SUBCASE("without replacement when batch fits the dataset") {
    const auto samples = draw_samples(p, 4, rng);
    for (const auto& s : samples) {
      auto idx = s.index_sets[0];
      REQUIRE(idx.size() == 4);
      std::sort(idx.begin(), idx.end());
      for (int i = 0; i < 4; ++i) CHECK(idx[static_cast<std::size_t>(i)] == i);
    }
  }
  SUBCASE("with replacement allowed past the dataset size") {
    const auto samples = draw_samples(p, 9, rng);
    for (const auto& s : samples) {
      CHECK(s.index_sets[0].size() == 9);
      for (auto i : s.index_sets[0]) {
        CHECK(i >= 0);
        CHECK(i < 4);
      }
    }
  }
  SUBCASE("replay determinism") {
    Rng a(42), b(42);
    for (int rep = 0; rep < 10; ++rep) {
      const auto sa = draw_samples(p, 3, a);
      const auto sb = draw_samples(p, 3, b);
      REQUIRE(sa.size() == sb.size());
      for (std::size_t i = 0; i < sa.size(); ++i) {
        CHECK(sa[i].index_sets == sb[i].index_sets);
      }
    }
  }
  SUBCASE("bad batch size") { CHECK_THROWS_AS(draw_samples(p, 0, rng), ContractError); }
}
