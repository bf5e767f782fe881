#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <core/algorithms.hpp>
#include <core/problems.hpp>

using namespace smvr;

namespace {

SyntheticProblem fixture(double sigma, std::uint64_t seed = 3,
                         std::vector<int> dims = {4, 3, 1}) {
  SyntheticOptions opt;
  opt.dims = std::move(dims);
  opt.sigma_value = sigma;
  opt.sigma_jacobian = sigma;
  opt.seed = seed;
  opt.dataset_size = 16;
  return build_synthetic(opt);
}

}  // namespace

TEST_CASE("theoretical schedule constants at L1 = 1") {
  const auto s = SmvrSchedule::theoretical(1.0);
  CHECK(s.c == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(s.a == doctest::Approx(89.442719099991592).epsilon(1e-12));
  CHECK(s.eta(0) == doctest::Approx(0.22360679774997896).epsilon(1e-12));
  CHECK(s.beta(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("schedule monotonicity and range") {
  const auto s = SmvrSchedule::practical(0.5, 8);
  double prev_eta = std::numeric_limits<double>::infinity();
  double prev_beta = std::numeric_limits<double>::infinity();
  for (std::int64_t t = 1; t <= 1000; ++t) {
    const double eta = s.eta(t);
    const double beta = s.beta(t);
    CHECK(eta < prev_eta);
    CHECK(beta < prev_beta);
    CHECK(beta > 0);
    CHECK(beta <= 1);
    prev_eta = eta;
    prev_beta = beta;
  }
  CHECK(s.beta(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("schedule construction guards") {
  CHECK_THROWS_AS(SmvrSchedule(10, 8), ContractError);  // beta_1 = 10/4 > 1
  CHECK_THROWS_AS(SmvrSchedule(1, 1), ContractError);   // a < 2
  CHECK_THROWS_AS(SmvrSchedule(-1, 8), ContractError);
  CHECK_THROWS_AS(SmvrSchedule::practical(1.5, 8), ContractError);
  CHECK_NOTHROW(SmvrSchedule::practical(1.0, 8));
}

TEST_CASE("stage schedule arithmetic") {
  const StageSchedule s(0.5, 100, 16.0, 5, 2.0);
  CHECK(s.beta(3) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(s.stage_length(3) == 400);
  CHECK(s.eta(3) == doctest::Approx(std::sqrt(0.125 / 16.0)).epsilon(1e-14));
  CHECK_THROWS_AS(StageSchedule(0.5, 100, 16.0, 5, 1.0), ContractError);
  CHECK_THROWS_AS(StageSchedule(0.0, 100, 16.0, 5), ContractError);
  CHECK_THROWS_AS(StageSchedule(0.5, 0, 16.0, 5), ContractError);
}

TEST_CASE("smvr_run is deterministic per seed") {
  const auto f = fixture(0.2);
  const auto a = smvr_run(*f.problem, SmvrSchedule::practical(0.5), 50, 99);
  const auto b = smvr_run(*f.problem, SmvrSchedule::practical(0.5), 50, 99);
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
    CHECK(a.trace.records[i].loss == b.trace.records[i].loss);
    CHECK(a.trace.records[i].grad_norm == b.trace.records[i].grad_norm);
  }
  CHECK(a.w_final == b.w_final);
  CHECK(a.tau == b.tau);
  const auto c = smvr_run(*f.problem, SmvrSchedule::practical(0.5), 50, 100);
  CHECK(a.w_final != c.w_final);
}

TEST_CASE("single-iteration run returns the initialized state") {
  SyntheticOptions opt;
  opt.dims = {3, 3, 1};
  opt.sigma_value = 0;
  opt.sigma_jacobian = 0;
  opt.seed = 17;
  const auto f = build_synthetic(opt);
  const auto& p = *f.problem;
  RunOptions ro;
  const auto res = smvr_run_custom(
      p, [](std::int64_t) { return 0.01; }, [](std::int64_t) { return 0.5; }, 1, 5, ro);
  CHECK(res.tau == 1);
  CHECK((res.w_tau - p.initial_point()).norm() == 0);
  // zero noise: the first stack carries exact values, step is plain descent
  const Vector expect = p.initial_point() - 0.01 * gradient_exact(p, p.initial_point());
  CHECK((res.w_final - expect).norm() <= 1e-12);
  CHECK(res.samples.value_draws == p.depth());
  CHECK_THROWS_AS(smvr_run_custom(p, [](std::int64_t) { return 0.01; },
                                  [](std::int64_t) { return 0.5; }, 0, 5, ro),
                  ContractError);
}

TEST_CASE("zero-noise beta=1 run follows exact gradient descent") {
  SyntheticOptions opt;
  opt.dims = {4, 4, 1};
  opt.sigma_value = 0;
  opt.sigma_jacobian = 0;
  opt.seed = 29;
  const auto f = build_synthetic(opt);
  const auto& p = *f.problem;
  RunOptions ro;
  ro.trace_stride = 1;
  const auto res = smvr_run_custom(
      p, [](std::int64_t) { return 0.02; }, [](std::int64_t) { return 1.0; }, 60, 1, ro);
  Vector w = p.initial_point();
  REQUIRE(res.trace.records.size() == 60);
  for (std::size_t t = 0; t < 60; ++t) {
    CHECK(res.trace.records[t].loss == doctest::Approx(evaluate_exact(p, w)).epsilon(1e-12));
    w -= 0.02 * gradient_exact(p, w);
  }
  CHECK((res.w_final - w).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("sample accounting closed form") {
  Rng pick(123);
  for (int rep = 0; rep < 5; ++rep) {
    const std::int64_t T = 1 + static_cast<std::int64_t>(pick.uniform_index(40));
    const int B = 1 + static_cast<int>(pick.uniform_index(4));
    const auto f = fixture(0.1, 3 + rep);
    const int K = f.problem->depth();
    RunOptions ro;
    ro.batch = B;
    const auto res = smvr_run(*f.problem, SmvrSchedule::practical(0.5), T, 7, ro);
    CHECK(res.samples.value_draws == static_cast<std::int64_t>(K) * B * (2 * T - 1));
    CHECK(res.samples.jacobian_draws == static_cast<std::int64_t>(K) * B * (2 * T - 1));
  }
}

TEST_CASE("trace samples strictly increase and stride is honored") {
  const auto f = fixture(0.1);
  RunOptions ro;
  ro.trace_stride = 7;
  const auto res = smvr_run(*f.problem, SmvrSchedule::practical(0.5), 100, 3, ro);
  std::int64_t prev = -1;
  for (const auto& rec : res.trace.records) {
    CHECK(rec.samples > prev);
    prev = rec.samples;
  }
  // records at t = 1, 8, ..., 99 plus the forced final one
  CHECK(res.trace.records.size() == 16);
  CHECK(res.trace.records.back().iteration == 100);
}

TEST_CASE("stagewise degenerate single stage equals constant-schedule smvr") {
  const auto f = fixture(0.15, 41);
  const StageSchedule sched(0.5, 40, 1e4, 1);
  const double eta1 = sched.eta(1);
  REQUIRE(eta1 * smoothness_constant(*f.problem) <= 0.5);
  RunOptions ro;
  ro.trace_stride = 1;
  const auto staged = stagewise_run(*f.problem, sched, 9, ro);
  const auto flat = smvr_run_custom(
      *f.problem, [eta1](std::int64_t) { return eta1; },
      [](std::int64_t) { return 0.5; }, 40, 9, ro);
  REQUIRE(staged.trace.records.size() == flat.trace.records.size());
  for (std::size_t i = 0; i < staged.trace.records.size(); ++i) {
    CHECK(staged.trace.records[i].loss == flat.trace.records[i].loss);
    CHECK(staged.trace.records[i].grad_norm == flat.trace.records[i].grad_norm);
  }
  CHECK(staged.w_out == flat.w_tau);
}

TEST_CASE("stagewise trace spans all stages with recorded boundaries") {
  const auto f = fixture(0.15, 41);
  const StageSchedule sched(0.5, 10, 1e4, 3);
  RunOptions ro;
  ro.trace_stride = 1;
  const auto res = stagewise_run(*f.problem, sched, 2, ro);
  CHECK(res.trace.stage_ends == std::vector<std::int64_t>{10, 30, 70});
  CHECK(res.trace.records.back().iteration == 70);
  // per-stage constants: beta halves stage to stage
  CHECK(res.trace.records.front().beta == doctest::Approx(0.5));
  CHECK(res.trace.records.back().beta == doctest::Approx(0.125));
  // value draws follow the uninterrupted recursion: K B (2N - 1)
  CHECK(res.samples.value_draws == 2 * (2 * 70 - 1));
}

TEST_CASE("stagewise rejects schedules violating the step-size condition") {
  const auto f = fixture(0.15, 41);
  CHECK_THROWS_AS(stagewise_run(*f.problem, StageSchedule(0.5, 10, 0.6, 2), 1),
                  ContractError);
}

TEST_CASE("adaptive scaler hand values") {
  SUBCASE("adagrad single-term mean") {
    AdaptiveScaler s(ScalerKind::AdaGrad, 2, 1e-8);
    Vector v(2);
    v << 2, -1;
    s.update(v, 1);
    CHECK(s.h()(0) == doctest::Approx(4).epsilon(1e-14));
    CHECK(s.h()(1) == doctest::Approx(1).epsilon(1e-14));
    // 1/t mean after a second step
    Vector v2(2);
    v2 << 0, 1;
    s.update(v2, 2);
    CHECK(s.h()(0) == doctest::Approx(2).epsilon(1e-14));
    CHECK(s.h()(1) == doctest::Approx(1).epsilon(1e-14));
  }
  SUBCASE("amsgrad coordinatewise max") {
    AdaptiveScaler s(ScalerKind::AmsGrad, 2, 1e-8, 1.0);
    Vector v1(2);
    v1 << std::sqrt(5.0), std::sqrt(5.0);
    s.update(v1, 1);  // h' = [5,5], h = [5,5]
    Vector v2(2);
    v2 << std::sqrt(3.0), std::sqrt(7.0);
    s.update(v2, 2);  // candidate h' = [3,7] -> h = [5,7]
    CHECK(s.h()(0) == doctest::Approx(5).epsilon(1e-12));
    CHECK(s.h()(1) == doctest::Approx(7).epsilon(1e-12));
  }
  SUBCASE("adabound clamp range") {
    AdaptiveScaler s(ScalerKind::AdaBound, 3, 1e-8, 0.9, 0.5, 2.0);
    Rng rng(3);
    for (std::int64_t t = 1; t <= 200; ++t) {
      Vector v(3);
      for (int i = 0; i < 3; ++i) v(i) = 10 * rng.gaussian();
      s.update(v, t);
      for (int i = 0; i < 3; ++i) {
        CHECK(s.h()(i) >= 0.25);  // 1/c_u^2
        CHECK(s.h()(i) <= 4.0);   // 1/c_l^2
      }
    }
  }
  SUBCASE("one adam-type step from the origin") {
    AdaptiveScaler s(ScalerKind::Adam, 2, 0.1, 0.5);
    Vector v(2);
    v << 1, 1;
    s.update(v, 1);
    CHECK(s.h()(0) == doctest::Approx(0.5).epsilon(1e-14));
    const Vector w2 = Vector::Zero(2) - 0.1 * v.cwiseProduct(s.scaling());
    CHECK(w2(0) == doctest::Approx(-0.12393).epsilon(1e-4));
    CHECK(w2(1) == doctest::Approx(-0.12393).epsilon(1e-4));
  }
  SUBCASE("construction guards") {
    CHECK_THROWS_AS(AdaptiveScaler(ScalerKind::Adam, 0, 1e-8), ContractError);
    CHECK_THROWS_AS(AdaptiveScaler(ScalerKind::Adam, 2, 0.0), ContractError);
    CHECK_THROWS_AS(AdaptiveScaler(ScalerKind::AdaBound, 2, 1e-8, 0.5, 2.0, 0.5),
                    ContractError);
  }
}

TEST_CASE("amsgrad h is non-decreasing over random steps") {
  AdaptiveScaler s(ScalerKind::AmsGrad, 4, 1e-8, 0.2);
  Rng rng(17);
  Vector prev = Vector::Zero(4);
  for (std::int64_t t = 1; t <= 1000; ++t) {
    Vector v(4);
    for (int i = 0; i < 4; ++i) v(i) = rng.gaussian();
    s.update(v, t);
    for (int i = 0; i < 4; ++i) CHECK(s.h()(i) >= prev(i));
    prev = s.h();
  }
}

TEST_CASE("degenerate scaler with delta=1 reproduces plain smvr bitwise") {
  const auto f = fixture(0.2, 61);
  auto eta = [](std::int64_t t) { return 0.1 * std::pow(8.0 + static_cast<double>(t), -1.0 / 3.0); };
  auto beta = [](std::int64_t) { return 0.5; };
  RunOptions ro;
  ro.trace_stride = 1;
  ScalerOptions so;
  so.kind = ScalerKind::None;
  so.delta = 1.0;
  const auto plain = smvr_run_custom(*f.problem, eta, beta, 40, 5, ro);
  const auto scaled = adaptive_smvr_run_custom(*f.problem, eta, beta, so, 40, 5, ro);
  CHECK(plain.w_final == scaled.w_final);
  REQUIRE(plain.trace.records.size() == scaled.trace.records.size());
  for (std::size_t i = 0; i < plain.trace.records.size(); ++i) {
    CHECK(plain.trace.records[i].loss == scaled.trace.records[i].loss);
    CHECK(plain.trace.records[i].grad_norm == scaled.trace.records[i].grad_norm);
  }
}

TEST_CASE("adaptive runs are deterministic and labelled by scaler kind") {
  const auto f = fixture(0.2, 61);
  ScalerOptions so;
  so.kind = ScalerKind::Adam;
  const auto a = adaptive_smvr_run(*f.problem, SmvrSchedule::practical(0.5), so, 30, 4);
  const auto b = adaptive_smvr_run(*f.problem, SmvrSchedule::practical(0.5), so, 30, 4);
  CHECK(a.w_final == b.w_final);
  CHECK(a.trace.algorithm == "smvr_adam");
}

TEST_CASE("rate exponent regression") {
  SUBCASE("exact power law") {
    RunTrace trace;
    for (std::int64_t t = 10; t <= 1000; t += 10) {
      TraceRecord rec;
      rec.iteration = t;
      rec.grad_norm = std::pow(static_cast<double>(t), -1.0 / 3.0);
      trace.records.push_back(rec);
    }
    CHECK(estimate_rate_exponent(trace, 10, 1000) ==
          doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
  }
  SUBCASE("constant trace has slope zero") {
    RunTrace trace;
    for (std::int64_t t = 1; t <= 100; ++t) {
      TraceRecord rec;
      rec.iteration = t;
      rec.grad_norm = 0.7;
      trace.records.push_back(rec);
    }
    CHECK(estimate_rate_exponent(trace, 1, 100) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("insufficient points rejected") {
    RunTrace trace;
    for (std::int64_t t = 1; t <= 5; ++t) {
      TraceRecord rec;
      rec.iteration = t;
      rec.grad_norm = 1;
      trace.records.push_back(rec);
    }
    CHECK_THROWS_AS(estimate_rate_exponent(trace, 1, 5), ContractError);
  }
}
