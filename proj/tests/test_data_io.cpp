#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <core/data_io.hpp>
#include <filesystem>
#include <fstream>

using namespace smvr;

namespace {

std::string write_fixture(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("industry returns loader") {
  SUBCASE("percent scaling with preamble and header") {
    const auto path = write_fixture("ret_basic.txt",
                                    "Average Value Weighted Returns -- Daily\n"
                                    "\n"
                                    "        Agric   Food\n"
                                    "19260701    1.00   -0.50\n"
                                    "19260702    0.25    0.10\n");
    const auto table = load_industry_csv(path);
    REQUIRE(table.asset_names == std::vector<std::string>{"Agric", "Food"});
    REQUIRE(table.values.rows() == 2);
    CHECK(table.values(0, 0) == 0.01);
    CHECK(table.values(0, 1) == -0.005);
    CHECK(table.values(1, 0) == 0.0025);
    CHECK(table.dates[0] == "19260701");
    CHECK(table.dropped_rows == 0);
  }
  SUBCASE("missing-value sentinels drop the row") {
    const auto path = write_fixture("ret_sentinel.txt",
                                    "  A  B\n"
                                    "1  -99.99  1.00\n"
                                    "2  0.50    2.00\n"
                                    "3  0.10    -999\n");
    const auto table = load_industry_csv(path);
    CHECK(table.values.rows() == 1);
    CHECK(table.dropped_rows == 2);
    CHECK(table.dates == std::vector<std::string>{"2"});
  }
  SUBCASE("data section ends at a follow-up header") {
    const auto path = write_fixture("ret_sections.txt",
                                    "  A  B\n"
                                    "1  1.0  2.0\n"
                                    "\n"
                                    "  Number of Firms in Portfolios\n"
                                    "1  10  20\n");
    const auto table = load_industry_csv(path);
    CHECK(table.values.rows() == 1);
  }
  SUBCASE("unparseable field reports the line number") {
    const auto path = write_fixture("ret_bad.txt",
                                    "  A  B\n"
                                    "1  1.0  2.0\n"
                                    "2  1.0  oops\n");
    try {
      load_industry_csv(path);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("wrong column count reports the line number") {
    const auto path = write_fixture("ret_cols.txt",
                                    "  A  B\n"
                                    "1  1.0\n");
    CHECK_THROWS_AS(load_industry_csv(path), ParseError);
  }
  SUBCASE("missing file and empty data") {
    CHECK_THROWS_AS(load_industry_csv("/nonexistent/file.txt"), ConfigError);
    const auto path = write_fixture("ret_empty.txt", "  A  B\n");
    CHECK_THROWS_AS(load_industry_csv(path), ConfigError);
  }
}

TEST_CASE("synthetic returns generator") {
  Vector drift(3);
  drift << 0.01, 0.02, 0.03;
  SUBCASE("zero volatility reproduces the drift") {
    const auto table = synth_returns(1, 5, 3, drift, Matrix::Zero(3, 3));
    for (int t = 0; t < 5; ++t)
      for (int a = 0; a < 3; ++a)
        CHECK(table.values(t, a) == doctest::Approx(drift(a)).epsilon(1e-14));
  }
  SUBCASE("seed determinism is bitwise") {
    const Matrix vol = 0.0004 * Matrix::Identity(3, 3);
    const auto a = synth_returns(9, 50, 3, drift, vol);
    const auto b = synth_returns(9, 50, 3, drift, vol);
    CHECK(a.values == b.values);
  }
  SUBCASE("column means approach the drift") {
    const Matrix vol = 0.0004 * Matrix::Identity(3, 3);
    const auto table = synth_returns(5, 100000, 3, drift, vol);
    const Vector mean = table.values.colwise().mean().transpose();
    for (int a = 0; a < 3; ++a) {
      CHECK(std::abs(mean(a) - drift(a)) <= 4 * 0.02 / std::sqrt(100000.0));
    }
  }
  SUBCASE("non-PSD volatility rejected") {
    Matrix bad = Matrix::Identity(3, 3);
    bad(0, 0) = -1;
    CHECK_THROWS_AS(synth_returns(1, 5, 3, drift, bad), ConfigError);
    CHECK_THROWS_AS(synth_returns(1, 0, 3, drift, Matrix::Zero(3, 3)), ConfigError);
  }
}

TEST_CASE("classification fixture shape") {
  const auto groups = synth_classification_groups(7, 5, 100, 5, 0.3);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].features.rows() == 5);   // rare class first
  CHECK(groups[1].features.rows() == 100);
  CHECK(groups[0].features.cols() == 5);
  for (const auto& g : groups) {
    for (Eigen::Index i = 0; i < g.labels.size(); ++i) {
      CHECK(std::abs(g.labels(i)) == 1.0);
    }
  }
  CHECK_THROWS_AS(synth_classification_groups(7, 0, 10, 5, 0.3), ConfigError);
}

TEST_CASE("trace round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "trace_rt.csv").string();
  SUBCASE("empty trace writes a header-only file") {
    RunTrace empty;
    empty.algorithm = "smvr";
    write_trace(empty, path);
    std::ifstream in(path);
    std::string line;
    CHECK(std::getline(in, line));
    CHECK(line == "algorithm,seed,iteration,samples,loss,grad_norm,eta,beta");
    CHECK_FALSE(std::getline(in, line));
  }
  SUBCASE("single record") {
    RunTrace trace;
    trace.algorithm = "nested_sgd";
    trace.seed = 42;
    TraceRecord rec;
    rec.iteration = 7;
    rec.samples = 21;
    rec.loss = 0.1;
    rec.grad_norm = 1.0 / 3.0;
    rec.eta = 0.05;
    rec.beta = 0;
    trace.records.push_back(rec);
    write_trace(trace, path);
    const auto back = read_trace(path);
    CHECK(back.algorithm == "nested_sgd");
    CHECK(back.seed == 42);
    REQUIRE(back.records.size() == 1);
    CHECK(back.records[0].iteration == 7);
    CHECK(back.records[0].loss == rec.loss);
    CHECK(back.records[0].grad_norm == rec.grad_norm);
  }
  SUBCASE("500 random finite records round-trip bitwise") {
    Rng rng(31);
    RunTrace trace;
    trace.algorithm = "smvr";
    trace.seed = 7;
    for (int i = 0; i < 500; ++i) {
      TraceRecord rec;
      rec.iteration = i + 1;
      rec.samples = 3 * (i + 1);
      rec.loss = std::exp(40 * (rng.uniform() - 0.5)) * (rng.uniform() < 0.5 ? -1 : 1);
      rec.grad_norm = std::exp(40 * (rng.uniform() - 0.5));
      rec.eta = rng.uniform();
      rec.beta = rng.uniform();
      trace.records.push_back(rec);
    }
    write_trace(trace, path);
    const auto back = read_trace(path);
    REQUIRE(back.records.size() == trace.records.size());
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      CHECK(back.records[i].loss == trace.records[i].loss);
      CHECK(back.records[i].grad_norm == trace.records[i].grad_norm);
      CHECK(back.records[i].eta == trace.records[i].eta);
      CHECK(back.records[i].beta == trace.records[i].beta);
      CHECK(back.records[i].iteration == trace.records[i].iteration);
      CHECK(back.records[i].samples == trace.records[i].samples);
    }
  }
  SUBCASE("malformed trace file rejected") {
    const auto bad = write_fixture("trace_bad.csv",
                                   "algorithm,seed,iteration,samples,loss,grad_norm,eta,beta\n"
                                   "smvr,1,2,3,not_a_float,0,0,0\n");
    CHECK_THROWS_AS(read_trace(bad), ParseError);
    CHECK_THROWS_AS(read_trace("/nonexistent/trace.csv"), ConfigError);
  }
}
