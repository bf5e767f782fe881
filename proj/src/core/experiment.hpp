#ifndef SMVR_CORE_EXPERIMENT_HPP
#define SMVR_CORE_EXPERIMENT_HPP

#include <json.hpp>

#include "baselines.hpp"
#include "data_io.hpp"

namespace smvr {

using Json = nlohmann::json;

// Declarative experiment grid: one problem, a list of algorithm specs, a
// seed list. Parsed from JSON (see README for the schema).
struct ExperimentConfig {
  Json problem;
  std::vector<Json> algorithms;
  std::vector<std::uint64_t> seeds;
  std::int64_t iterations = 1000;  // default T, overridable per algorithm
  int batch = 1;
  std::int64_t trace_stride = 0;
  std::string out_dir;
  int workers = 1;

  static ExperimentConfig from_json(const Json& j);
};

// Build any of the built-in problems from its JSON spec
// (kind: synthetic | portfolio_synthetic | portfolio_csv | term).
std::shared_ptr<const CompositionProblem> build_problem(const Json& spec);

// Run one algorithm spec for one seed; returns the trace.
RunTrace run_algorithm(const CompositionProblem& problem, const Json& algo,
                       std::uint64_t seed, std::int64_t default_T, int batch,
                       std::int64_t trace_stride);

struct ExperimentSummary {
  struct AlgorithmStats {
    std::string name;
    int runs = 0;
    std::int64_t final_samples = 0;
    double final_loss_mean = 0;
    double final_grad_norm_mean = 0;
    double rate_exponent = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<AlgorithmStats> algorithms;
  int failed_cells = 0;

  // exit-code convention: 0 all cells ran, 2 at least one aborted
  int exit_code() const { return failed_cells == 0 ? 0 : 2; }
};

// Runs the grid, writes <out>/<algo>/<seed>.csv, <out>/<algo>/mean.csv and
// <out>/summary.csv. Aborted cells are reported and skipped.
ExperimentSummary run_experiment(const ExperimentConfig& config);

// Ranking across algorithms at shared sample-budget checkpoints, computed
// from a run_experiment output directory; writes <out>/report.csv.
struct CompareReport {
  struct Row {
    std::int64_t checkpoint_samples = 0;
    std::string algorithm;
    double mean_loss = 0;
    double mean_grad_norm = 0;
    int rank_loss = 0;
    int rank_grad = 0;
  };
  std::vector<Row> rows;
  // per checkpoint: does every algorithm labelled smvr* beat every other?
  std::vector<bool> smvr_not_worse;
};

CompareReport compare_report(const std::string& out_dir,
                             const std::vector<std::string>& algorithms);

}  // namespace smvr

#endif
