// Command-line front end for the smvr shared library. Talks to the library
// exclusively through the C API.
#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "smvr/smvr.h"

namespace {

using Json = nlohmann::json;

int report_error(const char* stage, smvr_status status) {
  std::cerr << stage << " failed: " << smvr_last_error() << "\n";
  // configuration / input problems exit 1, runtime aborts exit 2
  return (status == SMVR_ERR_CONFIG || status == SMVR_ERR_PARSE ||
          status == SMVR_ERR_CONTRACT || status == SMVR_ERR_NULL_ARGUMENT)
             ? 1
             : 2;
}

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  return Json::parse(in);
}

// --problem accepts either inline JSON or a bare kind name.
Json parse_problem_flag(const std::string& text) {
  if (!text.empty() && text.front() == '{') return Json::parse(text);
  return Json{{"kind", text}};
}

// --algo accepts inline JSON or a bare algorithm name.
Json parse_algo_flag(const std::string& text) {
  if (!text.empty() && text.front() == '{') return Json::parse(text);
  return Json{{"name", text}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic multi-level compositional optimization driver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(smvr_version()));

  // run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run an experiment grid");
  std::string config_path, problem_flag, out_dir;
  std::vector<std::string> algo_flags;
  std::vector<std::uint64_t> seeds;
  std::int64_t iterations = -1;
  int batch = -1, workers = -1;
  double eta = 0, beta = 0;
  run->add_option("--config", config_path, "Experiment config JSON file");
  run->add_option("--problem", problem_flag,
                  "Problem kind or inline JSON (overrides the config)");
  run->add_option("--algo", algo_flags,
                  "Algorithm name or inline JSON (repeatable; overrides the config)");
  run->add_option("--T", iterations, "Iteration budget");
  run->add_option("--seeds", seeds, "Seed list")->delimiter(',');
  run->add_option("--eta", eta, "Constant step size for all algorithms");
  run->add_option("--beta", beta, "Constant momentum weight for all algorithms");
  run->add_option("--batch", batch, "Mini-batch size per level");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--workers", workers, "Worker threads for the grid");

  // report -------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Rank algorithms at shared sample budgets");
  std::string report_dir;
  std::vector<std::string> report_algos;
  report->add_option("--out", report_dir, "run output directory")->required();
  report->add_option("--algos", report_algos, "Algorithm labels to compare")
      ->delimiter(',')
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      Json cfg = config_path.empty() ? Json::object() : load_config(config_path);
      if (!problem_flag.empty()) cfg["problem"] = parse_problem_flag(problem_flag);
      if (!algo_flags.empty()) {
        cfg["algorithms"] = Json::array();
        for (const auto& a : algo_flags) cfg["algorithms"].push_back(parse_algo_flag(a));
      }
      if (!seeds.empty()) cfg["seeds"] = seeds;
      if (iterations > 0) cfg["T"] = iterations;
      if (batch > 0) cfg["batch"] = batch;
      if (workers > 0) cfg["workers"] = workers;
      if (!out_dir.empty()) cfg["out"] = out_dir;
      if (eta > 0 || beta > 0) {
        for (auto& algo : cfg["algorithms"]) {
          algo["schedule"] = "constant";
          if (eta > 0) algo["eta"] = eta;
          if (beta > 0) algo["beta"] = beta;
        }
      }
      if (cfg.value("seeds", Json::array()).empty()) cfg["seeds"] = {1};

      int32_t failed = 0;
      const auto status = smvr_experiment_run(cfg.dump().c_str(), &failed);
      if (status != SMVR_OK) return report_error("run", status);
      std::cout << "wrote " << cfg.value("out", std::string("out")) << "/summary.csv\n";
      if (failed > 0) {
        std::cerr << failed << " run(s) aborted\n";
        return 2;
      }
      return 0;
    }

    // report
    const Json names = report_algos;
    int32_t checkpoints = 0, wins = 0;
    const auto status =
        smvr_compare_report(report_dir.c_str(), names.dump().c_str(), &checkpoints, &wins);
    if (status != SMVR_OK) return report_error("report", status);
    std::cout << "wrote " << report_dir << "/report.csv (" << wins << "/" << checkpoints
              << " checkpoints led by smvr)\n";
    return 0;
  } catch (const Json::exception& e) {
    std::cerr << "invalid JSON: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
