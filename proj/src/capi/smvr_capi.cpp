#include "smvr/smvr.h"

#include <cstring>
#include <string>

#include "../core/experiment.hpp"

struct smvr_problem {
  std::shared_ptr<const smvr::CompositionProblem> impl;
};

struct smvr_trace {
  smvr::RunTrace impl;
};

namespace {

thread_local std::string g_last_error;

smvr_status fail(smvr_status code, const char* message) {
  g_last_error = message;
  return code;
}

// Runs the body, translating exceptions into status codes.
template <typename Fn>
smvr_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SMVR_OK;
  } catch (const smvr::ParseError& e) {
    return fail(SMVR_ERR_PARSE, e.what());
  } catch (const smvr::ConfigError& e) {
    return fail(SMVR_ERR_CONFIG, e.what());
  } catch (const smvr::DomainError& e) {
    return fail(SMVR_ERR_DOMAIN, e.what());
  } catch (const smvr::ContractError& e) {
    return fail(SMVR_ERR_CONTRACT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(SMVR_ERR_PARSE, e.what());
  } catch (const std::exception& e) {
    return fail(SMVR_ERR_RUNTIME, e.what());
  }
}

smvr_status require(bool ok) {
  return ok ? SMVR_OK : fail(SMVR_ERR_NULL_ARGUMENT, "null argument");
}

}  // namespace

extern "C" {

const char* smvr_version(void) { return "1.0.0"; }

const char* smvr_last_error(void) { return g_last_error.c_str(); }

smvr_status smvr_problem_create(const char* spec_json, smvr_problem** out) {
  if (auto s = require(spec_json && out)) return s;
  return guarded([&] {
    auto problem = smvr::build_problem(smvr::Json::parse(spec_json));
    *out = new smvr_problem{std::move(problem)};
  });
}

void smvr_problem_destroy(smvr_problem* problem) { delete problem; }

smvr_status smvr_problem_dimension(const smvr_problem* problem, int32_t* out) {
  if (auto s = require(problem && out)) return s;
  *out = problem->impl->dimension();
  return SMVR_OK;
}

smvr_status smvr_problem_depth(const smvr_problem* problem, int32_t* out) {
  if (auto s = require(problem && out)) return s;
  *out = problem->impl->depth();
  return SMVR_OK;
}

smvr_status smvr_problem_initial_point(const smvr_problem* problem, double* out) {
  if (auto s = require(problem && out)) return s;
  const auto& w = problem->impl->initial_point();
  std::memcpy(out, w.data(), sizeof(double) * static_cast<std::size_t>(w.size()));
  return SMVR_OK;
}

smvr_status smvr_problem_loss(const smvr_problem* problem, const double* w,
                              double* out) {
  if (auto s = require(problem && w && out)) return s;
  return guarded([&] {
    const Eigen::Map<const smvr::Vector> wv(w, problem->impl->dimension());
    *out = smvr::evaluate_exact(*problem->impl, wv);
  });
}

smvr_status smvr_problem_gradient(const smvr_problem* problem, const double* w,
                                  double* out) {
  if (auto s = require(problem && w && out)) return s;
  return guarded([&] {
    const Eigen::Map<const smvr::Vector> wv(w, problem->impl->dimension());
    const smvr::Vector g = smvr::gradient_exact(*problem->impl, wv);
    std::memcpy(out, g.data(), sizeof(double) * static_cast<std::size_t>(g.size()));
  });
}

smvr_status smvr_run(const smvr_problem* problem, const char* run_json,
                     uint64_t seed, smvr_trace** out) {
  if (auto s = require(problem && run_json && out)) return s;
  return guarded([&] {
    const auto algo = smvr::Json::parse(run_json);
    auto trace = smvr::run_algorithm(*problem->impl, algo, seed,
                                     algo.value("T", static_cast<std::int64_t>(1000)),
                                     algo.value("batch", 1),
                                     algo.value("trace_stride", static_cast<std::int64_t>(0)));
    *out = new smvr_trace{std::move(trace)};
  });
}

void smvr_trace_destroy(smvr_trace* trace) { delete trace; }

smvr_status smvr_trace_size(const smvr_trace* trace, int64_t* out) {
  if (auto s = require(trace && out)) return s;
  *out = static_cast<int64_t>(trace->impl.records.size());
  return SMVR_OK;
}

smvr_status smvr_trace_algorithm(const smvr_trace* trace, const char** out) {
  if (auto s = require(trace && out)) return s;
  *out = trace->impl.algorithm.c_str();
  return SMVR_OK;
}

smvr_status smvr_trace_record(const smvr_trace* trace, int64_t index,
                              int64_t* iteration, int64_t* samples, double* loss,
                              double* grad_norm, double* eta, double* beta) {
  if (auto s = require(trace && iteration && samples && loss && grad_norm && eta && beta)) {
    return s;
  }
  if (index < 0 || index >= static_cast<int64_t>(trace->impl.records.size())) {
    return fail(SMVR_ERR_CONTRACT, "trace record index out of range");
  }
  const auto& r = trace->impl.records[static_cast<std::size_t>(index)];
  *iteration = r.iteration;
  *samples = r.samples;
  *loss = r.loss;
  *grad_norm = r.grad_norm;
  *eta = r.eta;
  *beta = r.beta;
  return SMVR_OK;
}

smvr_status smvr_trace_write(const smvr_trace* trace, const char* path) {
  if (auto s = require(trace && path)) return s;
  return guarded([&] { smvr::write_trace(trace->impl, path); });
}

smvr_status smvr_experiment_run(const char* config_json, int32_t* failed_cells) {
  if (auto s = require(config_json && failed_cells)) return s;
  return guarded([&] {
    const auto cfg = smvr::ExperimentConfig::from_json(smvr::Json::parse(config_json));
    *failed_cells = smvr::run_experiment(cfg).failed_cells;
  });
}

smvr_status smvr_compare_report(const char* out_dir, const char* algorithms_json,
                                int32_t* checkpoints, int32_t* smvr_wins) {
  if (auto s = require(out_dir && algorithms_json && checkpoints && smvr_wins)) return s;
  return guarded([&] {
    std::vector<std::string> names;
    for (const auto& n : smvr::Json::parse(algorithms_json)) {
      names.push_back(n.get<std::string>());
    }
    const auto report = smvr::compare_report(out_dir, names);
    *checkpoints = static_cast<int32_t>(report.smvr_not_worse.size());
    *smvr_wins = 0;
    for (bool ok : report.smvr_not_worse) *smvr_wins += ok ? 1 : 0;
  });
}

}  // extern "C"
