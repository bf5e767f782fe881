#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace smvr {

namespace fs = std::filesystem;

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  ExperimentConfig cfg;
  if (!j.contains("problem")) throw ConfigError("config missing 'problem'");
  cfg.problem = j.at("problem");
  if (!j.contains("algorithms") || !j.at("algorithms").is_array() ||
      j.at("algorithms").empty()) {
    throw ConfigError("config needs a non-empty 'algorithms' array");
  }
  for (const auto& a : j.at("algorithms")) {
    if (!a.contains("name")) throw ConfigError("algorithm entry missing 'name'");
    cfg.algorithms.push_back(a);
  }
  if (j.contains("seeds")) {
    for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  if (cfg.seeds.empty()) throw ConfigError("config needs at least one seed");
  cfg.iterations = j.value("T", static_cast<std::int64_t>(1000));
  if (cfg.iterations < 1) throw ConfigError("'T' must be positive");
  cfg.batch = j.value("batch", 1);
  if (cfg.batch < 1) throw ConfigError("'batch' must be positive");
  cfg.trace_stride = j.value("trace_stride", static_cast<std::int64_t>(0));
  cfg.out_dir = j.value("out", std::string("out"));
  cfg.workers = j.value("workers", 1);
  if (cfg.workers < 1) throw ConfigError("'workers' must be positive");
  return cfg;
}

std::shared_ptr<const CompositionProblem> build_problem(const Json& spec) {
  const std::string kind = spec.value("kind", std::string());
  if (kind == "synthetic") {
    SyntheticOptions opt;
    opt.dims = spec.value("dims", std::vector<int>{8, 6, 4, 1});
    opt.sigma_value = spec.value("sigma_f", 0.1);
    opt.sigma_jacobian = spec.value("sigma_J", 0.1);
    opt.seed = spec.value("seed", static_cast<std::uint64_t>(1));
    opt.dataset_size = spec.value("dataset_size", 256);
    opt.init_offset = spec.value("init_offset", 2.0);
    return build_synthetic(opt).problem;
  }
  if (kind == "portfolio_synthetic") {
    const int assets = spec.value("assets", 10);
    const int periods = spec.value("periods", 5000);
    const auto seed = spec.value("seed", static_cast<std::uint64_t>(1));
    Vector drift(assets);
    Matrix vol(assets, assets);
    // drift an order of magnitude below volatility keeps the mean-deviation
    // objective bounded below at the default risk weight
    for (int i = 0; i < assets; ++i) {
      drift(i) = 0.0005 + 0.002 * i / std::max(1, assets - 1);
    }
    for (int i = 0; i < assets; ++i) {
      const double si = 0.01 + 0.04 * i / std::max(1, assets - 1);
      for (int j = 0; j < assets; ++j) {
        const double sj = 0.01 + 0.04 * j / std::max(1, assets - 1);
        vol(i, j) = si * sj * (i == j ? 1.0 : 0.2);
      }
    }
    const auto table = synth_returns(seed, periods, assets, drift, vol);
    PortfolioOptions popt;
    popt.lambda = spec.value("lambda", 0.2);
    popt.radius = spec.value("Lf", 100.0);
    popt.seed = seed;
    return build_portfolio(table.values, popt).problem;
  }
  if (kind == "portfolio_csv") {
    if (!spec.contains("path")) throw ConfigError("portfolio_csv needs 'path'");
    const auto table = load_industry_csv(spec.at("path").get<std::string>());
    PortfolioOptions popt;
    popt.lambda = spec.value("lambda", 0.2);
    popt.radius = spec.value("Lf", 100.0);
    popt.seed = spec.value("seed", static_cast<std::uint64_t>(1));
    return build_portfolio(table.values, popt).problem;
  }
  if (kind == "term") {
    const auto groups = synth_classification_groups(
        spec.value("seed", static_cast<std::uint64_t>(1)), spec.value("features", 10),
        spec.value("common_count", 400), spec.value("rare_count", 20),
        spec.value("flip_fraction", 0.3));
    TermOptions topt;
    topt.inner_tilt = spec.value("tau", -2.0);
    topt.outer_tilt = spec.value("t", 10.0);
    topt.radius = spec.value("Lf", 100.0);
    topt.seed = spec.value("seed", static_cast<std::uint64_t>(1));
    return build_hierarchical_term(groups, topt).problem;
  }
  throw ConfigError("unknown problem kind: '" + kind + "'");
}

namespace {

using ScheduleFns = std::pair<ScheduleFn, ScheduleFn>;  // (eta, beta)

ScheduleFns make_schedules(const Json& algo) {
  const std::string type = algo.value("schedule", std::string("poly"));
  if (type == "constant") {
    const double eta = algo.value("eta", 0.1);
    const double beta = algo.value("beta", 0.5);
    if (eta <= 0) throw ConfigError("'eta' must be positive");
    if (!(beta > 0 && beta <= 1)) throw ConfigError("'beta' must lie in (0,1]");
    return {[eta](std::int64_t) { return eta; }, [beta](std::int64_t) { return beta; }};
  }
  SmvrSchedule sched = [&] {
    if (type == "theoretical") return SmvrSchedule::theoretical(algo.value("L1", 1.0));
    if (type == "poly") {
      const double a = algo.value("a", 8.0);
      const double scale = algo.value("eta_scale", 1.0);
      if (algo.contains("c")) return SmvrSchedule(algo.at("c").get<double>(), a, scale);
      return SmvrSchedule::practical(algo.value("beta1", 0.5), a, scale);
    }
    throw ConfigError("unknown schedule type: '" + type + "'");
  }();
  return {[sched](std::int64_t t) { return sched.eta(t); },
          [sched](std::int64_t t) { return sched.beta(t); }};
}

ScalerOptions make_scaler(const Json& algo, ScalerKind kind) {
  ScalerOptions s;
  s.kind = kind;
  s.delta = algo.value("delta", 1e-8);
  s.beta_prime = algo.value("beta_prime", 0.1);
  s.bound_lower = algo.value("cl", 0.1);
  s.bound_upper = algo.value("cu", 10.0);
  return s;
}

}  // namespace

RunTrace run_algorithm(const CompositionProblem& problem, const Json& algo,
                       std::uint64_t seed, std::int64_t default_T, int batch,
                       std::int64_t trace_stride) {
  const std::string name = algo.at("name").get<std::string>();
  const std::string label = algo.value("label", name);
  RunOptions opts;
  opts.batch = algo.value("batch", batch);
  opts.trace_stride = algo.value("trace_stride", trace_stride);
  opts.radius = algo.value("Lf", 0.0);
  const std::int64_t T = algo.value("T", default_T);

  auto relabel = [&label, &seed](RunTrace trace) {
    trace.algorithm = label;
    trace.seed = seed;
    return trace;
  };

  if (name == "smvr") {
    auto [eta, beta] = make_schedules(algo);
    return relabel(smvr_run_custom(problem, eta, beta, T, seed, opts, label).trace);
  }
  if (name == "smvr_stagewise") {
    StageSchedule sched(algo.value("beta1", 0.5), algo.value("T1", static_cast<std::int64_t>(100)),
                        algo.value("c", 16.0), algo.value("stages", 4),
                        algo.value("rho", 2.0));
    return relabel(stagewise_run(problem, sched, seed, opts).trace);
  }
  if (name.rfind("smvr_", 0) == 0) {
    const auto kind = scaler_kind_from_string(name.substr(5));
    auto [eta, beta] = make_schedules(algo);
    return relabel(
        adaptive_smvr_run_custom(problem, eta, beta, make_scaler(algo, kind), T,
                                 seed, opts, label)
            .trace);
  }
  if (name == "nested_sgd") {
    auto [eta, beta] = make_schedules(algo);
    (void)beta;
    return relabel(nested_sgd_run(problem, eta, T, seed, opts).trace);
  }
  if (name == "scsc_style") {
    auto [eta, beta] = make_schedules(algo);
    return relabel(scsc_style_run(problem, eta, beta, T, seed, opts).trace);
  }
  throw ConfigError("unknown algorithm name: '" + name + "'");
}

namespace {

struct MeanCurve {
  std::vector<std::int64_t> iterations;
  std::vector<std::int64_t> samples;
  std::vector<double> loss;
  std::vector<double> grad;
};

MeanCurve mean_curve(const std::vector<RunTrace>& traces) {
  MeanCurve curve;
  if (traces.empty()) return curve;
  const std::size_t n = traces.front().records.size();
  for (const auto& t : traces) {
    if (t.records.size() != n) {
      throw ConfigError("trace lengths differ; cannot average across seeds");
    }
  }
  curve.iterations.resize(n);
  curve.samples.resize(n);
  curve.loss.assign(n, 0);
  curve.grad.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    curve.iterations[i] = traces.front().records[i].iteration;
    curve.samples[i] = traces.front().records[i].samples;
    for (const auto& t : traces) {
      if (t.records[i].samples != curve.samples[i]) {
        throw ConfigError("sample grids differ across seeds; cannot average");
      }
      curve.loss[i] += t.records[i].loss;
      curve.grad[i] += t.records[i].grad_norm;
    }
    curve.loss[i] /= static_cast<double>(traces.size());
    curve.grad[i] /= static_cast<double>(traces.size());
  }
  return curve;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_mean_curve(const MeanCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "iteration,samples,mean_loss,mean_grad_norm\n";
  for (std::size_t i = 0; i < curve.iterations.size(); ++i) {
    out << curve.iterations[i] << ',' << curve.samples[i] << ','
        << format_double(curve.loss[i]) << ',' << format_double(curve.grad[i]) << '\n';
  }
}

double curve_rate_exponent(const MeanCurve& curve) {
  if (curve.iterations.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto t_hi = curve.iterations.back();
  const auto t_lo = std::max<std::int64_t>(10, t_hi / 100);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < curve.iterations.size(); ++i) {
    if (curve.iterations[i] >= t_lo && curve.grad[i] > 0) {
      pts.emplace_back(static_cast<double>(curve.iterations[i]), curve.grad[i]);
    }
  }
  if (pts.size() < 10) return std::numeric_limits<double>::quiet_NaN();
  return rate_exponent_from_points(pts);
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  const auto problem = build_problem(config.problem);
  fs::create_directories(config.out_dir);

  struct Cell {
    std::size_t algo = 0;
    std::uint64_t seed = 0;
  };
  std::vector<Cell> cells;
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    for (auto seed : config.seeds) cells.push_back({a, seed});
  }
  std::vector<std::vector<RunTrace>> traces(config.algorithms.size());
  for (auto& v : traces) v.reserve(config.seeds.size());
  std::vector<std::vector<RunTrace>> cell_results(cells.size(), std::vector<RunTrace>{});
  std::vector<std::string> cell_errors(cells.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        cell_results[i].push_back(run_algorithm(*problem, config.algorithms[cells[i].algo],
                                                cells[i].seed, config.iterations,
                                                config.batch, config.trace_stride));
      } catch (const std::exception& e) {
        cell_errors[i] = e.what();
      }
    }
  };
  const int workers = std::min<int>(config.workers, static_cast<int>(cells.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentSummary summary;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cell_errors[i].empty()) {
      std::cerr << "run aborted (algorithm "
                << config.algorithms[cells[i].algo].at("name").get<std::string>()
                << ", seed " << cells[i].seed << "): " << cell_errors[i] << "\n";
      ++summary.failed_cells;
      continue;
    }
    traces[cells[i].algo].push_back(std::move(cell_results[i].front()));
  }

  std::ofstream sum(fs::path(config.out_dir) / "summary.csv");
  if (!sum) throw ConfigError("cannot write summary.csv");
  sum << "algorithm,runs,final_samples,final_loss_mean,final_grad_norm_mean,rate_exponent\n";
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    if (traces[a].empty()) continue;
    const std::string label = traces[a].front().algorithm;
    const fs::path dir = fs::path(config.out_dir) / label;
    fs::create_directories(dir);
    for (const auto& trace : traces[a]) {
      write_trace(trace, (dir / (std::to_string(trace.seed) + ".csv")).string());
    }
    const auto curve = mean_curve(traces[a]);
    write_mean_curve(curve, (dir / "mean.csv").string());

    ExperimentSummary::AlgorithmStats stats;
    stats.name = label;
    stats.runs = static_cast<int>(traces[a].size());
    stats.final_samples = curve.samples.back();
    stats.final_loss_mean = curve.loss.back();
    stats.final_grad_norm_mean = curve.grad.back();
    stats.rate_exponent = curve_rate_exponent(curve);
    summary.algorithms.push_back(stats);
    sum << stats.name << ',' << stats.runs << ',' << stats.final_samples << ','
        << format_double(stats.final_loss_mean) << ','
        << format_double(stats.final_grad_norm_mean) << ','
        << format_double(stats.rate_exponent) << '\n';
  }
  return summary;
}

CompareReport compare_report(const std::string& out_dir,
                             const std::vector<std::string>& algorithms) {
  if (algorithms.size() < 2) {
    throw ConfigError("comparison needs at least two algorithms");
  }
  std::vector<MeanCurve> curves;
  for (const auto& name : algorithms) {
    const fs::path dir = fs::path(out_dir) / name;
    if (!fs::is_directory(dir)) throw ConfigError("no trace directory for " + name);
    std::vector<RunTrace> traces;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".csv" && entry.path().filename() != "mean.csv") {
        traces.push_back(read_trace(entry.path().string()));
      }
    }
    if (traces.empty()) throw ConfigError("no traces found for " + name);
    curves.push_back(mean_curve(traces));
  }

  // equal-budget alignment across algorithms
  const auto budget = curves.front().samples.back();
  for (const auto& c : curves) {
    const double rel = std::abs(static_cast<double>(c.samples.back() - budget)) /
                       static_cast<double>(budget);
    if (rel > 0.01) {
      throw ConfigError("sample budgets are not aligned across algorithms");
    }
  }

  CompareReport report;
  const std::vector<double> fractions{0.25, 0.5, 0.75, 1.0};
  for (double frac : fractions) {
    const auto checkpoint = static_cast<std::int64_t>(frac * static_cast<double>(budget));
    std::vector<CompareReport::Row> rows;
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      const auto& c = curves[a];
      std::size_t last = 0;
      for (std::size_t i = 0; i < c.samples.size(); ++i) {
        if (c.samples[i] <= checkpoint) last = i;
      }
      CompareReport::Row row;
      row.checkpoint_samples = checkpoint;
      row.algorithm = algorithms[a];
      row.mean_loss = c.loss[last];
      row.mean_grad_norm = c.grad[last];
      rows.push_back(row);
    }
    auto rank_by = [&rows](auto key, auto assign) {
      std::vector<std::size_t> order(rows.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return key(rows[x]) < key(rows[y]);
      });
      for (std::size_t r = 0; r < order.size(); ++r) assign(rows[order[r]], static_cast<int>(r + 1));
    };
    rank_by([](const auto& r) { return r.mean_loss; },
            [](auto& r, int rank) { r.rank_loss = rank; });
    rank_by([](const auto& r) { return r.mean_grad_norm; },
            [](auto& r, int rank) { r.rank_grad = rank; });

    bool ok = true;
    for (const auto& s : rows) {
      if (s.algorithm.rfind("smvr", 0) != 0) continue;
      for (const auto& b : rows) {
        if (b.algorithm.rfind("smvr", 0) == 0) continue;
        ok &= s.mean_loss <= b.mean_loss + 1e-15;
      }
    }
    report.smvr_not_worse.push_back(ok);
    for (auto& r : rows) report.rows.push_back(std::move(r));
  }

  std::ofstream out(fs::path(out_dir) / "report.csv");
  if (!out) throw ConfigError("cannot write report.csv");
  out << "checkpoint_samples,algorithm,mean_loss,mean_grad_norm,rank_loss,rank_grad\n";
  for (const auto& r : report.rows) {
    out << r.checkpoint_samples << ',' << r.algorithm << ',' << format_double(r.mean_loss)
        << ',' << format_double(r.mean_grad_norm) << ',' << r.rank_loss << ','
        << r.rank_grad << '\n';
  }
  return report;
}

}  // namespace smvr
