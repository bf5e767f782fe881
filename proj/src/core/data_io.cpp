#include "data_io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace smvr {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  return tokens;
}

std::vector<std::string> split_char(const std::string& line, char delim) {
  std::vector<std::string> tokens;
  std::string tok;
  std::istringstream ss(line);
  while (std::getline(ss, tok, delim)) tokens.push_back(tok);
  return tokens;
}

bool parse_double(const std::string& tok, double& out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool is_number_token(const std::string& tok) {
  double unused;
  return parse_double(tok, unused);
}

std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

bool is_missing_sentinel(double v) {
  return std::abs(v - (-99.99)) < 1e-9 || std::abs(v - (-999.0)) < 1e-9;
}

}  // namespace

ReturnsTable load_industry_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open returns file: " + path);

  ReturnsTable table;
  std::string line;
  long lineno = 0;
  bool header_seen = false;
  // candidate header: the most recent line of non-numeric names before the
  // first data row (preamble text lines are overwritten as we go)
  std::vector<std::string> candidate_header;
  std::vector<std::vector<double>> rows;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tokens = split_ws(line);
    if (!header_seen) {
      if (tokens.size() >= 2 && is_number_token(tokens[0])) {
        // first data row: the header must already be buffered and agree on
        // the column count
        if (candidate_header.size() + 1 != tokens.size()) {
          throw ParseError(lineno, "data row does not match any preceding header row");
        }
        table.asset_names = candidate_header;
        header_seen = true;
        // fall through to parse this row below
      } else {
        bool numeric = false;
        for (const auto& t : tokens) numeric |= is_number_token(t);
        if (tokens.size() >= 2 && !numeric) candidate_header = tokens;
        continue;
      }
    }
    if (tokens.empty()) break;  // blank line ends the data section
    if (!is_number_token(tokens[0])) break;  // a follow-up section begins
    if (tokens.size() != table.asset_names.size() + 1) {
      throw ParseError(lineno, "expected " + std::to_string(table.asset_names.size()) +
                                   " values after the date");
    }
    std::vector<double> row;
    row.reserve(table.asset_names.size());
    bool missing = false;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      double v;
      if (!parse_double(tokens[i], v)) {
        throw ParseError(lineno, "unparseable numeric field '" + tokens[i] + "'");
      }
      missing |= is_missing_sentinel(v);
      row.push_back(v / 100.0);
    }
    if (missing) {
      ++table.dropped_rows;
      continue;
    }
    table.dates.push_back(tokens[0]);
    rows.push_back(std::move(row));
  }
  if (!header_seen && candidate_header.empty()) {
    throw ParseError(0, "no header row of asset names found");
  }
  if (rows.empty()) throw ConfigError("no usable return rows in " + path);

  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.asset_names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

ReturnsTable synth_returns(std::uint64_t seed, int periods, int assets,
                           const Vector& drift, const Matrix& volatility) {
  if (periods < 1 || assets < 1) throw ConfigError("returns table dimensions must be positive");
  if (drift.size() != assets || volatility.rows() != assets || volatility.cols() != assets) {
    throw ConfigError("drift/volatility shapes do not match the asset count");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(volatility);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw ConfigError("volatility matrix is not positive semidefinite");
  }
  const Matrix sqrt_vol =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      es.eigenvectors().transpose();

  Rng rng(seed);
  ReturnsTable table;
  table.values.resize(periods, assets);
  for (int t = 0; t < periods; ++t) {
    Vector g(assets);
    for (int i = 0; i < assets; ++i) g(i) = rng.gaussian();
    table.values.row(t) = (drift + sqrt_vol * g).transpose();
    table.dates.push_back(std::to_string(t + 1));
  }
  for (int i = 0; i < assets; ++i) table.asset_names.push_back("A" + std::to_string(i + 1));
  return table;
}

std::vector<ClassGroup> synth_classification_groups(std::uint64_t seed, int features,
                                                    int common_count, int rare_count,
                                                    double flip_fraction) {
  if (features < 1 || common_count < 1 || rare_count < 1) {
    throw ConfigError("classification fixture sizes must be positive");
  }
  Rng rng(seed);
  // two Gaussian blobs on a random separating direction
  Vector dir(features);
  for (int i = 0; i < features; ++i) dir(i) = rng.gaussian();
  dir.normalize();

  auto make_group = [&](int n, double label) {
    ClassGroup g;
    g.features.resize(n, features);
    g.labels.resize(n);
    for (int i = 0; i < n; ++i) {
      Vector x(features);
      for (int j = 0; j < features; ++j) x(j) = rng.gaussian();
      x += 1.5 * label * dir;
      g.features.row(i) = x.transpose();
      g.labels(i) = (rng.uniform() < flip_fraction) ? -label : label;
    }
    return g;
  };
  std::vector<ClassGroup> groups;
  groups.push_back(make_group(rare_count, 1.0));     // rare class
  groups.push_back(make_group(common_count, -1.0));  // common class
  return groups;
}

void write_trace(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open trace file for writing: " + path);
  out << "algorithm,seed,iteration,samples,loss,grad_norm,eta,beta\n";
  for (const auto& r : trace.records) {
    out << trace.algorithm << ',' << trace.seed << ',' << r.iteration << ','
        << r.samples << ',' << format_double(r.loss) << ','
        << format_double(r.grad_norm) << ',' << format_double(r.eta) << ','
        << format_double(r.beta) << '\n';
  }
}

RunTrace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file: " + path);
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError(0, "empty trace file");
  ++lineno;
  RunTrace trace;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tokens = split_char(line, ',');
    if (tokens.size() != 8) throw ParseError(lineno, "expected 8 fields");
    trace.algorithm = tokens[0];
    TraceRecord rec;
    try {
      trace.seed = std::stoull(tokens[1]);
      rec.iteration = std::stoll(tokens[2]);
      rec.samples = std::stoll(tokens[3]);
    } catch (const std::exception&) {
      throw ParseError(lineno, "unparseable integer field");
    }
    if (!parse_double(tokens[4], rec.loss) || !parse_double(tokens[5], rec.grad_norm) ||
        !parse_double(tokens[6], rec.eta) || !parse_double(tokens[7], rec.beta)) {
      throw ParseError(lineno, "unparseable float field");
    }
    trace.records.push_back(rec);
  }
  return trace;
}

}  // namespace smvr
