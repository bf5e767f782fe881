#ifndef SMVR_CORE_DATA_IO_HPP
#define SMVR_CORE_DATA_IO_HPP

#include <string>

#include "problems.hpp"
#include "trace.hpp"

namespace smvr {

struct ReturnsTable {
  std::vector<std::string> dates;
  std::vector<std::string> asset_names;
  Matrix values;  // periods x assets, fractional units
  long dropped_rows = 0;  // rows removed for missing-value sentinels
};

// Kenneth-French industry-returns layout: preamble lines, a header row of
// industry names, then rows of "date  pct pct ...". Percent values are
// divided by 100; rows containing the -99.99 / -999 missing sentinels are
// dropped and counted.
ReturnsTable load_industry_csv(const std::string& path);

// r_t = drift + L g_t with g_t standard Gaussian and L a symmetric square
// root of the (positive semidefinite) volatility matrix.
ReturnsTable synth_returns(std::uint64_t seed, int periods, int assets,
                           const Vector& drift, const Matrix& volatility);

// Synthetic two-group binary classification fixture: a rare and a common
// class (sizes rare_fraction-controlled) with a fraction of labels flipped.
std::vector<ClassGroup> synth_classification_groups(std::uint64_t seed, int features,
                                                    int common_count, int rare_count,
                                                    double flip_fraction);

// Comma-separated trace files; floats use shortest round-trip formatting so
// read(write(x)) == x bitwise.
void write_trace(const RunTrace& trace, const std::string& path);
RunTrace read_trace(const std::string& path);

}  // namespace smvr

#endif
