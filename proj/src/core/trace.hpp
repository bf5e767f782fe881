#ifndef SMVR_CORE_TRACE_HPP
#define SMVR_CORE_TRACE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace smvr {

// One evaluated iteration of a run. "samples" is the cumulative count of
// value-oracle datum draws (Jacobian draws are identical by construction),
// the x-axis for all convergence plots.
struct TraceRecord {
  std::int64_t iteration = 0;
  std::int64_t samples = 0;
  double loss = 0;
  double grad_norm = 0;
  double eta = 0;
  double beta = 0;
};

struct RunTrace {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  // iteration index at which each stage ended (stage-wise runs only)
  std::vector<std::int64_t> stage_ends;
};

}  // namespace smvr

#endif
