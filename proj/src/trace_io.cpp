#include <cstdio>
#include <ostream>
#include <string>

#include "bpalm/solver.hpp"

namespace bpalm {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_series(std::ostream& out, const std::vector<double>& values, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out << ',';
    if (i < values.size()) out << num(values[i]);
  }
}

}  // namespace

void write_trace_csv(std::ostream& out, const SolveResult& result) {
  const std::size_t n = result.trace.empty() ? 0 : result.trace.front().block_gaps.size();
  out << "k,phi,gap_sum";
  for (const char* prefix : {"gap_", "step_", "est_"})
    for (std::size_t i = 1; i <= n; ++i) out << ',' << prefix << i;
  out << ",oracle_calls,wall_time_s\n";

  std::size_t next_stage = 0;
  for (std::size_t r = 0; r < result.trace.size(); ++r) {
    if (next_stage < result.stages.size() && result.stages[next_stage].first_record == r) {
      out << "# stage=" << result.stages[next_stage].index
          << " lambda=" << num(result.stages[next_stage].lambda) << '\n';
      ++next_stage;
    }
    const IterationRecord& rec = result.trace[r];
    out << rec.k << ',' << num(rec.phi) << ',' << num(rec.gap_sum);
    put_series(out, rec.block_gaps, n);
    put_series(out, rec.step_sizes, n);
    put_series(out, rec.estimates, n);
    out << ',' << rec.oracle_calls << ',' << num(rec.wall_time) << '\n';
  }
}

}  // namespace bpalm
