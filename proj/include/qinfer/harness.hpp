#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qinfer/config.hpp"

namespace qinfer {

inline constexpr const char* kVersion = "0.1.0";

struct CheckpointRow {
  std::string method;  // "vanilla" or "batch"
  long n = 0;          // checkpoint iteration count
  double coverage_qstar_pct = 0.0;
  double coverage_stationary_pct = 0.0;  // NaN when the target is disabled
  double mean_length = 0.0;
  double mc_stderr = 0.0;  // replication-level stderr of coverage_qstar_pct
};

struct CoverageReport {
  std::vector<CheckpointRow> rows;
  std::string spec_hash;
  std::uint64_t base_seed = 0;
  std::string version;
};

// Replicated coverage experiment for the spec's batch size. Coverage and
// mean interval length aggregate over replications x non-terminal entries;
// the targets are Q* from value iteration and, when exp.stationary_sims > 0,
// the Monte-Carlo stationary mean at each checkpoint horizon. Deterministic
// for a fixed (spec, seed) at any parallelism.
CoverageReport run_coverage(const ExperimentSpec& spec, int jobs = 1);

// Runs both methods (B = 1 and B = spec.batch_size, which must exceed 1)
// with independent seed streams and emits the rows side by side.
CoverageReport compare_methods(const ExperimentSpec& spec, int jobs = 1);

enum class ReportFormat { kCsv, kJson };

void emit_report(const CoverageReport& report, ReportFormat format,
                 std::ostream& out);

// Writes to a file; throws IoError on failure. Byte-stable for fixed input.
void write_report(const CoverageReport& report, ReportFormat format,
                  const std::string& path);

CoverageReport parse_report_json(std::istream& in);

}  // namespace qinfer
