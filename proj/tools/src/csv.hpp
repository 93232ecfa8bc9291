#pragma once

#include <string>
#include <vector>

#include "experiment.hpp"

namespace pireg::bench {

// Full-precision (%.17g) CSV rendering. Every file opens with a '#'-comment
// preamble: toolkit version, experiment name, the search-protocol note, and
// the config echo, then the column header. All columns are deterministic
// except wall_ms, which is measured time.
std::string render_csv(const BenchReport& report);
std::string render_dim_csv(const ExperimentConfig& cfg,
                           const std::vector<DimRow>& rows);
std::string render_trace_csv(const ExperimentConfig& cfg,
                             const std::vector<CandidateRow>& rows);
std::string render_approx_csv(const ExperimentConfig& cfg,
                              const std::vector<ApproxRow>& rows);

// Per-cell mean +- std summary table for the terminal.
std::string render_summary(const BenchReport& report);

// %.17g, the shortest form that round-trips IEEE doubles through strtod.
std::string format_double(double v);

// Writes text to path, creating parent directories. Throws std::runtime_error
// with the path on I/O failure.
void write_file(const std::string& path, const std::string& text);

// Minimal reader for round-trip tests: skips '#' comments, splits the header
// and rows on commas, and undoes the quoting render_csv applies.
struct ParsedCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
ParsedCsv parse_csv(const std::string& text);

}  // namespace pireg::bench
