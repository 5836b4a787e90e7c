#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace sqda {

/// One (classifier, configuration) cell of an experiment.
struct ReportCell {
  std::string classifier;
  long n = 0;
  long p = 0;
  /// Free-form parameters, written as "key=value;key=value".
  std::vector<std::pair<std::string, std::string>> extra;
  double mean_error = 0.0;
  double std_error = 0.0;  // standard deviation across repetitions
  long reps = 0;
  long failures = 0;
  double seconds = 0.0;

  bool operator==(const ReportCell&) const = default;
};

struct ExperimentReport {
  std::vector<ReportCell> cells;
};

enum class ReportFormat { csv, jsonl };

ReportFormat parse_report_format(const std::string& name);

/// Column order: classifier, n, p, extra, mean_error, std_error, reps,
/// failures, seconds. CSV always starts with the header line.
void write_report(std::ostream& out, const ExperimentReport& report, ReportFormat format);
void emit_report(const ExperimentReport& report, const std::string& path, ReportFormat format);
ExperimentReport read_report(std::istream& in, ReportFormat format);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace sqda
