#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace mdma::sim {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct Record {
  std::size_t trial = 0;
  std::string metric;
  double value = 0.0;

  bool operator==(const Record&) const = default;
};

struct Summary {
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  /// Sample standard deviation (n - 1); zero for a single record.
  double std = 0.0;
  double p5 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
};

/// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
double percentile(std::vector<double> values, double q);

/// Summaries of every metric, in order of first appearance.
std::vector<Summary> summarize(const std::vector<Record>& records);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Per-trial records of one experiment, plus derived scalars (fits, theory curves) that
/// are not per-trial quantities.
struct ExperimentResult {
  std::string experiment;
  nlohmann::ordered_json scenario;
  std::vector<Record> records;
  std::vector<std::pair<std::string, double>> derived;
  std::vector<CheckResult> checks;

  void add(std::size_t trial, std::string metric, double value) { records.push_back({trial, std::move(metric), value}); }
  std::vector<double> values(const std::string& metric) const;
  double derived_value(const std::string& name) const;
  bool all_checks_passed() const;

  /// CSV layout:
  ///   # mdma-sim <version>
  ///   # experiment: <name>
  ///   # scenario: <compact JSON>
  ///   trial,metric,value
  ///   <trial>,<metric>,<value>           one row per record
  ///   summary,<metric>.<stat>,<value>    stat in count, mean, std, p5, p50, p95
  ///   derived,<name>,<value>
  /// Values are printed with %.17g.
  void write_csv(std::ostream& os) const;
  std::string csv() const;
  void write_csv_file(const std::filesystem::path& path) const;
};

/// Parsed CSV body (header comments skipped).
struct ParsedCsv {
  std::vector<Record> records;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<std::pair<std::string, double>> derived;
};
ParsedCsv parse_csv(std::istream& is);

std::string format_value(double v);

}  // namespace mdma::sim
