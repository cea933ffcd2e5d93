#include "mdma/experiment_result.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mdma/common.hpp"

namespace mdma::sim {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<Summary> summarize(const std::vector<Record>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_metric;
  for (const auto& r : records) {
    auto [it, inserted] = by_metric.try_emplace(r.metric);
    if (inserted) order.push_back(r.metric);
    it->second.push_back(r.value);
  }
  std::vector<Summary> out;
  for (const auto& m : order) {
    const auto& v = by_metric[m];
    Summary s;
    s.metric = m;
    s.count = v.size();
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    s.p5 = percentile(v, 5.0);
    s.p50 = percentile(v, 50.0);
    s.p95 = percentile(v, 95.0);
    out.push_back(s);
  }
  return out;
}

std::vector<double> ExperimentResult::values(const std::string& metric) const {
  std::vector<double> v;
  for (const auto& r : records) {
    if (r.metric == metric) v.push_back(r.value);
  }
  return v;
}

double ExperimentResult::derived_value(const std::string& name) const {
  for (const auto& [k, v] : derived) {
    if (k == name) return v;
  }
  throw ConfigError("no derived value named " + name);
}

bool ExperimentResult::all_checks_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

void ExperimentResult::write_csv(std::ostream& os) const {
  os << "# mdma-sim " << kArtifactVersion << '\n';
  os << "# experiment: " << experiment << '\n';
  os << "# scenario: " << scenario.dump() << '\n';
  os << "trial,metric,value\n";
  for (const auto& r : records) os << r.trial << ',' << r.metric << ',' << format_value(r.value) << '\n';
  for (const auto& s : summarize(records)) {
    const std::pair<const char*, double> stats[] = {{"count", static_cast<double>(s.count)},
                                                    {"mean", s.mean},
                                                    {"std", s.std},
                                                    {"p5", s.p5},
                                                    {"p50", s.p50},
                                                    {"p95", s.p95}};
    for (const auto& [name, v] : stats) os << "summary," << s.metric << '.' << name << ',' << format_value(v) << '\n';
  }
  for (const auto& [k, v] : derived) os << "derived," << k << ',' << format_value(v) << '\n';
}

std::string ExperimentResult::csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

void ExperimentResult::write_csv_file(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  write_csv(os);
}

ParsedCsv parse_csv(std::istream& is) {
  ParsedCsv out;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "trial,metric,value") throw FramingError("CSV: missing trial,metric,value header");
      header_seen = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    if (c1 == std::string::npos || c1 == c2) throw FramingError("CSV: malformed row '" + line + "'");
    const std::string first = line.substr(0, c1);
    const std::string name = line.substr(c1 + 1, c2 - c1 - 1);
    const double value = std::stod(line.substr(c2 + 1));
    if (first == "summary") {
      out.summary.emplace_back(name, value);
    } else if (first == "derived") {
      out.derived.emplace_back(name, value);
    } else {
      out.records.push_back({static_cast<std::size_t>(std::stoull(first)), name, value});
    }
  }
  return out;
}

}  // namespace mdma::sim
