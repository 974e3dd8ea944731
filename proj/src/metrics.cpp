#include "advil/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "advil/core.hpp"

namespace advil {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

void MetricTrace::add(long round, std::string metric, double value, double stderr_) {
  if (!rows_.empty() && round < rows_.back().round) throw InvalidInput("metric rounds must not decrease");
  if (!std::isfinite(value) || !std::isfinite(stderr_)) throw InvalidInput("metric values must be finite: " + metric);
  rows_.push_back({round, std::move(metric), value, stderr_});
}

void MetricTrace::append(const MetricTrace& other) {
  for (const MetricRow& r : other.rows_) add(r.round, r.metric, r.value, r.stderr_);
}

std::vector<double> MetricTrace::values(const std::string& metric) const {
  std::vector<double> out;
  for (const MetricRow& r : rows_)
    if (r.metric == metric) out.push_back(r.value);
  return out;
}

std::vector<long> MetricTrace::rounds(const std::string& metric) const {
  std::vector<long> out;
  for (const MetricRow& r : rows_)
    if (r.metric == metric) out.push_back(r.round);
  return out;
}

void MetricTrace::write_csv(std::ostream& out) const {
  out << kHeader << '\n';
  for (const MetricRow& r : rows_)
    out << r.round << ',' << r.metric << ',' << format_number(r.value) << ',' << format_number(r.stderr_) << '\n';
}

std::string MetricTrace::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

}  // namespace advil
