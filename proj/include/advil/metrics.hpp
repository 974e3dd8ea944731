#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace advil {

struct MetricRow {
  long round = 0;
  std::string metric;
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Ordered (round, metric, value, stderr) records; rounds never decrease.
class MetricTrace {
 public:
  static constexpr const char* kHeader = "round,metric,value,stderr";

  void add(long round, std::string metric, double value, double stderr_ = 0.0);
  void append(const MetricTrace& other);

  const std::vector<MetricRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::vector<double> values(const std::string& metric) const;
  std::vector<long> rounds(const std::string& metric) const;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;

 private:
  std::vector<MetricRow> rows_;
};

/// Shortest round-trip decimal text for a double ("nan"/"inf" spelled out).
std::string format_number(double x);

}  // namespace advil
