// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MNN_REPORT_H_
#define MNN_REPORT_H_

#include <optional>
#include <string>
#include <vector>

namespace mnn {

struct ReportRow {
  std::string label;   // test-set axis value
  std::string metric;  // SDR, STOI, ...
  std::vector<std::optional<double>> cells;

  bool operator==(const ReportRow&) const = default;
};

// A results table: one row per (test label, metric), one column per module
// followed by the baseline and selector columns.
struct ReportTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;

  // Throws std::out_of_range if absent.
  const ReportRow& row(const std::string& label, const std::string& metric) const;
  std::size_t column(const std::string& name) const;
  double cell(const std::string& label, const std::string& metric,
              const std::string& column) const;

  bool operator==(const ReportTable&) const = default;
};

// Both renderings throw std::invalid_argument on a missing cell or a row
// whose width does not match the header.
std::string to_csv(const ReportTable& t);
std::string to_text(const ReportTable& t);

// Inverse of to_csv (the title is not stored in CSV).
ReportTable parse_csv(const std::string& csv);

}  // namespace mnn

#endif  // MNN_REPORT_H_
