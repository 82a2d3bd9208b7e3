// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mnn/report.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mnn {
namespace {

void check(const ReportTable& t) {
  for (const ReportRow& r : t.rows) {
    if (r.cells.size() != t.columns.size())
      throw std::invalid_argument("report: row " + r.label + "/" + r.metric + " has " +
                                  std::to_string(r.cells.size()) + " cells for " +
                                  std::to_string(t.columns.size()) + " columns");
    for (std::size_t c = 0; c < r.cells.size(); ++c)
      if (!r.cells[c])
        throw std::invalid_argument("report: empty cell at row " + r.label + "/" +
                                    r.metric + ", column " + t.columns[c]);
  }
}

std::string format(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

const ReportRow& ReportTable::row(const std::string& label,
                                  const std::string& metric) const {
  for (const ReportRow& r : rows)
    if (r.label == label && r.metric == metric) return r;
  throw std::out_of_range("report: no row " + label + "/" + metric);
}

std::size_t ReportTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("report: no column " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

double ReportTable::cell(const std::string& label, const std::string& metric,
                         const std::string& col) const {
  const auto& v = row(label, metric).cells.at(column(col));
  if (!v) throw std::out_of_range("report: empty cell " + label + "/" + metric + "/" + col);
  return *v;
}

std::string to_csv(const ReportTable& t) {
  check(t);
  std::ostringstream os;
  os << "label,metric";
  for (const auto& c : t.columns) os << ',' << c;
  os << '\n';
  for (const ReportRow& r : t.rows) {
    os << r.label << ',' << r.metric;
    for (const auto& v : r.cells) os << ',' << format(*v, "%.17g");
    os << '\n';
  }
  return os.str();
}

std::string to_text(const ReportTable& t) {
  check(t);
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"test", "metric"};
  header.insert(header.end(), t.columns.begin(), t.columns.end());
  grid.push_back(header);
  for (const ReportRow& r : t.rows) {
    std::vector<std::string> line{r.label, r.metric};
    const char* fmt = r.metric == "SDR" ? "%.2f" : "%.4f";
    for (const auto& v : r.cells) line.push_back(format(*v, fmt));
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : grid)
    for (std::size_t c = 0; c < line.size(); ++c)
      width[c] = std::max(width[c], line[c].size());

  std::ostringstream os;
  if (!t.title.empty()) os << t.title << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t c = 0; c < grid[i].size(); ++c) {
      const std::string& s = grid[i][c];
      if (c > 0) os << "  ";
      if (c < 2)
        os << s << std::string(width[c] - s.size(), ' ');
      else
        os << std::string(width[c] - s.size(), ' ') << s;
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  return os.str();
}

ReportTable parse_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("report csv: empty input");
  std::vector<std::string> head = split_line(line);
  if (head.size() < 2 || head[0] != "label" || head[1] != "metric")
    throw std::invalid_argument("report csv: bad header");
  ReportTable t;
  t.columns.assign(head.begin() + 2, head.end());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_line(line);
    if (f.size() != head.size())
      throw std::invalid_argument("report csv: ragged row '" + line + "'");
    ReportRow r{f[0], f[1], {}};
    for (std::size_t c = 2; c < f.size(); ++c) {
      double v = 0.0;
      const auto res = std::from_chars(f[c].data(), f[c].data() + f[c].size(), v);
      if (res.ec != std::errc() || res.ptr != f[c].data() + f[c].size())
        throw std::invalid_argument("report csv: bad number '" + f[c] + "'");
      r.cells.emplace_back(v);
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace mnn
