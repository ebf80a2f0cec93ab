// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "harness/metrics.hpp"

#include <cstdio>

namespace clar::harness {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : f_(path), columns_(columns.size()) {
  require(f_.good(), "metrics: cannot open " + path);
  for (size_t i = 0; i < columns.size(); ++i) f_ << (i ? "," : "") << columns[i];
  f_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& values) {
  require(values.size() == columns_, "metrics: row width does not match header");
  for (size_t i = 0; i < values.size(); ++i) f_ << (i ? "," : "") << values[i];
  f_ << "\n";
}

std::string CsvWriter::num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string CsvWriter::num(int64_t v) { return std::to_string(v); }

void write_histogram(const std::string& path, const distill::LogSigmaHistogram& hist) {
  std::ofstream f(path);
  require(f.good(), "histogram: cannot open " + path);
  f << "bin_edge,count_p,count_q\n";
  for (int i = 0; i < distill::LogSigmaHistogram::kBins; ++i) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.6g,%lld,%lld\n", distill::LogSigmaHistogram::bin_edge(i),
                  static_cast<long long>(hist.count_p[i]),
                  static_cast<long long>(hist.count_q[i]));
    f << buf;
  }
  require(f.good(), "histogram: write failed for " + path);
}

distill::LogSigmaHistogram read_histogram(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), "histogram: cannot open " + path);
  distill::LogSigmaHistogram h;
  std::string line;
  std::getline(f, line);  // header
  int i = 0;
  while (std::getline(f, line) && i < distill::LogSigmaHistogram::kBins) {
    double edge;
    long long cp, cq;
    require(std::sscanf(line.c_str(), "%lf,%lld,%lld", &edge, &cp, &cq) == 3,
            "histogram " + path + ": malformed row '" + line + "'");
    h.count_p[i] = cp;
    h.count_q[i] = cq;
    ++i;
  }
  require(i == distill::LogSigmaHistogram::kBins, "histogram " + path + ": wrong bin count");
  return h;
}

}  // namespace clar::harness
