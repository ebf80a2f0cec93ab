// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "distill/trainer.hpp"

namespace clar::harness {

// Append-only CSV with a fixed header.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& values);
  void flush() { f_.flush(); }
  static std::string num(double v);
  static std::string num(int64_t v);

 private:
  std::ofstream f_;
  size_t columns_;
};

// Snapshot format: header line then one `bin_edge,count_p,count_q` row per
// bin (the edge is the bin's lower bound).
void write_histogram(const std::string& path, const distill::LogSigmaHistogram& hist);
distill::LogSigmaHistogram read_histogram(const std::string& path);

}  // namespace clar::harness
