// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "model/wavenet.hpp"

namespace clar::model {

// Sample-by-sample WaveNet evaluation with per-layer ring buffers holding
// each block's input history (straightforward state reuse; one step costs
// one network pass regardless of t).
class IncrementalRunner {
 public:
  // cond must stay alive for the runner's lifetime; it is [Ccond, T] and
  // bounds how many steps can be taken.
  IncrementalRunner(const WaveNetParams& p, const ad::Array& cond);

  // Feeds the input for the current position (the previous output sample or
  // previous flow state) and returns (mu, log_sigma) at this position.
  std::pair<double, double> step(double x_prev);

  void reset();
  int64_t position() const { return t_; }

 private:
  const WaveNetParams& p_;
  const ad::Array& cond_;
  int64_t T_ = 0;
  int64_t t_ = 0;
  // ring_[i] holds the input rows of block i for the last depth_[i] steps
  std::vector<std::vector<double>> ring_;
  std::vector<int> depth_;
  std::vector<double> cur_, nxt_, pre_g_, pre_f_, zbuf_, skip_, h1_, zero_;
};

}  // namespace clar::model
