// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "ad/array.hpp"

namespace clar::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // learning rate is multiplied by anneal_factor every anneal_every steps;
  // 0 disables annealing
  int64_t anneal_every = 0;
  double anneal_factor = 0.5;
};

// Adam with bias correction. Parameters are attached once, in a fixed order;
// step() consumes gradients in that same order.
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  void attach(std::vector<Array*> params);

  // Learning rate that the next step() will use.
  double effective_lr() const;

  // Applies one update in place. Throws NumericError if any gradient is
  // non-finite; parameters are untouched in that case.
  void step(const std::vector<Array>& grads);

  int64_t step_count() const { return steps_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<Array*> params_;
  std::vector<std::vector<double>> m_, v_;
  int64_t steps_ = 0;
};

}  // namespace clar::ad
