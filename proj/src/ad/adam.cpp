// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "ad/adam.hpp"

#include <cmath>

namespace clar::ad {

void Adam::attach(std::vector<Array*> params) {
  params_ = std::move(params);
  m_.clear();
  v_.clear();
  for (const Array* p : params_) {
    m_.emplace_back(p->v.size(), 0.0);
    v_.emplace_back(p->v.size(), 0.0);
  }
  steps_ = 0;
}

double Adam::effective_lr() const {
  if (cfg_.anneal_every <= 0) return cfg_.lr;
  const int64_t k = steps_ / cfg_.anneal_every;
  return cfg_.lr * std::pow(cfg_.anneal_factor, double(k));
}

void Adam::step(const std::vector<Array>& grads) {
  require(grads.size() == params_.size(), "Adam::step: gradient count mismatch");
  for (size_t i = 0; i < grads.size(); ++i) {
    require(grads[i].size() == params_[i]->size(), "Adam::step: gradient shape mismatch");
    if (!grads[i].all_finite())
      throw NumericError("Adam::step: non-finite gradient in parameter " + std::to_string(i));
  }
  const double lr = effective_lr();
  const int64_t t = ++steps_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, double(t));
  const double c2 = 1.0 - std::pow(cfg_.beta2, double(t));
  for (size_t i = 0; i < params_.size(); ++i) {
    double* p = params_[i]->data();
    const double* g = grads[i].data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const int64_t n = params_[i]->size();
    for (int64_t j = 0; j < n; ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace clar::ad
