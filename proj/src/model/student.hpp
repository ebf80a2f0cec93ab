// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dsp/audio.hpp"
#include "model/wavenet.hpp"

namespace clar::model {

struct StudentHyper {
  std::vector<int> flow_layers;   // layers per flow, e.g. {6,6,6,6}
  std::vector<int> reverse_time;  // 0/1 per flow: run that flow on reversed time
  WaveNetHyper base;              // per-flow net shape; layers overridden per flow
  int mel_bands = 16;
};

// Inverse-autoregressive flow stack. Each flow maps the running state z to
// z * sigma + mu where (mu, sigma) look only at strictly-previous state, so
// a full clip is one parallel pass. Parameters are not shared across flows.
struct StudentModel {
  StudentHyper hy;
  std::vector<WaveNetParams> flows;
  CondProjection cond;  // standalone copy; distillation binds the teacher's

  void init(uint64_t seed);
  std::vector<std::pair<std::string, ad::Array*>> named_params();  // flows only
  int total_layers() const;
};

struct IafOutVar {
  ad::Var x;          // transformed sample, [T]
  ad::Var mu;         // accumulated output-distribution mean, [T]
  ad::Var log_sigma;  // accumulated output-distribution log sigma, [T]
};

struct IafOut {
  std::vector<double> x, mu, log_sigma;
};

// Tape path (used by distillation). cond_proj is bound frozen.
IafOutVar iaf_sample_var(ad::Tape& t, const StudentModel& m, const std::vector<double>& z0,
                         const ad::Array& cond_up, const CondProjection& cond_proj,
                         bool trainable);

// Plain path (inference / benchmarking).
IafOut iaf_sample(const StudentModel& m, const std::vector<double>& z0, const ad::Array& cond_up,
                  const CondProjection& cond_proj, int workers);

// Exact density of a concrete sample under the flow, recovered by inverting
// the flows sequentially (one network pass per timestep per flow). Also
// returns the recovered base noise if z0_out is non-null.
double iaf_log_likelihood(const StudentModel& m, const std::vector<double>& x,
                          const ad::Array& cond_up, const CondProjection& cond_proj,
                          std::vector<double>* z0_out = nullptr);

}  // namespace clar::model
