// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ad/tape.hpp"
#include "core/rng.hpp"

namespace clar::model {

struct ConvParams {
  ad::Array w;  // [Cout, Cin, K]
  ad::Array b;  // [Cout], may be empty (no bias)
};

// One residual block: gated dilated convolution with a conditioner add,
// then 1x1 projections back to the residual path and out to the skip path.
//   z = sigmoid(Wg * h + Ag . c + bg) (x) tanh(Wf * h + Af . c + bf)
//   h_next = h + Wr . z + br ;  skip += Ws . z + bs
struct BlockParams {
  ConvParams gate, filt;           // dilated, kernel K, carry the biases
  ad::Array gate_cond, filt_cond;  // [C, Ccond, 1], no bias of their own
  ConvParams res, skip;            // 1x1
  int dilation = 1;
};

struct WaveNetHyper {
  int layers = 10;
  int residual_channels = 32;
  int skip_channels = 32;
  int head_channels = 32;
  int cond_channels = 16;
  int filter_size = 2;
  int dilation_cycle = 5;  // dilation of layer i is 2^(i mod cycle)
};

struct WaveNetParams {
  WaveNetHyper hy;
  ConvParams in_proj;  // [R, 1, 1]
  std::vector<BlockParams> blocks;
  ConvParams head1;      // [H, S, 1]
  ConvParams head_mu;    // [1, H, 1], zero init
  ConvParams head_logs;  // [1, H, 1], zero init

  // Weights uniform in +-sqrt(1/(Cin*K)); output heads start at exactly
  // mu = 0, log sigma = 0.
  void init(Rng& rng);
  void append_params(const std::string& prefix,
                     std::vector<std::pair<std::string, ad::Array*>>& out);
  int64_t receptive_field() const;
  int64_t param_count() const;
};

// Projection of the upsampled conditioner into the channels the blocks
// consume; shared between a teacher and its distilled students.
struct CondProjection {
  ad::Array w;  // [Ccond, bands, 1]
  ad::Array b;  // [Ccond]
  void init(int cond_channels, int bands, Rng& rng);
  void append_params(const std::string& prefix,
                     std::vector<std::pair<std::string, ad::Array*>>& out);
};

struct GaussianOutVar {
  ad::Var mu, log_sigma;  // each [T]
};

struct GaussianOut {
  std::vector<double> mu, log_sigma;
};

// Tape forward. x_in is the [1,T] input sequence (callers shift so position t
// only sees strictly-previous samples); cond is the projected conditioner
// [Ccond,T].
GaussianOutVar wavenet_apply_var(ad::Tape& t, const WaveNetParams& p, ad::Var x_in, ad::Var cond,
                                 bool trainable);

ad::Var cond_project_var(ad::Tape& t, const CondProjection& c, ad::Var cond_up, bool trainable);

// Plain forward without a tape; same arithmetic, contiguous time loops.
// u must already be the shifted input sequence of length T.
GaussianOut wavenet_apply(const WaveNetParams& p, const std::vector<double>& u,
                          const ad::Array& cond, int workers);

ad::Array cond_project(const CondProjection& c, const ad::Array& cond_up);

}  // namespace clar::model
