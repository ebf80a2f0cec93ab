// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "model/incremental.hpp"

#include <cmath>

#include "core/fastmath.hpp"

namespace clar::model {

IncrementalRunner::IncrementalRunner(const WaveNetParams& p, const ad::Array& cond)
    : p_(p), cond_(cond) {
  const int R = p_.hy.residual_channels;
  require(cond_.shape.size() == 2 && cond_.shape[0] == p_.hy.cond_channels,
          "IncrementalRunner: conditioner must be [Ccond,T]");
  T_ = cond_.shape[1];
  ring_.resize(p_.blocks.size());
  depth_.resize(p_.blocks.size());
  for (size_t i = 0; i < p_.blocks.size(); ++i) {
    depth_[i] = (p_.hy.filter_size - 1) * p_.blocks[i].dilation + 1;
    ring_[i].assign(int64_t(depth_[i]) * R, 0.0);
  }
  cur_.assign(R, 0.0);
  nxt_.assign(R, 0.0);
  pre_g_.assign(R, 0.0);
  pre_f_.assign(R, 0.0);
  zbuf_.assign(R, 0.0);
  skip_.assign(p_.hy.skip_channels, 0.0);
  h1_.assign(p_.hy.head_channels, 0.0);
  zero_.assign(R, 0.0);
}

void IncrementalRunner::reset() {
  const int R = p_.hy.residual_channels;
  for (size_t i = 0; i < ring_.size(); ++i) ring_[i].assign(int64_t(depth_[i]) * R, 0.0);
  t_ = 0;
}

std::pair<double, double> IncrementalRunner::step(double x_prev) {
  require(t_ < T_, "IncrementalRunner: stepped past the conditioner coverage");
  const int R = p_.hy.residual_channels, S = p_.hy.skip_channels, H = p_.hy.head_channels;
  const int Cc = p_.hy.cond_channels, K = p_.hy.filter_size;
  const int64_t t = t_;

  for (int r = 0; r < R; ++r) cur_[r] = p_.in_proj.w.v[r] * x_prev + p_.in_proj.b.v[r];
  std::fill(skip_.begin(), skip_.end(), 0.0);

  for (size_t i = 0; i < p_.blocks.size(); ++i) {
    const BlockParams& bl = p_.blocks[i];
    const int D = depth_[i];
    // store this block's input at time t
    std::copy(cur_.begin(), cur_.end(), ring_[i].begin() + int64_t(t % D) * R);

    for (int o = 0; o < R; ++o) {
      pre_g_[o] = bl.gate.b.v[o];
      pre_f_[o] = bl.filt.b.v[o];
    }
    for (int k = 0; k < K; ++k) {
      const int64_t shift = int64_t(K - 1 - k) * bl.dilation;
      const double* hk =
          (t >= shift) ? ring_[i].data() + int64_t((t - shift) % D) * R : zero_.data();
      const double* wg = bl.gate.w.data();
      const double* wf = bl.filt.w.data();
      for (int o = 0; o < R; ++o) {
        double ag = 0.0, af = 0.0;
        const int64_t base = int64_t(o) * R * K + k;
        for (int ci = 0; ci < R; ++ci) {
          ag += wg[base + int64_t(ci) * K] * hk[ci];
          af += wf[base + int64_t(ci) * K] * hk[ci];
        }
        pre_g_[o] += ag;
        pre_f_[o] += af;
      }
    }
    const double* cc = cond_.data();
    for (int o = 0; o < R; ++o) {
      double ag = 0.0, af = 0.0;
      for (int c = 0; c < Cc; ++c) {
        const double cv = cc[int64_t(c) * T_ + t];
        ag += bl.gate_cond.v[int64_t(o) * Cc + c] * cv;
        af += bl.filt_cond.v[int64_t(o) * Cc + c] * cv;
      }
      pre_g_[o] += ag;
      pre_f_[o] += af;
    }
    for (int o = 0; o < R; ++o) zbuf_[o] = fast_gated(pre_g_[o], pre_f_[o]);
    for (int r = 0; r < R; ++r) {
      double acc = bl.res.b.v[r];
      for (int o = 0; o < R; ++o) acc += bl.res.w.v[int64_t(r) * R + o] * zbuf_[o];
      nxt_[r] = cur_[r] + acc;
    }
    for (int s = 0; s < S; ++s) {
      double acc = bl.skip.b.v[s];
      for (int o = 0; o < R; ++o) acc += bl.skip.w.v[int64_t(s) * R + o] * zbuf_[o];
      skip_[s] += acc;
    }
    std::swap(cur_, nxt_);
  }

  for (int s = 0; s < S; ++s) skip_[s] = fast_tanh(skip_[s]);
  for (int j = 0; j < H; ++j) {
    double acc = p_.head1.b.v[j];
    for (int s = 0; s < S; ++s) acc += p_.head1.w.v[int64_t(j) * S + s] * skip_[s];
    h1_[j] = fast_tanh(acc);
  }
  double mu = p_.head_mu.b.v[0];
  double ls = p_.head_logs.b.v[0];
  for (int j = 0; j < H; ++j) {
    mu += p_.head_mu.w.v[j] * h1_[j];
    ls += p_.head_logs.w.v[j] * h1_[j];
  }
  ++t_;
  return {mu, ls};
}

}  // namespace clar::model
