// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "model/wavenet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>

#include "core/fastmath.hpp"
#include "core/parallel.hpp"

namespace clar::model {

namespace {

ad::Array uniform_init(ad::Shape shape, int fan_in, Rng& rng) {
  ad::Array a(std::move(shape));
  const double bound = std::sqrt(1.0 / double(fan_in));
  for (auto& x : a.v) x = rng.uniform(-bound, bound);
  return a;
}

ConvParams make_conv(int cout, int cin, int k, Rng& rng, bool bias = true) {
  ConvParams c;
  c.w = uniform_init(ad::Shape{cout, cin, k}, cin * k, rng);
  if (bias) c.b = ad::Array(ad::Shape{cout});
  return c;
}

}  // namespace

void WaveNetParams::init(Rng& rng) {
  require(hy.layers >= 1, "wavenet: need at least one layer");
  require(hy.filter_size >= 1, "wavenet: filter size must be >= 1");
  require(hy.dilation_cycle >= 1, "wavenet: dilation cycle must be >= 1");
  const int R = hy.residual_channels, S = hy.skip_channels, H = hy.head_channels;
  const int Cc = hy.cond_channels, K = hy.filter_size;
  in_proj = make_conv(R, 1, 1, rng);
  blocks.clear();
  blocks.resize(hy.layers);
  for (int i = 0; i < hy.layers; ++i) {
    BlockParams& bl = blocks[i];
    bl.dilation = 1 << (i % hy.dilation_cycle);
    bl.gate = make_conv(R, R, K, rng);
    bl.filt = make_conv(R, R, K, rng);
    bl.gate_cond = uniform_init(ad::Shape{R, Cc, 1}, Cc, rng);
    bl.filt_cond = uniform_init(ad::Shape{R, Cc, 1}, Cc, rng);
    bl.res = make_conv(R, R, 1, rng);
    bl.skip = make_conv(S, R, 1, rng);
  }
  head1 = make_conv(H, S, 1, rng);
  head_mu.w = ad::Array(ad::Shape{1, H, 1});
  head_mu.b = ad::Array(ad::Shape{1});
  head_logs.w = ad::Array(ad::Shape{1, H, 1});
  head_logs.b = ad::Array(ad::Shape{1});
}

void WaveNetParams::append_params(const std::string& prefix,
                                  std::vector<std::pair<std::string, ad::Array*>>& out) {
  out.push_back({prefix + "in_proj.w", &in_proj.w});
  out.push_back({prefix + "in_proj.b", &in_proj.b});
  for (size_t i = 0; i < blocks.size(); ++i) {
    const std::string bp = prefix + "block" + std::to_string(i) + ".";
    BlockParams& bl = blocks[i];
    out.push_back({bp + "gate.w", &bl.gate.w});
    out.push_back({bp + "gate.b", &bl.gate.b});
    out.push_back({bp + "filt.w", &bl.filt.w});
    out.push_back({bp + "filt.b", &bl.filt.b});
    out.push_back({bp + "gate_cond.w", &bl.gate_cond});
    out.push_back({bp + "filt_cond.w", &bl.filt_cond});
    out.push_back({bp + "res.w", &bl.res.w});
    out.push_back({bp + "res.b", &bl.res.b});
    out.push_back({bp + "skip.w", &bl.skip.w});
    out.push_back({bp + "skip.b", &bl.skip.b});
  }
  out.push_back({prefix + "head1.w", &head1.w});
  out.push_back({prefix + "head1.b", &head1.b});
  out.push_back({prefix + "head_mu.w", &head_mu.w});
  out.push_back({prefix + "head_mu.b", &head_mu.b});
  out.push_back({prefix + "head_logs.w", &head_logs.w});
  out.push_back({prefix + "head_logs.b", &head_logs.b});
}

int64_t WaveNetParams::receptive_field() const {
  int64_t r = 1;
  for (const auto& bl : blocks) r += int64_t(hy.filter_size - 1) * bl.dilation;
  return r;
}

int64_t WaveNetParams::param_count() const {
  int64_t n = 0;
  std::vector<std::pair<std::string, ad::Array*>> ps;
  const_cast<WaveNetParams*>(this)->append_params("", ps);
  for (auto& [name, a] : ps) n += a->size();
  return n;
}

void CondProjection::init(int cond_channels, int bands, Rng& rng) {
  w = uniform_init(ad::Shape{cond_channels, bands, 1}, bands, rng);
  b = ad::Array(ad::Shape{cond_channels});
}

void CondProjection::append_params(const std::string& prefix,
                                   std::vector<std::pair<std::string, ad::Array*>>& out) {
  out.push_back({prefix + "w", &w});
  out.push_back({prefix + "b", &b});
}

GaussianOutVar wavenet_apply_var(ad::Tape& t, const WaveNetParams& p, ad::Var x_in, ad::Var cond,
                                 bool trainable) {
  using namespace ad;
  require(x_in.shape().size() == 2 && x_in.shape()[0] == 1,
          "wavenet_apply_var: input must be [1,T]");
  require(cond.shape().size() == 2 && cond.shape()[0] == p.hy.cond_channels,
          "wavenet_apply_var: conditioner must be [Ccond,T]");
  require(cond.shape()[1] == x_in.shape()[1],
          "wavenet_apply_var: conditioner length does not match input");
  auto bind = [&](const Array& a) { return t.leaf(a, trainable); };

  Var h = add_channel_bias(causal_conv1d(x_in, bind(p.in_proj.w), 1), bind(p.in_proj.b));
  Var skip_sum;
  for (const auto& bl : p.blocks) {
    Var pre_g = add_channel_bias(
        add(causal_conv1d(h, bind(bl.gate.w), bl.dilation), causal_conv1d(cond, bind(bl.gate_cond), 1)),
        bind(bl.gate.b));
    Var pre_f = add_channel_bias(
        add(causal_conv1d(h, bind(bl.filt.w), bl.dilation), causal_conv1d(cond, bind(bl.filt_cond), 1)),
        bind(bl.filt.b));
    Var z = mul(vsigmoid(pre_g), vtanh(pre_f));
    Var sk = add_channel_bias(causal_conv1d(z, bind(bl.skip.w), 1), bind(bl.skip.b));
    skip_sum = skip_sum.valid() ? add(skip_sum, sk) : sk;
    h = add(h, add_channel_bias(causal_conv1d(z, bind(bl.res.w), 1), bind(bl.res.b)));
  }
  Var a = vtanh(skip_sum);
  Var h1 = vtanh(add_channel_bias(causal_conv1d(a, bind(p.head1.w), 1), bind(p.head1.b)));
  GaussianOutVar out;
  out.mu = select_row(add_channel_bias(causal_conv1d(h1, bind(p.head_mu.w), 1), bind(p.head_mu.b)), 0);
  out.log_sigma =
      select_row(add_channel_bias(causal_conv1d(h1, bind(p.head_logs.w), 1), bind(p.head_logs.b)), 0);
  return out;
}

ad::Var cond_project_var(ad::Tape& t, const CondProjection& c, ad::Var cond_up, bool trainable) {
  using namespace ad;
  return add_channel_bias(causal_conv1d(cond_up, t.leaf(c.w, trainable), 1),
                          t.leaf(c.b, trainable));
}

namespace {

// Edge region: timesteps that only see part of the kernel.
void conv_row_edge(const double* x, int cin, int64_t T, const double* wo, double bv, int K,
                   int dil, double* yr, bool accum, int64_t t_end) {
  for (int64_t t = 0; t < t_end; ++t) {
    double a = (accum ? yr[t] : 0.0) + bv;
    for (int ci = 0; ci < cin; ++ci) {
      const double* xr = x + int64_t(ci) * T;
      for (int k = 0; k < K; ++k) {
        const int64_t shift = int64_t(K - 1 - k) * dil;
        if (shift <= t) a += wo[ci * K + k] * xr[t - shift];
      }
    }
    yr[t] = a;
  }
}

// Interior of one output row, every tap in range.
void conv_row_interior(const double* x, int cin, int64_t T, const double* wo, double bv, int K,
                       int dil, double* yr, bool accum, int64_t t0) {
  const int64_t lead = int64_t(K - 1) * dil;
  for (int64_t t = t0; t < T; ++t) {
    double a = (accum ? yr[t] : 0.0) + bv;
    for (int ci = 0; ci < cin; ++ci)
      for (int k = 0; k < K; ++k)
        a += wo[ci * K + k] * x[int64_t(ci) * T + t - lead + int64_t(k) * dil];
    yr[t] = a;
  }
}

// y[Cout,T] = bias + conv(x[Cin,T]), or y += bias + conv when accum is set
// (bias may be null). Rows of y are independent, so the worker split over
// output channels is deterministic. The interior is tiled 4 output rows by
// 32 timesteps with the accumulators held in registers; each weight is then
// loaded once per 128 multiplies instead of once per multiply.
void conv_rows(const double* x, int cin, int64_t T, const double* w, const double* b, int cout,
               int K, int dil, double* y, bool accum, int workers) {
  constexpr int kOb = 4;
  constexpr int64_t kTb = 32;
  const int64_t lead = std::min<int64_t>(int64_t(K - 1) * dil, T);
  auto run_rows = [&](int64_t o_lo, int64_t o_hi) {
    int64_t o = o_lo;
    for (; o + kOb <= o_hi; o += kOb) {
      const double* wo[kOb];
      double* yr[kOb];
      double bv[kOb];
      for (int j = 0; j < kOb; ++j) {
        wo[j] = w + (o + j) * int64_t(cin) * K;
        yr[j] = y + (o + j) * T;
        bv[j] = b ? b[o + j] : 0.0;
      }
      for (int j = 0; j < kOb; ++j)
        conv_row_edge(x, cin, T, wo[j], bv[j], K, dil, yr[j], accum, lead);
      int64_t t = lead;
      for (; t + kTb <= T; t += kTb) {
        double acc[kOb][kTb];
        if (accum) {
          for (int j = 0; j < kOb; ++j)
            for (int64_t c = 0; c < kTb; ++c) acc[j][c] = yr[j][t + c] + bv[j];
        } else {
          for (int j = 0; j < kOb; ++j)
            for (int64_t c = 0; c < kTb; ++c) acc[j][c] = bv[j];
        }
        for (int ci = 0; ci < cin; ++ci) {
          const double* xr = x + int64_t(ci) * T + t - lead;
          for (int k = 0; k < K; ++k) {
            const double* xs = xr + int64_t(k) * dil;
            for (int j = 0; j < kOb; ++j) {
              const double wk = wo[j][ci * K + k];
              for (int64_t c = 0; c < kTb; ++c) acc[j][c] += wk * xs[c];
            }
          }
        }
        for (int j = 0; j < kOb; ++j) std::memcpy(yr[j] + t, acc[j], sizeof(acc[j]));
      }
      for (int j = 0; j < kOb; ++j)
        conv_row_interior(x, cin, T, wo[j], bv[j], K, dil, yr[j], accum, t);
    }
    for (; o < o_hi; ++o) {
      const double* woo = w + o * int64_t(cin) * K;
      double* yr = y + o * T;
      const double bv = b ? b[o] : 0.0;
      conv_row_edge(x, cin, T, woo, bv, K, dil, yr, accum, lead);
      conv_row_interior(x, cin, T, woo, bv, K, dil, yr, accum, lead);
    }
  };
  if (workers <= 1)
    run_rows(0, cout);
  else
    parallel_for(cout, workers, run_rows);
}

}  // namespace

GaussianOut wavenet_apply(const WaveNetParams& p, const std::vector<double>& u,
                          const ad::Array& cond, int workers) {
  const int64_t T = static_cast<int64_t>(u.size());
  const int R = p.hy.residual_channels, S = p.hy.skip_channels, H = p.hy.head_channels;
  const int Cc = p.hy.cond_channels, K = p.hy.filter_size;
  require(cond.shape.size() == 2 && cond.shape[0] == Cc && cond.shape[1] == T,
          "wavenet_apply: conditioner shape mismatch");

  auto h = std::make_unique_for_overwrite<double[]>(size_t(R) * T);
  auto pre_g = std::make_unique_for_overwrite<double[]>(size_t(R) * T);
  auto pre_f = std::make_unique_for_overwrite<double[]>(size_t(R) * T);
  auto z = std::make_unique_for_overwrite<double[]>(size_t(R) * T);
  auto skip = std::make_unique_for_overwrite<double[]>(size_t(S) * T);
  // input projection
  for (int r = 0; r < R; ++r) {
    const double wv = p.in_proj.w.v[r];
    const double bv = p.in_proj.b.v[r];
    double* hr = h.get() + int64_t(r) * T;
    for (int64_t t = 0; t < T; ++t) hr[t] = wv * u[t] + bv;
  }
  for (size_t li = 0; li < p.blocks.size(); ++li) {
    const BlockParams& bl = p.blocks[li];
    conv_rows(h.get(), R, T, bl.gate.w.data(), bl.gate.b.data(), R, K, bl.dilation, pre_g.get(),
              false, workers);
    conv_rows(h.get(), R, T, bl.filt.w.data(), bl.filt.b.data(), R, K, bl.dilation, pre_f.get(),
              false, workers);
    conv_rows(cond.data(), Cc, T, bl.gate_cond.data(), nullptr, R, 1, 1, pre_g.get(), true,
              workers);
    conv_rows(cond.data(), Cc, T, bl.filt_cond.data(), nullptr, R, 1, 1, pre_f.get(), true,
              workers);
    auto gated_rows = [&](int64_t lo, int64_t hi) {
      for (int64_t i = lo * T; i < hi * T; ++i) z[i] = fast_gated(pre_g[i], pre_f[i]);
    };
    if (workers <= 1)
      gated_rows(0, R);
    else
      parallel_for(R, workers, gated_rows);
    // residual update in place; the skip sum starts at the first block's bias
    conv_rows(z.get(), R, T, bl.res.w.data(), bl.res.b.data(), R, 1, 1, h.get(), true, workers);
    conv_rows(z.get(), R, T, bl.skip.w.data(), bl.skip.b.data(), S, 1, 1, skip.get(), li > 0,
              workers);
  }
  for (int64_t i = 0; i < int64_t(S) * T; ++i) skip[i] = fast_tanh(skip[i]);
  auto h1 = std::make_unique_for_overwrite<double[]>(size_t(H) * T);
  conv_rows(skip.get(), S, T, p.head1.w.data(), p.head1.b.data(), H, 1, 1, h1.get(), false,
            workers);
  for (int64_t i = 0; i < int64_t(H) * T; ++i) h1[i] = fast_tanh(h1[i]);

  GaussianOut out;
  out.mu.resize(T);
  out.log_sigma.resize(T);
  conv_rows(h1.get(), H, T, p.head_mu.w.data(), p.head_mu.b.data(), 1, 1, 1, out.mu.data(), false,
            workers);
  conv_rows(h1.get(), H, T, p.head_logs.w.data(), p.head_logs.b.data(), 1, 1, 1,
            out.log_sigma.data(), false, workers);
  return out;
}

ad::Array cond_project(const CondProjection& c, const ad::Array& cond_up) {
  const int Cc = c.w.shape[0];
  const int bands = c.w.shape[1];
  require(cond_up.shape.size() == 2 && cond_up.shape[0] == bands,
          "cond_project: conditioner shape mismatch");
  const int64_t T = cond_up.shape[1];
  ad::Array out(ad::Shape{Cc, static_cast<int>(T)});
  conv_rows(cond_up.data(), bands, T, c.w.data(), c.b.data(), Cc, 1, 1, out.data(), false, 1);
  return out;
}

}  // namespace clar::model
