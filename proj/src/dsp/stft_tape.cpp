// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "dsp/stft_tape.hpp"

#include <cmath>
#include <memory>

#include "dsp/fft.hpp"

namespace clar::dsp {

namespace {

// State the backward pass needs: the complex spectra and the DFT basis
// restricted to the window positions.
struct StftState {
  FramePlan plan;
  int bins = 0;
  std::vector<double> re, im;        // [frames * bins]
  std::vector<double> cos_t, sin_t;  // [window_len * bins], n-major
};

}  // namespace

ad::Var stft_magnitude_var(ad::Var x, const StftConfig& cfg) {
  require(x.valid(), "stft_magnitude_var: unbound Var");
  ad::Tape& t = *x.tape();
  const ad::Array& xv = x.value();
  require(xv.shape.size() == 1, "stft_magnitude_var: expected [T], got " +
                                    ad::shape_str(xv.shape));

  auto st = std::make_shared<StftState>();
  st->plan = plan_frames(xv.size(), cfg);
  st->bins = stft_bins(cfg);
  const FramePlan& plan = st->plan;
  const int B = st->bins;

  st->re.resize(int64_t(plan.frames) * B);
  st->im.resize(int64_t(plan.frames) * B);
  ad::Array mag(ad::Shape{plan.frames, B});
  std::vector<std::complex<double>> buf(cfg.fft_size);
  for (int f = 0; f < plan.frames; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    const int64_t start = int64_t(f) * plan.hop;
    for (int n = 0; n < plan.window_len; ++n)
      buf[n] = plan.sample(xv.data(), start + n) * plan.window[n];
    fft_radix2(buf);
    for (int b = 0; b < B; ++b) {
      st->re[int64_t(f) * B + b] = buf[b].real();
      st->im[int64_t(f) * B + b] = buf[b].imag();
      mag.v[int64_t(f) * B + b] = std::abs(buf[b]);
    }
  }

  const bool needs = t.needs_grad(x.id());
  const int ix = x.id();
  const int io = static_cast<int>(t.num_nodes());
  ad::Var out(&t, t.add_node(std::move(mag), needs));
  if (!needs) return out;

  const double pi = 3.14159265358979323846;
  st->cos_t.resize(int64_t(plan.window_len) * B);
  st->sin_t.resize(int64_t(plan.window_len) * B);
  for (int n = 0; n < plan.window_len; ++n)
    for (int b = 0; b < B; ++b) {
      const double th = 2.0 * pi * double(b) * double(n) / double(cfg.fft_size);
      st->cos_t[int64_t(n) * B + b] = std::cos(th);
      st->sin_t[int64_t(n) * B + b] = std::sin(th);
    }

  t.set_back(io, [st, ix, io](ad::Tape& tp) {
    const FramePlan& pl = st->plan;
    const int nb = st->bins;
    const double* g = tp.grad_data(io);
    const double* mag = tp.val(io).data();
    double* gx = tp.grad_data(ix);
    const int64_t src_len = pl.source_len;
    // coefficients per (frame, bin): gradient routed through re and im
    std::vector<double> cre(nb), cim(nb);
    for (int f = 0; f < pl.frames; ++f) {
      const int64_t row = int64_t(f) * nb;
      for (int b = 0; b < nb; ++b) {
        const double m = mag[row + b];
        if (m > 0.0) {
          const double s = g[row + b] / m;
          cre[b] = st->re[row + b] * s;
          cim[b] = st->im[row + b] * s;
        } else {
          cre[b] = 0.0;
          cim[b] = 0.0;
        }
      }
      const int64_t start = int64_t(f) * pl.hop;
      for (int n = 0; n < pl.window_len; ++n) {
        const int64_t src = pl.src_index[start + n];
        if (src >= src_len) continue;  // zero-extension region
        const double* ct = st->cos_t.data() + int64_t(n) * nb;
        const double* snt = st->sin_t.data() + int64_t(n) * nb;
        double acc = 0.0;
        for (int b = 0; b < nb; ++b) acc += cre[b] * ct[b] - cim[b] * snt[b];
        gx[src] += pl.window[n] * acc;
      }
    }
  });
  return out;
}

ad::Var stft_loss_var(ad::Var x, const std::vector<double>& ref, const StftConfig& cfg) {
  require(x.valid(), "stft_loss_var: unbound Var");
  require(static_cast<size_t>(x.value().size()) == ref.size(),
          "stft_loss_var: signal lengths differ");
  ad::Tape& t = *x.tape();
  ad::Var mx = stft_magnitude_var(x, cfg);
  ad::Var mr = t.constant(stft_magnitude(ref, cfg));
  ad::Var diff = sub(mx, mr);
  return scale(vsum(square(diff)), 1.0 / double(mx.value().size()));
}

}  // namespace clar::dsp
