// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "dsp/stft.hpp"

#include <cmath>

#include "dsp/fft.hpp"

namespace clar::dsp {

void validate_stft(const StftConfig& cfg) {
  require(is_pow2(cfg.fft_size), "stft: fft_size must be a power of two, got " +
                                     std::to_string(cfg.fft_size));
  require(cfg.hop >= 1, "stft: hop must be >= 1");
  require(cfg.window_len >= 2, "stft: window_len must be >= 2");
  require(cfg.hop <= cfg.window_len, "stft: hop must not exceed window_len");
  require(cfg.window_len <= cfg.fft_size, "stft: window_len must not exceed fft_size");
}

int stft_bins(const StftConfig& cfg) { return cfg.fft_size / 2 + 1; }

int stft_frames(int64_t samples, const StftConfig& cfg) {
  require(samples >= 1, "stft: empty signal");
  return static_cast<int>(samples / cfg.hop) + 1;
}

std::vector<double> hann_window(int len) {
  std::vector<double> w(len);
  const double pi = 3.14159265358979323846;
  for (int n = 0; n < len; ++n) w[n] = 0.5 * (1.0 - std::cos(2.0 * pi * n / (len - 1)));
  return w;
}

FramePlan plan_frames(int64_t samples, const StftConfig& cfg) {
  validate_stft(cfg);
  FramePlan p;
  p.source_len = samples;
  p.extended_len = std::max<int64_t>(samples, cfg.window_len);
  const int64_t pad = cfg.window_len / 2;
  p.padded_len = p.extended_len + 2 * pad;
  p.frames = stft_frames(samples, cfg);
  p.hop = cfg.hop;
  p.window_len = cfg.window_len;
  p.window = hann_window(cfg.window_len);
  p.src_index.resize(p.padded_len);
  const int64_t n = p.extended_len;
  for (int64_t pos = 0; pos < p.padded_len; ++pos) {
    int64_t i = pos - pad;
    if (i < 0) i = -i;                  // reflect around the first sample
    if (i >= n) i = 2 * n - 2 - i;      // reflect around the last sample
    p.src_index[pos] = i;
  }
  return p;
}

ad::Array stft_magnitude(const std::vector<double>& x, const StftConfig& cfg) {
  const FramePlan plan = plan_frames(static_cast<int64_t>(x.size()), cfg);
  const int B = stft_bins(cfg);
  ad::Array mag(ad::Shape{plan.frames, B});
  std::vector<std::complex<double>> buf(cfg.fft_size);
  for (int f = 0; f < plan.frames; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    const int64_t start = int64_t(f) * plan.hop;
    for (int n = 0; n < plan.window_len; ++n)
      buf[n] = plan.sample(x.data(), start + n) * plan.window[n];
    fft_radix2(buf);
    for (int b = 0; b < B; ++b) mag.v[int64_t(f) * B + b] = std::abs(buf[b]);
  }
  return mag;
}

double stft_loss(const std::vector<double>& x, const std::vector<double>& ref,
                 const StftConfig& cfg) {
  require(x.size() == ref.size(), "stft_loss: signal lengths differ (" +
                                      std::to_string(x.size()) + " vs " +
                                      std::to_string(ref.size()) + ")");
  const ad::Array mx = stft_magnitude(x, cfg);
  const ad::Array mr = stft_magnitude(ref, cfg);
  double acc = 0.0;
  for (int64_t i = 0; i < mx.size(); ++i) {
    const double d = mx.v[i] - mr.v[i];
    acc += d * d;
  }
  return acc / double(mx.size());
}

}  // namespace clar::dsp
