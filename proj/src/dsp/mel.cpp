// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "dsp/mel.hpp"

#include <cmath>

namespace clar::dsp {

namespace {
double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }
}  // namespace

ad::Array mel_filterbank(int bands, const StftConfig& cfg, int sample_rate) {
  validate_stft(cfg);
  require(sample_rate > 0, "mel_filterbank: sample rate must be positive");
  const int B = stft_bins(cfg);
  require(bands >= 1, "mel_filterbank: bands must be >= 1");
  require(bands <= B - 2, "mel_filterbank: " + std::to_string(bands) +
                              " bands do not fit in " + std::to_string(B) + " bins");
  const double nyquist = sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  // band edges: bands + 2 points uniform in mel
  std::vector<double> edge_bin(bands + 2);
  for (int m = 0; m < bands + 2; ++m) {
    const double hz = mel_to_hz(mel_max * m / (bands + 1));
    edge_bin[m] = hz / nyquist * (B - 1);
  }
  ad::Array fb(ad::Shape{bands, B});
  for (int m = 0; m < bands; ++m) {
    const double lo = edge_bin[m], mid = edge_bin[m + 1], hi = edge_bin[m + 2];
    for (int b = 0; b < B; ++b) {
      double w = 0.0;
      if (b > lo && b < mid)
        w = (b - lo) / (mid - lo);
      else if (b >= mid && b < hi)
        w = (hi - b) / (hi - mid);
      else if (double(b) == mid)
        w = 1.0;
      fb.v[int64_t(m) * B + b] = w;
    }
  }
  return fb;
}

ad::Array log_mel_frames(const AudioClip& clip, int bands, const StftConfig& cfg) {
  const ad::Array mag = stft_magnitude(clip.samples, cfg);
  const ad::Array fb = mel_filterbank(bands, cfg, clip.sample_rate);
  const int frames = mag.shape[0];
  const int B = mag.shape[1];
  ad::Array out(ad::Shape{frames, bands});
  for (int f = 0; f < frames; ++f)
    for (int m = 0; m < bands; ++m) {
      double acc = 0.0;
      for (int b = 0; b < B; ++b) acc += fb.v[int64_t(m) * B + b] * mag.v[int64_t(f) * B + b];
      out.v[int64_t(f) * bands + m] = std::log(std::max(acc, 1e-10));
    }
  return out;
}

MelStats compute_mel_stats(const std::vector<ad::Array>& raw_frames) {
  require(!raw_frames.empty(), "compute_mel_stats: empty corpus");
  MelStats s;
  s.lmin = raw_frames[0].v.at(0);
  s.lmax = s.lmin;
  for (const auto& a : raw_frames)
    for (double x : a.v) {
      s.lmin = std::min(s.lmin, x);
      s.lmax = std::max(s.lmax, x);
    }
  if (s.lmax <= s.lmin) s.lmax = s.lmin + 1.0;  // constant corpus maps to 0
  return s;
}

ad::Array normalize_mel(const ad::Array& raw, const MelStats& stats) {
  ad::Array out(raw.shape);
  const double span = stats.lmax - stats.lmin;
  require(span > 0.0, "normalize_mel: degenerate stats");
  for (int64_t i = 0; i < raw.size(); ++i) {
    double v = (raw.v[i] - stats.lmin) / span;
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    out.v[i] = v;
  }
  return out;
}

ad::Array upsample_frames(const ad::Array& frames, int hop, int64_t target_len) {
  require(frames.shape.size() == 2, "upsample_frames: expected [frames, bands]");
  const int F = frames.shape[0];
  const int bands = frames.shape[1];
  require(hop >= 1, "upsample_frames: hop must be >= 1");
  require(target_len >= 1, "upsample_frames: target length must be >= 1");
  require(target_len <= int64_t(F) * hop,
          "upsample_frames: target length " + std::to_string(target_len) +
              " exceeds conditioner coverage " + std::to_string(int64_t(F) * hop));
  ad::Array out(ad::Shape{bands, static_cast<int>(target_len)});
  for (int64_t t = 0; t < target_len; ++t) {
    const int f = static_cast<int>(t / hop);
    for (int m = 0; m < bands; ++m)
      out.v[int64_t(m) * target_len + t] = frames.v[int64_t(f) * bands + m];
  }
  return out;
}

}  // namespace clar::dsp
