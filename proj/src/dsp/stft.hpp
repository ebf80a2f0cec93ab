// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "ad/array.hpp"

namespace clar::dsp {

struct StftConfig {
  int fft_size = 256;
  int hop = 50;
  int window_len = 200;
};

void validate_stft(const StftConfig& cfg);
int stft_bins(const StftConfig& cfg);  // fft_size/2 + 1

// Frame count depends only on the clip length: floor(T / hop) + 1.
int stft_frames(int64_t samples, const StftConfig& cfg);

// Symmetric Hann window.
std::vector<double> hann_window(int len);

// Framing layout shared by the plain and the differentiable STFT. Clips
// shorter than the window are zero-extended to one window first; the signal
// is then reflect-padded by window_len/2 on both sides.
struct FramePlan {
  int64_t source_len = 0;    // original clip length
  int64_t extended_len = 0;  // max(source_len, window_len)
  int64_t padded_len = 0;
  int frames = 0;
  int hop = 0;
  int window_len = 0;
  std::vector<int64_t> src_index;  // padded position -> extended-signal index
  std::vector<double> window;
  // extended[i] is x[i] for i < source_len and 0 beyond
  double sample(const double* x, int64_t padded_pos) const {
    const int64_t s = src_index[padded_pos];
    return s < source_len ? x[s] : 0.0;
  }
};
FramePlan plan_frames(int64_t samples, const StftConfig& cfg);

// Magnitude spectrogram, [frames, bins].
ad::Array stft_magnitude(const std::vector<double>& x, const StftConfig& cfg);

// Mean squared magnitude difference, normalized by bins and frames.
double stft_loss(const std::vector<double>& x, const std::vector<double>& ref,
                 const StftConfig& cfg);

}  // namespace clar::dsp
