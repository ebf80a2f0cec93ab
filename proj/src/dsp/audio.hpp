// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace clar::dsp {

struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;
  int64_t length() const { return static_cast<int64_t>(samples.size()); }
};

// Snap to the 16-bit grid k/32768, k in [-32768, 32767].
double quantize16(double x);
// Grid spacing of quantize16; dequantization noise is uniform in [0, this).
inline constexpr double kQuantStep = 1.0 / 32768.0;

// 16-bit PCM mono little-endian RIFF. Writing clamps to [-1, 1]; values
// already on the quantize16 grid round-trip exactly.
void write_wav(const std::string& path, const AudioClip& clip);
AudioClip read_wav(const std::string& path);

}  // namespace clar::dsp
