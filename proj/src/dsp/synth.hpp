// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "dsp/audio.hpp"

namespace clar::dsp {

struct SynthComponent {
  double freq = 100.0;
  double amp = 0.5;
  double phase = 0.0;
};

struct SynthSpec {
  int sample_rate = 4000;
  int clip_len = 512;
  int num_clips = 4;
  std::vector<SynthComponent> components;
  double noise_amp = 0.0;
  bool phase_jitter = false;  // adds a random per-clip phase to each component
  bool dequantize = false;    // adds uniform noise in [0, 1/32768) after quantization
};

// Deterministic in (spec, seed); every sample passes through the 16-bit grid.
std::vector<AudioClip> synth_dataset(const SynthSpec& spec, uint64_t seed);

}  // namespace clar::dsp
