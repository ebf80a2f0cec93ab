// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "dsp/synth.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace clar::dsp {

std::vector<AudioClip> synth_dataset(const SynthSpec& spec, uint64_t seed) {
  require(spec.sample_rate > 0, "synth: sample rate must be positive");
  require(spec.clip_len >= 1, "synth: clip length must be >= 1");
  require(spec.num_clips >= 1, "synth: need at least one clip");
  require(!spec.components.empty(), "synth: need at least one component");
  const double two_pi = 2.0 * 3.14159265358979323846;
  std::vector<AudioClip> clips;
  clips.reserve(spec.num_clips);
  Rng root(seed);
  for (int c = 0; c < spec.num_clips; ++c) {
    Rng rng = root.split(static_cast<uint64_t>(c));
    std::vector<double> phases;
    phases.reserve(spec.components.size());
    for (const auto& comp : spec.components)
      phases.push_back(comp.phase + (spec.phase_jitter ? rng.uniform(0.0, two_pi) : 0.0));

    AudioClip clip;
    clip.sample_rate = spec.sample_rate;
    clip.samples.resize(spec.clip_len);
    for (int t = 0; t < spec.clip_len; ++t) {
      double x = 0.0;
      for (size_t i = 0; i < spec.components.size(); ++i) {
        const auto& comp = spec.components[i];
        x += comp.amp * std::sin(two_pi * comp.freq * t / spec.sample_rate + phases[i]);
      }
      if (spec.noise_amp > 0.0) x += spec.noise_amp * rng.gauss();
      clip.samples[t] = quantize16(x);
    }
    if (spec.dequantize)
      for (auto& s : clip.samples) s += rng.uniform() * kQuantStep;
    clips.push_back(std::move(clip));
  }
  return clips;
}

}  // namespace clar::dsp
