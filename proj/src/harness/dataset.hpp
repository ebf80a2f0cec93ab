// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "dsp/mel.hpp"
#include "dsp/synth.hpp"
#include "harness/config.hpp"

namespace clar::harness {

struct Dataset {
  std::vector<dsp::AudioClip> clips;
  std::vector<ad::Array> cond_up;  // upsampled normalized mel per clip, [bands, T]
  dsp::MelStats stats;
};

// Synthesizes the corpus, computes corpus-wide mel stats, and precomputes the
// upsampled conditioners.
Dataset build_dataset(const ExperimentConfig& cfg);

// Conditioner for one clip given frozen stats (e.g. from a checkpoint).
ad::Array conditioner_for(const dsp::AudioClip& clip, int bands, const dsp::StftConfig& stft,
                          const dsp::MelStats& stats, int64_t target_len);

// Writes clip WAVs plus a manifest (path<TAB>start<TAB>length per line) and a
// mel stats file under dir.
void write_dataset(const Dataset& ds, const std::string& dir);

// Reads clips back through a manifest.
std::vector<dsp::AudioClip> load_manifest(const std::string& manifest_path);

void write_mel_stats(const std::string& path, const dsp::MelStats& stats);
dsp::MelStats load_mel_stats(const std::string& path);

}  // namespace clar::harness
