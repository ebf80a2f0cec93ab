// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ad/array.hpp"
#include "dsp/audio.hpp"
#include "dsp/stft.hpp"

namespace clar::dsp {

// Triangular filterbank on the mel scale, rows [bands, bins]. Each row sums
// the magnitudes under one triangle; triangles span 0 Hz .. sample_rate/2.
ad::Array mel_filterbank(int bands, const StftConfig& cfg, int sample_rate);

// Raw log-mel frames, [frames, bands]; energies are floored at 1e-10 before
// the log.
ad::Array log_mel_frames(const AudioClip& clip, int bands, const StftConfig& cfg);

// Per-corpus normalization bounds over raw log-mel values.
struct MelStats {
  double lmin = 0.0;
  double lmax = 1.0;
};
MelStats compute_mel_stats(const std::vector<ad::Array>& raw_frames);

// Maps raw log values into [0,1] using the stored bounds; out-of-range
// values clamp, so the output is always inside the unit interval.
ad::Array normalize_mel(const ad::Array& raw, const MelStats& stats);

// Frame-rate conditioner to sample rate by repeating each frame hop times.
// target_len must not exceed frames * hop.
ad::Array upsample_frames(const ad::Array& frames, int hop, int64_t target_len);

}  // namespace clar::dsp
