// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ad/tape.hpp"
#include "dsp/stft.hpp"

namespace clar::dsp {

// Differentiable magnitude spectrogram, [frames, bins]. Forward values match
// stft_magnitude exactly; the backward pass scatters through the window,
// the DFT and the reflection padding. Bins with zero magnitude pass zero
// gradient (subgradient choice).
ad::Var stft_magnitude_var(ad::Var x, const StftConfig& cfg);

// Mean squared magnitude difference against a fixed reference signal.
ad::Var stft_loss_var(ad::Var x, const std::vector<double>& ref, const StftConfig& cfg);

}  // namespace clar::dsp
