// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

namespace clar::dsp {

bool is_pow2(int n);

// In-place radix-2 decimation-in-time FFT, forward transform, no scaling.
// Length must be a power of two (checked).
void fft_radix2(std::vector<std::complex<double>>& a);

}  // namespace clar::dsp
