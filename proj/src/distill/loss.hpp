// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ad/tape.hpp"
#include "dsp/stft.hpp"

namespace clar::distill {

enum class KlDirection { Reverse, Forward };

struct DistillLossConfig {
  double lambda = 4.0;                 // weight of the log-sigma regularizer
  KlDirection direction = KlDirection::Reverse;
  double log_sigma_floor = -6.0;       // floor inside the KL term only
  double kl_weight = 1.0;
  double stft_weight = 1.0;
  double mask_threshold = 10.0;        // per-timestep mean KL above this is masked
  int64_t warmup_steps = 500;          // masking disabled before this step
};

struct GaussianPairVar {
  ad::Var mu_q, ls_q;  // student (accumulated output distribution)
  ad::Var mu_p, ls_p;  // teacher prediction along the student sample
};

// Per-clip loss terms. kl_term is the mean per-timestep KL with floored log
// sigmas; reg_term is lambda * mean squared log-sigma difference, with the
// raw (unfloored) predictions. When the KL is masked the total keeps only
// the regularizer and the spectral term.
struct DistillLossParts {
  ad::Var total;
  double kl_value = 0.0;    // value of the (unmasked) KL term
  double reg_value = 0.0;   // value of the regularizer term (includes lambda)
  double stft_value = 0.0;
  bool masked = false;
};

DistillLossParts distill_loss(ad::Tape& t, const GaussianPairVar& pair, ad::Var x,
                              const std::vector<double>& ref, const dsp::StftConfig& stft,
                              const DistillLossConfig& cfg, int64_t step);

}  // namespace clar::distill
