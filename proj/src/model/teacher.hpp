// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dsp/audio.hpp"
#include "model/wavenet.hpp"

namespace clar::model {

struct TeacherHyper {
  WaveNetHyper net;
  int mel_bands = 16;
  // training-time floor on predicted log sigma; never applied when sampling
  double log_sigma_floor = -9.0;
};

// Autoregressive Gaussian model: x_t ~ N(mu(x_<t, c), sigma(x_<t, c)).
struct TeacherModel {
  TeacherHyper hy;
  WaveNetParams net;
  CondProjection cond;

  void init(uint64_t seed);
  std::vector<std::pair<std::string, ad::Array*>> named_params();

  // Projected conditioner features from the upsampled mel conditioner.
  ad::Var cond_features_var(ad::Tape& t, const ad::Array& cond_up, bool trainable) const;
  ad::Array cond_features(const ad::Array& cond_up) const;

  // Teacher-forced tape forward over a training clip.
  GaussianOutVar forward_teacher_forced(ad::Tape& t, const std::vector<double>& x,
                                        const ad::Array& cond_up, bool trainable) const;

  // Forward where the input sequence is itself a tape value (the
  // distillation path; parameters are bound frozen).
  GaussianOutVar forward_on(ad::Tape& t, ad::Var x, ad::Var cond_feat) const;

  // Mean negative log likelihood per timestep with the training floor on
  // log sigma. Throws NumericError naming the first bad timestep if the
  // prediction is non-finite.
  ad::Var nll_var(ad::Tape& t, const GaussianOutVar& out, const std::vector<double>& x) const;

  // Fraction of timesteps whose raw log sigma lies at or below the floor.
  double clip_fraction(const GaussianOutVar& out) const;

  // Plain teacher-forced forward (no tape).
  GaussianOut forward_plain(const std::vector<double>& x, const ad::Array& cond_up,
                            int workers) const;

  // Sequential generation; one network pass per sample. temperature scales
  // sigma (0 gives the deterministic mean trajectory). No sigma floor here.
  dsp::AudioClip ar_sample(const ad::Array& cond_up, int64_t num_samples, uint64_t seed,
                           double temperature, int sample_rate, GaussianOut* traj = nullptr) const;
};

}  // namespace clar::model
