// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ad/adam.hpp"
#include "distill/kl.hpp"
#include "distill/loss.hpp"
#include "model/student.hpp"
#include "model/teacher.hpp"

namespace clar::distill {

struct GradPolicyConfig {
  double norm_threshold = 1000.0;  // global L2 norm above this switches clips
  double tight_clip = 0.1;
  double loose_clip = 5.0;
};

struct GradPolicyResult {
  double global_norm = 0.0;
  bool tight = false;  // true when the tight clip range was applied
};

// Clips every gradient value to [-c, c]; c depends on the global norm.
GradPolicyResult apply_grad_policy(std::vector<ad::Array>& grads, const GradPolicyConfig& cfg);

struct DistillStepMetrics {
  int64_t step = 0;
  double kl = 0.0;
  double reg = 0.0;
  double stft = 0.0;
  double grad_norm = 0.0;
  double lr = 0.0;
  bool masked = false;
  bool aborted = false;
};

struct DistillBatchItem {
  const std::vector<double>* ref = nullptr;  // reference clip samples
  const ad::Array* cond_up = nullptr;        // upsampled mel conditioner
};

// One histogram snapshot of teacher and student log sigmas along student
// samples: 100 uniform bins over [-10, 2], out-of-range values land in the
// edge bins.
struct LogSigmaHistogram {
  static constexpr int kBins = 100;
  static constexpr double kLo = -10.0;
  static constexpr double kHi = 2.0;
  std::vector<int64_t> count_p = std::vector<int64_t>(kBins, 0);
  std::vector<int64_t> count_q = std::vector<int64_t>(kBins, 0);
  void add(const std::vector<double>& ls_p, const std::vector<double>& ls_q);
  // overlap of the two normalized histograms, in [0, 1]
  double overlap() const;
  static double bin_edge(int i);
};

// Runs the distillation optimization: student trainable, teacher and the
// shared conditioner projection frozen.
class Distiller {
 public:
  Distiller(const model::TeacherModel& teacher, model::StudentModel& student,
            DistillLossConfig loss_cfg, GradPolicyConfig grad_cfg, ad::AdamConfig adam_cfg,
            const dsp::StftConfig& stft, uint64_t seed);

  DistillStepMetrics step(const std::vector<DistillBatchItem>& batch);

  // histogram over the most recent step's per-timestep log sigmas
  const LogSigmaHistogram& last_histogram() const { return last_hist_; }
  int64_t steps_done() const { return step_; }
  int64_t aborted_steps() const { return aborted_; }

 private:
  const model::TeacherModel& teacher_;
  model::StudentModel& student_;
  DistillLossConfig loss_cfg_;
  GradPolicyConfig grad_cfg_;
  dsp::StftConfig stft_;
  ad::Adam opt_;
  std::vector<std::pair<std::string, ad::Array*>> params_;
  uint64_t seed_;
  int64_t step_ = 0;
  int64_t aborted_ = 0;
  LogSigmaHistogram last_hist_;
};

}  // namespace clar::distill
