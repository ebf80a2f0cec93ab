// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "harness/checkpoint.hpp"
#include "harness/config.hpp"
#include "harness/dataset.hpp"

namespace clar::harness {

inline constexpr const char* kVersion = "1.0.0";

struct TrainTeacherResult {
  std::string checkpoint_path;
  double final_nll = 0.0;
  std::vector<double> nll_history;  // one entry per metrics row
};
TrainTeacherResult run_train_teacher(const ExperimentConfig& cfg);

struct DistillResult {
  std::string checkpoint_path;
  int64_t aborted_steps = 0;
  std::vector<double> reg_kl_history;   // kl + reg per metrics row
  std::vector<double> overlap_history;  // histogram overlap per snapshot
};
DistillResult run_distill(const ExperimentConfig& cfg, const std::string& teacher_ckpt);

// Generates num_samples from a checkpoint (teacher: sequential; student: one
// parallel pass). The conditioner comes from cond_wav when given, otherwise
// from a clip synthesized with the config's data section.
void run_sample(const ExperimentConfig& cfg, const std::string& ckpt_path, int64_t num_samples,
                uint64_t seed, double temperature, const std::string& out_wav,
                const std::string& cond_wav = "");

struct BenchReport {
  int64_t num_samples = 0;
  int teacher_layers = 0;
  int student_layers = 0;
  double teacher_samples_per_sec = 0.0;
  double student_samples_per_sec = 0.0;
  double speedup = 0.0;
  int workers = 1;
};
BenchReport run_bench(const ExperimentConfig& cfg, const std::string& teacher_ckpt,
                      const std::string& student_ckpt, int64_t num_samples);
std::string format_bench(const BenchReport& r);

struct EvalKlResult {
  double mean = 0.0;
  double std_error = 0.0;
  int64_t draws = 0;
};
EvalKlResult run_eval_kl(const ExperimentConfig& cfg, const std::string& teacher_ckpt,
                         const std::string& student_ckpt, int64_t draws);

}  // namespace clar::harness
