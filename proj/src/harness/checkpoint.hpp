// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "dsp/mel.hpp"
#include "model/student.hpp"
#include "model/teacher.hpp"

namespace clar::harness {

// Metadata every checkpoint carries so sampling can rebuild the conditioner
// pipeline without the original config.
struct CheckpointMeta {
  int sample_rate = 4000;
  int mel_bands = 16;
  dsp::StftConfig stft;
  dsp::MelStats mel_stats;
  uint64_t config_hash = 0;
  int64_t trained_steps = 0;
};

enum class CheckpointKind { Teacher, Student };

struct LoadedCheckpoint {
  CheckpointKind kind = CheckpointKind::Teacher;
  CheckpointMeta meta;
  model::TeacherModel teacher;  // valid when kind == Teacher
  model::StudentModel student;  // valid when kind == Student (cond included)
};

// Versioned binary container: magic, version, text header with the
// hyperparameters, then named float64 blobs. Round trips are bit exact.
void save_teacher_checkpoint(const std::string& path, const model::TeacherModel& m,
                             const CheckpointMeta& meta);
void save_student_checkpoint(const std::string& path, const model::StudentModel& m,
                             const model::CondProjection& cond, const CheckpointMeta& meta);
LoadedCheckpoint load_checkpoint(const std::string& path);
CheckpointKind peek_checkpoint_kind(const std::string& path);

}  // namespace clar::harness
