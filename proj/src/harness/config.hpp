// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ad/adam.hpp"
#include "distill/loss.hpp"
#include "distill/trainer.hpp"
#include "dsp/stft.hpp"
#include "dsp/synth.hpp"
#include "model/student.hpp"
#include "model/teacher.hpp"

namespace clar::harness {

// Sectioned key=value store ("section.key" addressing). Lines use
// `key = value`; '#' and ';' start comments; `[section]` opens a section.
class KvConfig {
 public:
  void set(const std::string& dotted_key, const std::string& value);
  bool has(const std::string& dotted_key) const;
  std::string get(const std::string& dotted_key) const;
  std::string get_or(const std::string& dotted_key, const std::string& dflt) const;

  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_string(const std::string& text, const std::string& origin = "<string>");

  // canonical form: sections and keys sorted, one key per line
  std::string serialize() const;
  uint64_t hash() const;  // FNV-1a over the canonical form

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct TrainConfig {
  int64_t steps = 500;
  ad::AdamConfig adam;
  int batch = 1;
  int64_t metrics_interval = 10;
  int64_t checkpoint_interval = 0;  // 0: only final
};

struct DistillRunConfig {
  int64_t steps = 2000;
  ad::AdamConfig adam;
  int batch = 1;
  int64_t metrics_interval = 10;
  int64_t histogram_interval = 200;
  distill::DistillLossConfig loss;
  distill::GradPolicyConfig grad;
};

// Full experiment description materialized from a KvConfig.
struct ExperimentConfig {
  uint64_t seed = 1;
  std::string out_dir = "runs/default";
  int workers = 1;
  dsp::SynthSpec data;
  dsp::StftConfig stft;
  int mel_bands = 16;
  model::TeacherHyper teacher;
  model::StudentHyper student;
  TrainConfig train;
  DistillRunConfig distill;
  uint64_t config_hash = 0;

  static ExperimentConfig from_kv(const KvConfig& kv);
};

// Built-in presets: "smoke", "overfit", "paper-shape".
KvConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// CLARINET_SEED, if set, takes precedence over the config seed. Explicit
// command-line seeds are applied after this, so they win over the env.
void apply_env_overrides(KvConfig& kv);

}  // namespace clar::harness
