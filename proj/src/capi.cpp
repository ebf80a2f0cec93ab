// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "clarinet/clarinet.h"

#include <cstring>
#include <iostream>
#include <string>

#include "core/error.hpp"
#include "harness/checkpoint.hpp"
#include "harness/commands.hpp"
#include "harness/config.hpp"
#include "verify/suites.hpp"

struct clar_config {
  clar::harness::KvConfig kv;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return CLAR_OK;
  } catch (const clar::Error& e) {
    return fail(static_cast<int>(e.status()), e.what());
  } catch (const std::exception& e) {
    return fail(CLAR_ERROR, e.what());
  } catch (...) {
    return fail(CLAR_ERROR, "unknown error");
  }
}

void copy_out(char* buf, size_t cap, const std::string& s) {
  if (!buf || cap == 0) return;
  const size_t n = std::min(cap - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

const clar_config* need(const clar_config* cfg) {
  clar::require(cfg != nullptr, "null config handle");
  return cfg;
}

std::string need_str(const char* s, const char* what) {
  clar::require(s != nullptr && *s != '\0', std::string(what) + " must not be empty");
  return s;
}

clar::harness::ExperimentConfig materialize(const clar_config* cfg) {
  return clar::harness::ExperimentConfig::from_kv(need(cfg)->kv);
}

}  // namespace

extern "C" {

const char* clar_version(void) { return clar::harness::kVersion; }

const char* clar_last_error(void) { return g_last_error.c_str(); }

const char* clar_preset_names(void) {
  static const std::string names = [] {
    std::string s;
    for (const auto& n : clar::harness::preset_names()) s += (s.empty() ? "" : ",") + n;
    return s;
  }();
  return names.c_str();
}

int clar_config_create(const char* preset, clar_config** out) {
  return guarded([&] {
    clar::require(out != nullptr, "null output pointer");
    if (preset == nullptr || *preset == '\0')
      *out = new clar_config{};  // built-in defaults
    else
      *out = new clar_config{clar::harness::preset_config(preset)};
  });
}

int clar_config_load(const char* path, clar_config** out) {
  return guarded([&] {
    clar::require(out != nullptr, "null output pointer");
    *out = new clar_config{
        clar::harness::KvConfig::parse_file(need_str(path, "config path"))};
  });
}

void clar_config_destroy(clar_config* cfg) { delete cfg; }

int clar_config_set(clar_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    clar::require(cfg != nullptr, "null config handle");
    clar::require(value != nullptr, "null config value");
    cfg->kv.set(need_str(key, "config key"), value);
  });
}

int clar_config_get(const clar_config* cfg, const char* key, char* buf, size_t cap) {
  return guarded([&] {
    const std::string v = need(cfg)->kv.get(need_str(key, "config key"));
    clar::require(buf != nullptr && cap > v.size(), "output buffer too small");
    copy_out(buf, cap, v);
  });
}

int clar_config_get_or(const clar_config* cfg, const char* key, const char* dflt, char* buf,
                       size_t cap) {
  return guarded([&] {
    const std::string v =
        need(cfg)->kv.get_or(need_str(key, "config key"), dflt ? dflt : "");
    clar::require(buf != nullptr && cap > v.size(), "output buffer too small");
    copy_out(buf, cap, v);
  });
}

int clar_config_apply_env(clar_config* cfg) {
  return guarded([&] {
    clar::require(cfg != nullptr, "null config handle");
    clar::harness::apply_env_overrides(cfg->kv);
  });
}

int clar_config_validate(const clar_config* cfg) {
  return guarded([&] { (void)materialize(cfg); });
}

int clar_train_teacher(const clar_config* cfg, char* ckpt_path_out, size_t cap,
                       double* final_nll_out) {
  return guarded([&] {
    const auto r = clar::harness::run_train_teacher(materialize(cfg));
    copy_out(ckpt_path_out, cap, r.checkpoint_path);
    if (final_nll_out) *final_nll_out = r.final_nll;
  });
}

int clar_distill(const clar_config* cfg, const char* teacher_ckpt, char* ckpt_path_out,
                 size_t cap, int64_t* aborted_out) {
  return guarded([&] {
    const auto r = clar::harness::run_distill(materialize(cfg),
                                              need_str(teacher_ckpt, "teacher checkpoint"));
    copy_out(ckpt_path_out, cap, r.checkpoint_path);
    if (aborted_out) *aborted_out = r.aborted_steps;
  });
}

int clar_sample(const clar_config* cfg, const char* ckpt_path, int64_t num_samples,
                uint64_t seed, double temperature, const char* out_wav, const char* cond_wav) {
  return guarded([&] {
    clar::harness::run_sample(materialize(cfg), need_str(ckpt_path, "checkpoint path"),
                              num_samples, seed, temperature,
                              need_str(out_wav, "output wav path"),
                              cond_wav ? cond_wav : "");
  });
}

int clar_bench(const clar_config* cfg, const char* teacher_ckpt, const char* student_ckpt,
               int64_t num_samples, char* report_out, size_t cap, double* speedup_out) {
  return guarded([&] {
    const auto r = clar::harness::run_bench(materialize(cfg),
                                            need_str(teacher_ckpt, "teacher checkpoint"),
                                            need_str(student_ckpt, "student checkpoint"),
                                            num_samples);
    copy_out(report_out, cap, clar::harness::format_bench(r));
    if (speedup_out) *speedup_out = r.speedup;
  });
}

int clar_eval_kl(const clar_config* cfg, const char* teacher_ckpt, const char* student_ckpt,
                 int64_t draws, double* mean_out, double* std_error_out, int64_t* draws_out) {
  return guarded([&] {
    const auto r = clar::harness::run_eval_kl(materialize(cfg),
                                              need_str(teacher_ckpt, "teacher checkpoint"),
                                              need_str(student_ckpt, "student checkpoint"), draws);
    if (mean_out) *mean_out = r.mean;
    if (std_error_out) *std_error_out = r.std_error;
    if (draws_out) *draws_out = r.draws;
  });
}

int clar_verify(const char* suite, int verbose, int* failures_out) {
  return guarded([&] {
    const int failures =
        clar::verify::run_suite(need_str(suite, "suite name"), std::cout, verbose != 0);
    if (failures_out) *failures_out = failures;
  });
}

int clar_checkpoint_kind(const char* path, int* kind_out) {
  return guarded([&] {
    clar::require(kind_out != nullptr, "null output pointer");
    const auto kind =
        clar::harness::peek_checkpoint_kind(need_str(path, "checkpoint path"));
    *kind_out = kind == clar::harness::CheckpointKind::Teacher ? CLAR_CKPT_TEACHER
                                                               : CLAR_CKPT_STUDENT;
  });
}

}  // extern "C"
