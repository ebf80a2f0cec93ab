// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Everything goes through the public C API; no core
// headers are included here.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clarinet/clarinet.h"

namespace {

struct ConfigDeleter {
  void operator()(clar_config* c) const { clar_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<clar_config, ConfigDeleter>;

[[noreturn]] void die(int status) {
  std::fprintf(stderr, "error: %s\n", clar_last_error());
  std::exit(status);
}

void check(int status) {
  if (status != CLAR_OK) die(status);
}

struct CommonOpts {
  std::string config_file;
  std::string preset;
  std::vector<std::string> sets;
  std::string seed;  // empty: not given
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_file, "Config file (key = value sections)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--preset", o.preset,
                  std::string("Built-in preset (") + clar_preset_names() + ")");
  cmd->add_option("--set", o.sets, "Override a config key, e.g. --set distill.steps=100");
  cmd->add_option("--seed", o.seed, "Seed override (beats CLARINET_SEED and the config)");
}

// file/preset -> CLARINET_SEED -> --set overrides -> --seed
ConfigPtr build_config(const CommonOpts& o) {
  if (!o.config_file.empty() && !o.preset.empty()) {
    std::fprintf(stderr, "error: --config and --preset are mutually exclusive\n");
    std::exit(CLAR_CONFIG_ERROR);
  }
  clar_config* raw = nullptr;
  if (!o.config_file.empty())
    check(clar_config_load(o.config_file.c_str(), &raw));
  else
    check(clar_config_create(o.preset.c_str(), &raw));
  ConfigPtr cfg(raw);
  check(clar_config_apply_env(cfg.get()));
  for (const auto& kv : o.sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      std::exit(CLAR_CONFIG_ERROR);
    }
    check(clar_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (!o.seed.empty()) check(clar_config_set(cfg.get(), "run.seed", o.seed.c_str()));
  check(clar_config_validate(cfg.get()));
  return cfg;
}

uint64_t config_seed(const clar_config* cfg) {
  char buf[64];
  check(clar_config_get_or(cfg, "run.seed", "1", buf, sizeof buf));
  try {
    return std::stoull(buf);
  } catch (const std::exception&) {
    std::fprintf(stderr, "error: run.seed must be an unsigned integer, got '%s'\n", buf);
    std::exit(CLAR_CONFIG_ERROR);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian autoregressive teacher / flow student audio toolkit"};
  app.set_version_flag("--version", std::string("clarinet ") + clar_version());
  app.require_subcommand(1);

  // train-teacher
  CommonOpts train_opts;
  CLI::App* train = app.add_subcommand("train-teacher", "Train the autoregressive teacher");
  add_common(train, train_opts);

  // distill
  CommonOpts distill_opts;
  std::string distill_teacher;
  CLI::App* distill = app.add_subcommand("distill", "Distill a flow student from a teacher");
  add_common(distill, distill_opts);
  distill->add_option("--teacher", distill_teacher, "Teacher checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  // sample
  CommonOpts sample_opts;
  std::string sample_ckpt, sample_out, sample_cond;
  int64_t sample_n = 4096;
  double sample_temp = 1.0;
  CLI::App* sample = app.add_subcommand("sample", "Generate audio from a checkpoint");
  add_common(sample, sample_opts);
  sample->add_option("--checkpoint", sample_ckpt, "Teacher or student checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  sample->add_option("--out", sample_out, "Output WAV path")->required();
  sample->add_option("--num-samples", sample_n, "Samples to generate")
      ->check(CLI::PositiveNumber);
  sample->add_option("--temperature", sample_temp, "Noise temperature (0 = mean trajectory)")
      ->check(CLI::NonNegativeNumber);
  sample->add_option("--cond-wav", sample_cond, "Conditioning audio (defaults to synthetic)")
      ->check(CLI::ExistingFile);

  // bench
  CommonOpts bench_opts;
  std::string bench_teacher, bench_student;
  int64_t bench_n = 4096;
  CLI::App* bench =
      app.add_subcommand("bench", "Compare teacher and student generation throughput");
  add_common(bench, bench_opts);
  bench->add_option("--teacher", bench_teacher, "Teacher checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  bench->add_option("--student", bench_student, "Student checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  bench->add_option("--num-samples", bench_n, "Samples to generate")->check(CLI::PositiveNumber);

  // verify
  std::string verify_suite = "all";
  bool verify_verbose = false;
  CLI::App* verify = app.add_subcommand("verify", "Run numeric self-check suites");
  verify->add_option("--suite", verify_suite, "kl, iaf, gradients, sequence-kl, stft or all");
  verify->add_flag("--verbose", verify_verbose, "Print details on passing checks too");

  // eval-kl
  CommonOpts eval_opts;
  std::string eval_teacher, eval_student;
  int64_t eval_draws = 64;
  CLI::App* evalkl =
      app.add_subcommand("eval-kl", "Estimate the student-to-teacher sequence divergence");
  add_common(evalkl, eval_opts);
  evalkl->add_option("--teacher", eval_teacher, "Teacher checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  evalkl->add_option("--student", eval_student, "Student checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  evalkl->add_option("--draws", eval_draws, "Monte Carlo draws")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : CLAR_CONFIG_ERROR;
  }

  char path[4096];
  if (train->parsed()) {
    ConfigPtr cfg = build_config(train_opts);
    double nll = 0.0;
    check(clar_train_teacher(cfg.get(), path, sizeof path, &nll));
    std::printf("teacher checkpoint: %s\n", path);
    std::printf("final nll: %.6f\n", nll);
  } else if (distill->parsed()) {
    ConfigPtr cfg = build_config(distill_opts);
    int64_t aborted = 0;
    check(clar_distill(cfg.get(), distill_teacher.c_str(), path, sizeof path, &aborted));
    std::printf("student checkpoint: %s\n", path);
    std::printf("aborted steps: %lld\n", static_cast<long long>(aborted));
  } else if (sample->parsed()) {
    ConfigPtr cfg = build_config(sample_opts);
    check(clar_sample(cfg.get(), sample_ckpt.c_str(), sample_n, config_seed(cfg.get()),
                      sample_temp, sample_out.c_str(),
                      sample_cond.empty() ? nullptr : sample_cond.c_str()));
    std::printf("wrote %s (%lld samples)\n", sample_out.c_str(),
                static_cast<long long>(sample_n));
  } else if (bench->parsed()) {
    ConfigPtr cfg = build_config(bench_opts);
    char report[1024];
    double speedup = 0.0;
    check(clar_bench(cfg.get(), bench_teacher.c_str(), bench_student.c_str(), bench_n, report,
                     sizeof report, &speedup));
    std::fputs(report, stdout);
  } else if (verify->parsed()) {
    int failures = 0;
    check(clar_verify(verify_suite.c_str(), verify_verbose ? 1 : 0, &failures));
    if (failures > 0) {
      std::fprintf(stderr, "%d check(s) failed\n", failures);
      return CLAR_ERROR;
    }
    std::printf("all checks passed\n");
  } else if (evalkl->parsed()) {
    ConfigPtr cfg = build_config(eval_opts);
    double mean = 0.0, se = 0.0;
    int64_t draws = 0;
    check(clar_eval_kl(cfg.get(), eval_teacher.c_str(), eval_student.c_str(), eval_draws, &mean,
                       &se, &draws));
    std::printf("sequence kl estimate: %.6f +- %.6f (%lld draws)\n", mean, se,
                static_cast<long long>(draws));
  }
  return 0;
}
