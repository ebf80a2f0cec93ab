/* Copyright (c) 2026 Clarinet Authors */
/* SPDX-License-Identifier: Apache-2.0 */
#ifndef CLARINET_CLARINET_H
#define CLARINET_CLARINET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(CLARINET_BUILD)
#define CLARINET_API __declspec(dllexport)
#else
#define CLARINET_API __declspec(dllimport)
#endif
#else
#define CLARINET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Nonzero calls leave a message in clar_last_error(). */
#define CLAR_OK 0
#define CLAR_ERROR 1          /* internal / unexpected failure */
#define CLAR_CONFIG_ERROR 2   /* bad usage, bad config, bad file */
#define CLAR_NUMERIC_ERROR 3  /* non-finite values, degenerate numerics */

#define CLAR_CKPT_TEACHER 0
#define CLAR_CKPT_STUDENT 1

typedef struct clar_config clar_config;

CLARINET_API const char* clar_version(void);

/* Message from the most recent failing call on this thread. */
CLARINET_API const char* clar_last_error(void);

/* Comma-separated built-in preset names (static storage). */
CLARINET_API const char* clar_preset_names(void);

/* ---- configuration ------------------------------------------------- */

/* preset NULL or "" starts from the built-in defaults. */
CLARINET_API int clar_config_create(const char* preset, clar_config** out);
CLARINET_API int clar_config_load(const char* path, clar_config** out);
CLARINET_API void clar_config_destroy(clar_config* cfg);

/* Keys are dotted, e.g. "run.seed", "distill.steps". */
CLARINET_API int clar_config_set(clar_config* cfg, const char* key, const char* value);
CLARINET_API int clar_config_get(const clar_config* cfg, const char* key, char* buf, size_t cap);

/* Like clar_config_get but falls back to dflt when the key is unset. */
CLARINET_API int clar_config_get_or(const clar_config* cfg, const char* key, const char* dflt,
                                    char* buf, size_t cap);

/* Folds CLARINET_SEED from the environment into run.seed. Call before any
 * explicit seed override so the command line wins. */
CLARINET_API int clar_config_apply_env(clar_config* cfg);

/* Validates the full configuration without running anything. */
CLARINET_API int clar_config_validate(const clar_config* cfg);

/* ---- operations ----------------------------------------------------- */

/* Trains the autoregressive teacher on the synthetic corpus described by the
 * config. Writes <out_dir>/teacher.ckpt plus metrics and the dataset.
 * ckpt_path_out (optional) receives the checkpoint path; final_nll_out
 * (optional) the last training loss. */
CLARINET_API int clar_train_teacher(const clar_config* cfg, char* ckpt_path_out, size_t cap,
                                    double* final_nll_out);

/* Distills a flow student against a trained teacher checkpoint. Writes
 * <out_dir>/student.ckpt, metrics and log-sigma histograms. aborted_out
 * (optional) receives the number of steps skipped by the stability guard. */
CLARINET_API int clar_distill(const clar_config* cfg, const char* teacher_ckpt,
                              char* ckpt_path_out, size_t cap, int64_t* aborted_out);

/* Generates num_samples of audio from a teacher or student checkpoint into a
 * 16-bit mono WAV. cond_wav (optional, may be NULL or empty) supplies the
 * conditioning audio; otherwise the config's data section is synthesized. */
CLARINET_API int clar_sample(const clar_config* cfg, const char* ckpt_path, int64_t num_samples,
                             uint64_t seed, double temperature, const char* out_wav,
                             const char* cond_wav);

/* Times sequential teacher generation against one-pass student generation on
 * the same conditioner. The two checkpoints must have matched layer totals.
 * report_out (optional) receives a human-readable summary. */
CLARINET_API int clar_bench(const clar_config* cfg, const char* teacher_ckpt,
                            const char* student_ckpt, int64_t num_samples, char* report_out,
                            size_t cap, double* speedup_out);

/* Monte Carlo estimate of the sequence-level divergence from the student to
 * the teacher over the config's dataset. */
CLARINET_API int clar_eval_kl(const clar_config* cfg, const char* teacher_ckpt,
                              const char* student_ckpt, int64_t draws, double* mean_out,
                              double* std_error_out, int64_t* draws_out);

/* Runs a named self-check suite ("kl", "iaf", "gradients", "sequence-kl",
 * "stft" or "all"), printing one PASS/FAIL line per check to stdout.
 * failures_out receives the failed-check count; the return status is CLAR_OK
 * even when checks fail. */
CLARINET_API int clar_verify(const char* suite, int verbose, int* failures_out);

/* kind_out receives CLAR_CKPT_TEACHER or CLAR_CKPT_STUDENT. */
CLARINET_API int clar_checkpoint_kind(const char* path, int* kind_out);

#ifdef __cplusplus
}
#endif

#endif /* CLARINET_CLARINET_H */
