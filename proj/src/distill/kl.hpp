// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "model/student.hpp"
#include "model/teacher.hpp"

namespace clar::distill {

// All closed forms take natural-log sigmas; the sigma-domain wrappers
// validate positivity. q is the approximating (student) Gaussian, p the
// reference (teacher) Gaussian.

// KL(q || p) = log(sp/sq) + (sq^2 - sp^2 + (mp - mq)^2) / (2 sp^2)
double gaussian_kl_ls(double mu_q, double ls_q, double mu_p, double ls_p);
double gaussian_kl(double mu_q, double sigma_q, double mu_p, double sigma_p);

// Forward direction, KL(p || q).
double gaussian_kl_forward_ls(double mu_q, double ls_q, double mu_p, double ls_p);

// H(q) = 0.5 log(2 pi sigma^2) + 0.5
double gaussian_entropy_ls(double ls);
double gaussian_entropy(double sigma);

// H(q, p) = 0.5 log(2 pi sp^2) + (sq^2 + (mp - mq)^2) / (2 sp^2)
double gaussian_cross_entropy_ls(double mu_q, double ls_q, double mu_p, double ls_p);
double gaussian_cross_entropy(double mu_q, double sigma_q, double mu_p, double sigma_p);

// lambda * (ls_p - ls_q)^2 + KL(q || p)
double regularized_kl_ls(double mu_q, double ls_q, double mu_p, double ls_p, double lambda);

double gaussian_log_pdf(double x, double mu, double ls);

// Single-step Monte Carlo estimate of KL(q || p) from n draws of q.
struct McEstimate {
  double mean = 0.0;
  double variance = 0.0;  // sample variance of the integrand
  double std_error = 0.0;
  int64_t draws = 0;
};
McEstimate mc_kl_estimate(double mu_q, double ls_q, double mu_p, double ls_p, int64_t n,
                          uint64_t seed);

// Sequence-level KL(q || p) between a flow student and an autoregressive
// teacher over a clip: draws base noise, pushes it through the student, and
// sums the per-timestep closed-form KL along the teacher's trajectory. The
// per-draw sum is an unbiased one-sample estimate of the sequence KL.
McEstimate sequence_kl_estimate(const model::TeacherModel& teacher,
                                const model::StudentModel& student, const ad::Array& cond_up,
                                const model::CondProjection& cond_proj, int64_t num_samples,
                                int64_t draws, uint64_t seed, int workers = 1);

}  // namespace clar::distill
