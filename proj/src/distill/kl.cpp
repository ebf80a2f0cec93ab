// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "distill/kl.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace clar::distill {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // ln(2*pi)

void check_sigma(double sigma, const char* which) {
  require(std::isfinite(sigma) && sigma > 0.0,
          std::string("gaussian moments: ") + which + " must be positive and finite");
}
}  // namespace

double gaussian_kl_ls(double mu_q, double ls_q, double mu_p, double ls_p) {
  const double dmu = mu_p - mu_q;
  return (ls_p - ls_q) + 0.5 * (std::exp(2.0 * (ls_q - ls_p)) - 1.0) +
         0.5 * dmu * dmu * std::exp(-2.0 * ls_p);
}

double gaussian_kl(double mu_q, double sigma_q, double mu_p, double sigma_p) {
  check_sigma(sigma_q, "sigma_q");
  check_sigma(sigma_p, "sigma_p");
  return gaussian_kl_ls(mu_q, std::log(sigma_q), mu_p, std::log(sigma_p));
}

double gaussian_kl_forward_ls(double mu_q, double ls_q, double mu_p, double ls_p) {
  return gaussian_kl_ls(mu_p, ls_p, mu_q, ls_q);
}

double gaussian_entropy_ls(double ls) { return 0.5 * kLog2Pi + ls + 0.5; }

double gaussian_entropy(double sigma) {
  check_sigma(sigma, "sigma");
  return gaussian_entropy_ls(std::log(sigma));
}

double gaussian_cross_entropy_ls(double mu_q, double ls_q, double mu_p, double ls_p) {
  const double dmu = mu_p - mu_q;
  return 0.5 * kLog2Pi + ls_p +
         0.5 * (std::exp(2.0 * ls_q) + dmu * dmu) * std::exp(-2.0 * ls_p);
}

double gaussian_cross_entropy(double mu_q, double sigma_q, double mu_p, double sigma_p) {
  check_sigma(sigma_q, "sigma_q");
  check_sigma(sigma_p, "sigma_p");
  return gaussian_cross_entropy_ls(mu_q, std::log(sigma_q), mu_p, std::log(sigma_p));
}

double regularized_kl_ls(double mu_q, double ls_q, double mu_p, double ls_p, double lambda) {
  const double d = ls_p - ls_q;
  return lambda * d * d + gaussian_kl_ls(mu_q, ls_q, mu_p, ls_p);
}

double gaussian_log_pdf(double x, double mu, double ls) {
  const double z = (x - mu) * std::exp(-ls);
  return -0.5 * kLog2Pi - ls - 0.5 * z * z;
}

namespace {
// Welford accumulation; identical inputs yield exactly zero variance.
struct RunningStats {
  double mean = 0.0, m2 = 0.0;
  int64_t n = 0;
  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / double(n);
    m2 += d * (v - mean);
  }
  McEstimate finish() const {
    McEstimate e;
    e.draws = n;
    e.mean = mean;
    e.variance = n > 1 ? m2 / double(n - 1) : 0.0;
    e.std_error = std::sqrt(e.variance / double(n));
    return e;
  }
};
}  // namespace

McEstimate mc_kl_estimate(double mu_q, double ls_q, double mu_p, double ls_p, int64_t n,
                          uint64_t seed) {
  require(n >= 1, "mc_kl_estimate: need at least one draw");
  Rng rng(seed);
  const double sq = std::exp(ls_q);
  RunningStats st;
  for (int64_t i = 0; i < n; ++i) {
    const double x = mu_q + sq * rng.gauss();
    st.add(gaussian_log_pdf(x, mu_q, ls_q) - gaussian_log_pdf(x, mu_p, ls_p));
  }
  return st.finish();
}

McEstimate sequence_kl_estimate(const model::TeacherModel& teacher,
                                const model::StudentModel& student, const ad::Array& cond_up,
                                const model::CondProjection& cond_proj, int64_t num_samples,
                                int64_t draws, uint64_t seed, int workers) {
  require(draws >= 1, "sequence_kl_estimate: need at least one draw");
  require(num_samples >= 1, "sequence_kl_estimate: need at least one timestep");
  Rng root(seed);
  RunningStats st;
  std::vector<double> z0(num_samples);
  for (int64_t d = 0; d < draws; ++d) {
    Rng rng = root.split(static_cast<uint64_t>(d));
    for (auto& z : z0) z = rng.gauss();
    const model::IafOut s = iaf_sample(student, z0, cond_up, cond_proj, workers);
    const model::GaussianOut p = teacher.forward_plain(s.x, cond_up, workers);
    double acc = 0.0;
    for (int64_t t = 0; t < num_samples; ++t)
      acc += gaussian_kl_ls(s.mu[t], s.log_sigma[t], p.mu[t], p.log_sigma[t]);
    st.add(acc);
  }
  return st.finish();
}

}  // namespace clar::distill
