// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "model/teacher.hpp"

#include <cmath>

#include "core/fastmath.hpp"
#include "model/incremental.hpp"

namespace clar::model {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)
}

void TeacherModel::init(uint64_t seed) {
  Rng rng(seed);
  net.hy = hy.net;
  net.init(rng);
  cond.init(hy.net.cond_channels, hy.mel_bands, rng);
}

std::vector<std::pair<std::string, ad::Array*>> TeacherModel::named_params() {
  std::vector<std::pair<std::string, ad::Array*>> out;
  net.append_params("net.", out);
  cond.append_params("cond.", out);
  return out;
}

ad::Var TeacherModel::cond_features_var(ad::Tape& t, const ad::Array& cond_up,
                                        bool trainable) const {
  return cond_project_var(t, cond, t.constant(cond_up), trainable);
}

ad::Array TeacherModel::cond_features(const ad::Array& cond_up) const {
  return cond_project(cond, cond_up);
}

GaussianOutVar TeacherModel::forward_teacher_forced(ad::Tape& t, const std::vector<double>& x,
                                                    const ad::Array& cond_up,
                                                    bool trainable) const {
  const int64_t T = static_cast<int64_t>(x.size());
  ad::Array xin(ad::Shape{1, static_cast<int>(T)});
  for (int64_t i = 1; i < T; ++i) xin.v[i] = x[i - 1];  // strictly-previous samples
  ad::Var cf = cond_features_var(t, cond_up, trainable);
  return wavenet_apply_var(t, net, t.constant(std::move(xin)), cf, trainable);
}

GaussianOutVar TeacherModel::forward_on(ad::Tape& t, ad::Var x, ad::Var cond_feat) const {
  using namespace ad;
  require(x.shape().size() == 1, "teacher forward_on: expected [T] input");
  Var u = reshape(shift_right(x), Shape{1, x.shape()[0]});
  return wavenet_apply_var(t, net, u, cond_feat, /*trainable=*/false);
}

ad::Var TeacherModel::nll_var(ad::Tape& t, const GaussianOutVar& out,
                              const std::vector<double>& x) const {
  using namespace ad;
  const Array& mu = out.mu.value();
  const Array& ls = out.log_sigma.value();
  require(static_cast<size_t>(mu.size()) == x.size(), "nll: prediction length mismatch");
  for (int64_t i = 0; i < mu.size(); ++i)
    if (!std::isfinite(mu.v[i]) || !std::isfinite(ls.v[i]))
      throw NumericError("teacher: non-finite prediction at timestep " + std::to_string(i));
  Var target = t.constant(Array(Shape{static_cast<int>(x.size())}, x));
  Var lsc = clamp_min(out.log_sigma, hy.log_sigma_floor);
  Var diff = sub(target, out.mu);
  Var quad = scale(mul(square(diff), vexp(scale(lsc, -2.0))), 0.5);
  Var per_step = add(add_scalar(lsc, kHalfLog2Pi), quad);
  return vmean(per_step);
}

double TeacherModel::clip_fraction(const GaussianOutVar& out) const {
  const ad::Array& ls = out.log_sigma.value();
  int64_t n = 0;
  for (double v : ls.v)
    if (v <= hy.log_sigma_floor) ++n;
  return double(n) / double(ls.size());
}

GaussianOut TeacherModel::forward_plain(const std::vector<double>& x, const ad::Array& cond_up,
                                        int workers) const {
  std::vector<double> u(x.size(), 0.0);
  for (size_t i = 1; i < x.size(); ++i) u[i] = x[i - 1];
  return wavenet_apply(net, u, cond_features(cond_up), workers);
}

dsp::AudioClip TeacherModel::ar_sample(const ad::Array& cond_up, int64_t num_samples,
                                       uint64_t seed, double temperature, int sample_rate,
                                       GaussianOut* traj) const {
  const ad::Array cf = cond_features(cond_up);
  require(cf.shape[1] >= num_samples, "ar_sample: requested " + std::to_string(num_samples) +
                                          " samples but conditioner covers only " +
                                          std::to_string(cf.shape[1]));
  IncrementalRunner runner(net, cf);
  Rng rng(seed);
  dsp::AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(num_samples);
  if (traj) {
    traj->mu.resize(num_samples);
    traj->log_sigma.resize(num_samples);
  }
  double prev = 0.0;
  for (int64_t t = 0; t < num_samples; ++t) {
    const auto [mu, ls] = runner.step(prev);
    if (!std::isfinite(mu) || !std::isfinite(ls))
      throw NumericError("ar_sample: non-finite prediction at timestep " + std::to_string(t));
    const double x = mu + temperature * fast_exp(ls) * rng.gauss();
    clip.samples[t] = x;
    if (traj) {
      traj->mu[t] = mu;
      traj->log_sigma[t] = ls;
    }
    prev = x;
  }
  return clip;
}

}  // namespace clar::model
