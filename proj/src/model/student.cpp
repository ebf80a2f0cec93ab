// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "model/student.hpp"

#include <algorithm>
#include <cmath>

#include "core/fastmath.hpp"
#include "model/incremental.hpp"

namespace clar::model {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;
}

void StudentModel::init(uint64_t seed) {
  require(!hy.flow_layers.empty(), "student: need at least one flow");
  require(hy.reverse_time.size() == hy.flow_layers.size(),
          "student: reverse_time flags must match flow count");
  Rng rng(seed);
  flows.clear();
  flows.resize(hy.flow_layers.size());
  for (size_t i = 0; i < flows.size(); ++i) {
    flows[i].hy = hy.base;
    flows[i].hy.layers = hy.flow_layers[i];
    Rng frng = rng.split(i);
    flows[i].init(frng);
  }
  Rng crng = rng.split(0xC04Dull);
  cond.init(hy.base.cond_channels, hy.mel_bands, crng);
}

std::vector<std::pair<std::string, ad::Array*>> StudentModel::named_params() {
  std::vector<std::pair<std::string, ad::Array*>> out;
  for (size_t i = 0; i < flows.size(); ++i)
    flows[i].append_params("flow" + std::to_string(i) + ".", out);
  return out;
}

int StudentModel::total_layers() const {
  int n = 0;
  for (int l : hy.flow_layers) n += l;
  return n;
}

IafOutVar iaf_sample_var(ad::Tape& t, const StudentModel& m, const std::vector<double>& z0,
                         const ad::Array& cond_up, const CondProjection& cond_proj,
                         bool trainable) {
  using namespace ad;
  const int T = static_cast<int>(z0.size());
  require(T >= 1, "iaf_sample: empty noise vector");
  Var cond_feat = cond_project_var(t, cond_proj, t.constant(cond_up), /*trainable=*/false);
  require(cond_feat.shape()[1] == T, "iaf_sample: conditioner length mismatch");

  Var z = t.constant(Array(Shape{T}, z0));
  Var mu_acc = t.constant(Array(Shape{T}));  // zeros
  Var ls_acc = t.constant(Array(Shape{T}));  // log domain, zeros = sigma 1
  for (size_t i = 0; i < m.flows.size(); ++i) {
    const bool rev = m.hy.reverse_time[i] != 0;
    Var zin = rev ? reverse_last(z) : z;
    Var cf = rev ? reverse_last(cond_feat) : cond_feat;
    Var u = reshape(shift_right(zin), Shape{1, T});
    GaussianOutVar g = wavenet_apply_var(t, m.flows[i], u, cf, trainable);
    Var mu_f = rev ? reverse_last(g.mu) : g.mu;
    Var ls_f = rev ? reverse_last(g.log_sigma) : g.log_sigma;
    Var sig_f = vexp(ls_f);
    z = add(mul(z, sig_f), mu_f);
    mu_acc = add(mul(mu_acc, sig_f), mu_f);
    ls_acc = add(ls_acc, ls_f);
  }
  return IafOutVar{z, mu_acc, ls_acc};
}

IafOut iaf_sample(const StudentModel& m, const std::vector<double>& z0, const ad::Array& cond_up,
                  const CondProjection& cond_proj, int workers) {
  const int64_t T = static_cast<int64_t>(z0.size());
  require(T >= 1, "iaf_sample: empty noise vector");
  const ad::Array cond_feat = cond_project(cond_proj, cond_up);
  require(cond_feat.shape[1] == T, "iaf_sample: conditioner length mismatch");
  const int Cc = cond_feat.shape[0];

  IafOut out;
  out.x = z0;
  out.mu.assign(T, 0.0);
  out.log_sigma.assign(T, 0.0);
  ad::Array cf_rev;
  std::vector<double> u(T);
  for (size_t i = 0; i < m.flows.size(); ++i) {
    const bool rev = m.hy.reverse_time[i] != 0;
    const ad::Array* cf = &cond_feat;
    if (rev) {
      if (cf_rev.size() == 0) {
        cf_rev = ad::Array(cond_feat.shape);
        for (int c = 0; c < Cc; ++c)
          for (int64_t k = 0; k < T; ++k)
            cf_rev.v[int64_t(c) * T + k] = cond_feat.v[int64_t(c) * T + (T - 1 - k)];
      }
      cf = &cf_rev;
    }
    // shifted input in the flow's own time direction
    u[0] = 0.0;
    if (rev)
      for (int64_t k = 1; k < T; ++k) u[k] = out.x[T - 1 - (k - 1)];
    else
      for (int64_t k = 1; k < T; ++k) u[k] = out.x[k - 1];
    GaussianOut g = wavenet_apply(m.flows[i], u, *cf, workers);
    if (rev) {  // bring the flow-frame outputs back to the original frame
      std::reverse(g.mu.begin(), g.mu.end());
      std::reverse(g.log_sigma.begin(), g.log_sigma.end());
    }
    const double* mu = g.mu.data();
    const double* ls = g.log_sigma.data();
    for (int64_t k = 0; k < T; ++k) {
      const double sig = fast_exp(ls[k]);
      out.x[k] = out.x[k] * sig + mu[k];
      out.mu[k] = out.mu[k] * sig + mu[k];
      out.log_sigma[k] += ls[k];
    }
  }
  return out;
}

double iaf_log_likelihood(const StudentModel& m, const std::vector<double>& x,
                          const ad::Array& cond_up, const CondProjection& cond_proj,
                          std::vector<double>* z0_out) {
  const int64_t T = static_cast<int64_t>(x.size());
  require(T >= 1, "iaf_log_likelihood: empty sample");
  const ad::Array cond_feat = cond_project(cond_proj, cond_up);
  require(cond_feat.shape[1] == T, "iaf_log_likelihood: conditioner length mismatch");
  const int Cc = cond_feat.shape[0];

  ad::Array cf_rev;
  std::vector<double> y = x;       // running state, original time frame
  std::vector<double> yf(T), zf(T);
  double ls_total = 0.0;
  for (size_t ridx = m.flows.size(); ridx-- > 0;) {
    const bool rev = m.hy.reverse_time[ridx] != 0;
    const ad::Array* cf = &cond_feat;
    if (rev) {
      if (cf_rev.size() == 0) {
        cf_rev = ad::Array(cond_feat.shape);
        for (int c = 0; c < Cc; ++c)
          for (int64_t k = 0; k < T; ++k)
            cf_rev.v[int64_t(c) * T + k] = cond_feat.v[int64_t(c) * T + (T - 1 - k)];
      }
      cf = &cf_rev;
    }
    for (int64_t k = 0; k < T; ++k) yf[k] = rev ? y[T - 1 - k] : y[k];
    IncrementalRunner runner(m.flows[ridx], *cf);
    double prev = 0.0;
    for (int64_t k = 0; k < T; ++k) {
      const auto [mu, ls] = runner.step(prev);
      const double sig = fast_exp(ls);
      if (!std::isfinite(mu) || !std::isfinite(ls) || sig <= 0.0)
        throw NumericError("iaf_log_likelihood: degenerate scale in flow " +
                           std::to_string(ridx) + " at timestep " + std::to_string(k));
      zf[k] = (yf[k] - mu) / sig;
      if (!std::isfinite(zf[k]))
        throw NumericError("iaf_log_likelihood: non-finite inverse in flow " +
                           std::to_string(ridx) + " at timestep " + std::to_string(k));
      ls_total += ls;
      prev = zf[k];
    }
    for (int64_t k = 0; k < T; ++k) y[k] = rev ? zf[T - 1 - k] : zf[k];
  }
  double ll = -ls_total;
  for (int64_t k = 0; k < T; ++k) ll += -kHalfLog2Pi - 0.5 * y[k] * y[k];
  if (z0_out) *z0_out = y;
  return ll;
}

}  // namespace clar::model
