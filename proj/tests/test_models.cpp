// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "ad/tape.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "doctest.h"
#include "model/incremental.hpp"
#include "model/student.hpp"
#include "model/teacher.hpp"
#include "model/wavenet.hpp"
#include "verify/oracles.hpp"

using namespace clar;
using namespace clar::model;

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;

std::vector<double> rand_vec(int64_t n, uint64_t seed, double amp = 1.0) {
  Rng r(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = r.uniform(-amp, amp);
  return x;
}

ad::Array rand_cond(int bands, int64_t T, uint64_t seed) {
  Rng r(seed);
  ad::Array c({bands, int(T)});
  for (auto& v : c.v) v = r.uniform(0.0, 1.0);
  return c;
}

WaveNetParams make_net(WaveNetHyper hy, uint64_t seed, double head_amp) {
  WaveNetParams p;
  p.hy = hy;
  Rng r(seed);
  p.init(r);
  if (head_amp > 0.0) {
    // fresh heads are exactly zero, which hides most bugs; shake everything
    std::vector<std::pair<std::string, ad::Array*>> ps;
    p.append_params("", ps);
    verify::perturb_params(ps, seed ^ 0xABCD, head_amp);
  }
  return p;
}

// The whole forward written once more as plain loops, kept deliberately
// different in structure from the library (per-timestep, channel-major).
GaussianOut reference_forward(const WaveNetParams& p, const std::vector<double>& u,
                              const ad::Array& cond) {
  const int T = int(u.size());
  const int R = p.hy.residual_channels, S = p.hy.skip_channels, H = p.hy.head_channels;
  const int Cc = p.hy.cond_channels, K = p.hy.filter_size;
  auto at = [T](const std::vector<double>& m, int c, int t) { return m[c * T + t]; };

  std::vector<double> h(R * T), skip(S * T, 0.0);
  for (int r = 0; r < R; ++r)
    for (int t = 0; t < T; ++t) h[r * T + t] = p.in_proj.w.v[r] * u[t] + p.in_proj.b.v[r];

  for (const auto& bl : p.blocks) {
    const int d = bl.dilation;
    std::vector<double> z(R * T);
    for (int c = 0; c < R; ++c) {
      for (int t = 0; t < T; ++t) {
        double g = bl.gate.b.v[c], f = bl.filt.b.v[c];
        for (int ci = 0; ci < R; ++ci) {
          for (int k = 0; k < K; ++k) {
            const int src = t - (K - 1 - k) * d;
            if (src < 0) continue;
            g += bl.gate.w.v[(c * R + ci) * K + k] * at(h, ci, src);
            f += bl.filt.w.v[(c * R + ci) * K + k] * at(h, ci, src);
          }
        }
        for (int cc = 0; cc < Cc; ++cc) {
          g += bl.gate_cond.v[c * Cc + cc] * cond.v[cc * T + t];
          f += bl.filt_cond.v[c * Cc + cc] * cond.v[cc * T + t];
        }
        z[c * T + t] = 1.0 / (1.0 + std::exp(-g)) * std::tanh(f);
      }
    }
    std::vector<double> hn(R * T);
    for (int r = 0; r < R; ++r) {
      for (int t = 0; t < T; ++t) {
        double acc = bl.res.b.v[r];
        for (int c = 0; c < R; ++c) acc += bl.res.w.v[r * R + c] * z[c * T + t];
        hn[r * T + t] = h[r * T + t] + acc;
      }
    }
    for (int s = 0; s < S; ++s) {
      for (int t = 0; t < T; ++t) {
        double acc = bl.skip.b.v[s];
        for (int c = 0; c < R; ++c) acc += bl.skip.w.v[s * R + c] * z[c * T + t];
        skip[s * T + t] += acc;
      }
    }
    h = hn;
  }

  std::vector<double> h1(H * T);
  for (int o = 0; o < H; ++o) {
    for (int t = 0; t < T; ++t) {
      double acc = p.head1.b.v[o];
      for (int s = 0; s < S; ++s) acc += p.head1.w.v[o * S + s] * std::tanh(skip[s * T + t]);
      h1[o * T + t] = std::tanh(acc);
    }
  }
  GaussianOut out;
  out.mu.resize(T);
  out.log_sigma.resize(T);
  for (int t = 0; t < T; ++t) {
    double m = p.head_mu.b.v[0], l = p.head_logs.b.v[0];
    for (int o = 0; o < H; ++o) {
      m += p.head_mu.w.v[o] * h1[o * T + t];
      l += p.head_logs.w.v[o] * h1[o * T + t];
    }
    out.mu[t] = m;
    out.log_sigma[t] = l;
  }
  return out;
}

WaveNetHyper tiny_hyper() {
  WaveNetHyper hy;
  hy.layers = 2;
  hy.residual_channels = 2;
  hy.skip_channels = 3;
  hy.head_channels = 2;
  hy.cond_channels = 2;
  hy.filter_size = 2;
  hy.dilation_cycle = 2;
  return hy;
}

}  // namespace

TEST_CASE("wavenet: fresh heads emit exactly the standard normal") {
  WaveNetParams p = make_net(tiny_hyper(), 3, 0.0);
  const auto u = rand_vec(9, 4);
  const GaussianOut out = wavenet_apply(p, u, rand_cond(2, 9, 5), 1);
  for (double v : out.mu) CHECK(v == 0.0);
  for (double v : out.log_sigma) CHECK(v == 0.0);
}

TEST_CASE("wavenet: forward matches a from-scratch transcription") {
  const int T = 9;
  WaveNetParams p = make_net(tiny_hyper(), 11, 0.3);
  CHECK(p.blocks[0].dilation == 1);
  CHECK(p.blocks[1].dilation == 2);
  const auto u = rand_vec(T, 12);
  const ad::Array cond = rand_cond(2, T, 13);
  const GaussianOut ref = reference_forward(p, u, cond);

  const GaussianOut plain = wavenet_apply(p, u, cond, 1);
  for (int t = 0; t < T; ++t) {
    CHECK(plain.mu[t] == doctest::Approx(ref.mu[t]).epsilon(1e-12));
    CHECK(plain.log_sigma[t] == doctest::Approx(ref.log_sigma[t]).epsilon(1e-12));
  }

  ad::Tape tape;
  ad::Array xin({1, T});
  xin.v = u;
  const GaussianOutVar var =
      wavenet_apply_var(tape, p, tape.constant(xin), tape.constant(cond), false);
  for (int t = 0; t < T; ++t) {
    CHECK(var.mu.value().v[t] == doctest::Approx(ref.mu[t]).epsilon(1e-12));
    CHECK(var.log_sigma.value().v[t] == doctest::Approx(ref.log_sigma[t]).epsilon(1e-12));
  }
}

TEST_CASE("wavenet: output at time t ignores later inputs") {
  const int T = 16;
  WaveNetParams p = make_net(tiny_hyper(), 21, 0.3);
  const ad::Array cond = rand_cond(2, T, 22);
  auto u = rand_vec(T, 23);
  const GaussianOut base = wavenet_apply(p, u, cond, 1);
  const int t0 = 8;
  u[t0] += 0.7;
  const GaussianOut poked = wavenet_apply(p, u, cond, 1);
  for (int t = 0; t < t0; ++t) {
    CHECK(poked.mu[t] == base.mu[t]);
    CHECK(poked.log_sigma[t] == base.log_sigma[t]);
  }
  CHECK(poked.mu[t0] != base.mu[t0]);
}

TEST_CASE("wavenet: receptive field matches the dilation sum and the observed span") {
  WaveNetHyper hy = tiny_hyper();
  hy.layers = 3;
  hy.dilation_cycle = 3;  // dilations 1, 2, 4
  WaveNetParams p = make_net(hy, 31, 0.3);
  const int64_t rf = p.receptive_field();
  CHECK(rf == 1 + (2 - 1) * (1 + 2 + 4));

  const int T = 20, t0 = 15;
  const ad::Array cond = rand_cond(2, T, 32);
  const auto u = rand_vec(T, 33);
  const GaussianOut base = wavenet_apply(p, u, cond, 1);

  auto inside = u;   // oldest input still inside the window
  inside[t0 - rf + 1] += 0.9;
  auto outside = u;  // one step older: out of reach
  outside[t0 - rf] += 0.9;
  CHECK(wavenet_apply(p, inside, cond, 1).mu[t0] != base.mu[t0]);
  CHECK(wavenet_apply(p, outside, cond, 1).mu[t0] == base.mu[t0]);
}

TEST_CASE("wavenet: parameter census and naming") {
  WaveNetParams p = make_net(tiny_hyper(), 41, 0.0);
  std::vector<std::pair<std::string, ad::Array*>> ps;
  p.append_params("net.", ps);
  std::set<std::string> names;
  int64_t total = 0;
  for (auto& [name, a] : ps) {
    CHECK(names.insert(name).second);  // unique
    CHECK(name.rfind("net.", 0) == 0);
    total += a->size();
  }
  CHECK(total == p.param_count());
  // in=R*1*1+R, per block 2*(R*R*K+R) + 2*R*Cc + 2*(R*R+R) for res/skip(+S), heads
  const int R = 2, S = 3, H = 2, Cc = 2, K = 2;
  const int64_t block = (R * R * K + R) * 2 + R * Cc * 2 + (R * R + R) + (S * R + S);
  CHECK(p.param_count() == (R + R) + 2 * block + (H * S + H) + 2 * (H + 1));
}

TEST_CASE("wavenet: conditioner projection is a biased 1x1 map") {
  Rng r(51);
  CondProjection cp;
  cp.init(3, 4, r);
  Rng pr(52);
  for (auto& v : cp.b.v) v = pr.uniform(-0.5, 0.5);
  const ad::Array cond_up = rand_cond(4, 6, 53);
  const ad::Array out = cond_project(cp, cond_up);
  REQUIRE(out.shape == ad::Shape{3, 6});
  for (int c = 0; c < 3; ++c) {
    for (int t = 0; t < 6; ++t) {
      double acc = cp.b.v[c];
      for (int m = 0; m < 4; ++m) acc += cp.w.v[c * 4 + m] * cond_up.v[m * 6 + t];
      CHECK(out.v[c * 6 + t] == doctest::Approx(acc).epsilon(1e-13));
    }
  }
  ad::Tape t;
  const ad::Var vout = cond_project_var(t, cp, t.constant(cond_up), false);
  for (int64_t i = 0; i < out.size(); ++i)
    CHECK(vout.value().v[i] == doctest::Approx(out.v[i]).epsilon(1e-13));
}

TEST_CASE("wavenet: tape and plain paths agree after perturbation") {
  for (int K : {2, 3}) {
    WaveNetHyper hy = tiny_hyper();
    hy.layers = 4;
    hy.filter_size = K;
    hy.dilation_cycle = 2;
    WaveNetParams p = make_net(hy, 61 + K, 0.3);
    const int T = 24;
    const auto u = rand_vec(T, 62);
    const ad::Array cond = rand_cond(2, T, 63);

    const GaussianOut plain = wavenet_apply(p, u, cond, 1);
    ad::Tape tape;
    ad::Array xin({1, T});
    xin.v = u;
    const GaussianOutVar var =
        wavenet_apply_var(tape, p, tape.constant(xin), tape.constant(cond), false);
    for (int t = 0; t < T; ++t) {
      CHECK(plain.mu[t] == doctest::Approx(var.mu.value().v[t]).epsilon(1e-10));
      CHECK(plain.log_sigma[t] == doctest::Approx(var.log_sigma.value().v[t]).epsilon(1e-10));
    }
  }
}

TEST_CASE("incremental: stepwise replay matches the batch forward") {
  for (int K : {2, 3}) {
    WaveNetHyper hy = tiny_hyper();
    hy.layers = 4;
    hy.filter_size = K;
    hy.dilation_cycle = 2;
    WaveNetParams p = make_net(hy, 71 + K, 0.3);
    const int T = 30;
    const auto u = rand_vec(T, 72);
    const ad::Array cond = rand_cond(2, T, 73);
    const GaussianOut batch = wavenet_apply(p, u, cond, 1);

    IncrementalRunner runner(p, cond);
    for (int t = 0; t < T; ++t) {
      CHECK(runner.position() == t);
      const auto [mu, ls] = runner.step(u[t]);
      CHECK(mu == doctest::Approx(batch.mu[t]).epsilon(1e-10));
      CHECK(ls == doctest::Approx(batch.log_sigma[t]).epsilon(1e-10));
    }

    runner.reset();  // a second pass replays identically
    CHECK(runner.position() == 0);
    const auto [mu0, ls0] = runner.step(u[0]);
    CHECK(mu0 == doctest::Approx(batch.mu[0]).epsilon(1e-10));
    CHECK(ls0 == doctest::Approx(batch.log_sigma[0]).epsilon(1e-10));
  }
}

TEST_CASE("teacher: teacher-forced tape forward matches the plain shifted forward") {
  TeacherModel m;
  m.hy.net = tiny_hyper();
  m.hy.net.layers = 3;
  m.hy.mel_bands = 4;
  m.init(81);
  verify::perturb_params(m.named_params(), 82, 0.3);

  const int T = 20;
  const auto x = rand_vec(T, 83, 0.8);
  const ad::Array cond_up = rand_cond(4, T, 84);

  const GaussianOut plain = m.forward_plain(x, cond_up, 1);
  ad::Tape t;
  const GaussianOutVar var = m.forward_teacher_forced(t, x, cond_up, false);
  for (int i = 0; i < T; ++i) {
    CHECK(plain.mu[i] == doctest::Approx(var.mu.value().v[i]).epsilon(1e-10));
    CHECK(plain.log_sigma[i] == doctest::Approx(var.log_sigma.value().v[i]).epsilon(1e-10));
  }

  // forward_on shifts internally; same numbers from the same tape input
  ad::Tape t2;
  ad::Array xa({T});
  xa.v = x;
  const GaussianOutVar von =
      m.forward_on(t2, t2.constant(xa), m.cond_features_var(t2, cond_up, false));
  for (int i = 0; i < T; ++i)
    CHECK(von.mu.value().v[i] == doctest::Approx(var.mu.value().v[i]).epsilon(1e-12));
}

TEST_CASE("teacher: nll matches the floored hand formula") {
  TeacherModel m;
  m.hy.net = tiny_hyper();
  m.hy.mel_bands = 4;
  m.init(91);
  verify::perturb_params(m.named_params(), 92, 0.4);

  const int T = 15;
  const auto x = rand_vec(T, 93, 0.8);
  const ad::Array cond_up = rand_cond(4, T, 94);
  ad::Tape t;
  const GaussianOutVar out = m.forward_teacher_forced(t, x, cond_up, false);
  const double nll = m.nll_var(t, out, x).value().v[0];

  double want = 0.0;
  for (int i = 0; i < T; ++i) {
    const double mu = out.mu.value().v[i];
    const double ls = std::max(out.log_sigma.value().v[i], m.hy.log_sigma_floor);
    const double d = x[i] - mu;
    want += kHalfLog2Pi + ls + 0.5 * d * d * std::exp(-2.0 * ls);
  }
  CHECK(nll == doctest::Approx(want / T).epsilon(1e-12));

  // fresh model: log sigma is exactly 0 everywhere, above the -9 floor
  TeacherModel fresh;
  fresh.hy.net = tiny_hyper();
  fresh.hy.mel_bands = 4;
  fresh.init(95);
  ad::Tape t2;
  const GaussianOutVar fo = fresh.forward_teacher_forced(t2, x, cond_up, false);
  CHECK(fresh.clip_fraction(fo) == 0.0);
  fresh.hy.log_sigma_floor = 0.0;  // now every step sits at the floor
  CHECK(fresh.clip_fraction(fo) == 1.0);
}

TEST_CASE("teacher: ar sampling is seeded and follows the mean at temperature zero") {
  TeacherModel m;
  m.hy.net = tiny_hyper();
  m.hy.mel_bands = 4;
  m.init(101);
  verify::perturb_params(m.named_params(), 102, 0.3);

  const int T = 40;
  const ad::Array cond_up = rand_cond(4, T, 103);

  GaussianOut traj;
  const auto mean_clip = m.ar_sample(cond_up, T, 7, 0.0, 4000, &traj);
  CHECK(mean_clip.sample_rate == 4000);
  REQUIRE(mean_clip.length() == T);
  for (int t = 0; t < T; ++t) {
    CHECK(mean_clip.samples[t] == traj.mu[t]);  // temperature 0: exactly the mean path
    CHECK(std::isfinite(traj.log_sigma[t]));
  }
  const auto mean_again = m.ar_sample(cond_up, T, 99, 0.0, 4000);
  CHECK(mean_again.samples == mean_clip.samples);  // seed is irrelevant at temperature 0

  const auto a = m.ar_sample(cond_up, T, 7, 1.0, 4000);
  const auto b = m.ar_sample(cond_up, T, 7, 1.0, 4000);
  const auto c = m.ar_sample(cond_up, T, 8, 1.0, 4000);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);

  CHECK_THROWS_AS((void)m.ar_sample(cond_up, T + 1, 7, 1.0, 4000), clar::Error);
}

TEST_CASE("student: a fresh student is the identity map") {
  StudentModel s;
  s.hy.base = tiny_hyper();
  s.hy.flow_layers = {2, 2};
  s.hy.reverse_time = {0, 1};
  s.hy.mel_bands = 4;
  s.init(111);
  CHECK(s.total_layers() == 4);

  const int T = 12;
  const auto z0 = rand_vec(T, 112);
  const ad::Array cond_up = rand_cond(4, T, 113);
  const IafOut out = iaf_sample(s, z0, cond_up, s.cond, 1);
  for (int t = 0; t < T; ++t) {
    CHECK(out.x[t] == z0[t]);
    CHECK(out.mu[t] == 0.0);
    CHECK(out.log_sigma[t] == 0.0);
  }
}

TEST_CASE("student: tape and plain sampling agree after perturbation") {
  StudentModel s;
  s.hy.base = tiny_hyper();
  s.hy.flow_layers = {2, 3, 2};
  s.hy.reverse_time = {0, 1, 0};
  s.hy.mel_bands = 4;
  s.init(121);
  verify::perturb_params(s.named_params(), 122, 0.3);
  verify::perturb_params({{"cond.w", &s.cond.w}, {"cond.b", &s.cond.b}}, 123, 0.3);

  const int T = 18;
  const auto z0 = rand_vec(T, 124);
  const ad::Array cond_up = rand_cond(4, T, 125);

  const IafOut plain = iaf_sample(s, z0, cond_up, s.cond, 1);
  ad::Tape t;
  const IafOutVar var = iaf_sample_var(t, s, z0, cond_up, s.cond, false);
  for (int i = 0; i < T; ++i) {
    CHECK(plain.x[i] == doctest::Approx(var.x.value().v[i]).epsilon(1e-10));
    CHECK(plain.mu[i] == doctest::Approx(var.mu.value().v[i]).epsilon(1e-10));
    CHECK(plain.log_sigma[i] == doctest::Approx(var.log_sigma.value().v[i]).epsilon(1e-10));
  }

  // the affine accumulators reproduce the sample from the base noise
  for (int i = 0; i < T; ++i)
    CHECK(plain.x[i] ==
          doctest::Approx(z0[i] * std::exp(plain.log_sigma[i]) + plain.mu[i]).epsilon(1e-10));
}

TEST_CASE("student: a reversed flow is the forward flow run on reversed time") {
  StudentModel fwd;
  fwd.hy.base = tiny_hyper();
  fwd.hy.flow_layers = {3};
  fwd.hy.reverse_time = {0};
  fwd.hy.mel_bands = 4;
  fwd.init(131);
  verify::perturb_params(fwd.named_params(), 132, 0.3);

  StudentModel rev = fwd;       // same parameters, opposite direction
  rev.hy.reverse_time = {1};

  const int T = 14;
  const auto z0 = rand_vec(T, 133);
  const ad::Array cond_up = rand_cond(4, T, 134);

  std::vector<double> z0r(z0.rbegin(), z0.rend());
  ad::Array cond_r({4, T});
  for (int b = 0; b < 4; ++b)
    for (int t = 0; t < T; ++t) cond_r.v[b * T + t] = cond_up.v[b * T + (T - 1 - t)];

  const IafOut a = iaf_sample(rev, z0, cond_up, rev.cond, 1);
  const IafOut b = iaf_sample(fwd, z0r, cond_r, fwd.cond, 1);
  for (int t = 0; t < T; ++t) {
    CHECK(a.x[t] == doctest::Approx(b.x[T - 1 - t]).epsilon(1e-12));
    CHECK(a.mu[t] == doctest::Approx(b.mu[T - 1 - t]).epsilon(1e-12));
    CHECK(a.log_sigma[t] == doctest::Approx(b.log_sigma[T - 1 - t]).epsilon(1e-12));
  }
}

TEST_CASE("student: sequential inversion recovers the noise and the density") {
  StudentModel s;
  s.hy.base = tiny_hyper();
  s.hy.flow_layers = {2, 3};
  s.hy.reverse_time = {0, 1};
  s.hy.mel_bands = 4;
  s.init(141);
  verify::perturb_params(s.named_params(), 142, 0.3);

  const int T = 40;
  const auto z0 = rand_vec(T, 143);
  const ad::Array cond_up = rand_cond(4, T, 144);
  const IafOut out = iaf_sample(s, z0, cond_up, s.cond, 1);

  std::vector<double> z0_rec;
  const double ll = iaf_log_likelihood(s, out.x, cond_up, s.cond, &z0_rec);
  REQUIRE(z0_rec.size() == size_t(T));
  double want = 0.0;
  for (int t = 0; t < T; ++t) {
    CHECK(z0_rec[t] == doctest::Approx(z0[t]).epsilon(1e-8));
    want += -kHalfLog2Pi - 0.5 * z0[t] * z0[t] - out.log_sigma[t];
  }
  CHECK(ll == doctest::Approx(want).epsilon(1e-8));
}
