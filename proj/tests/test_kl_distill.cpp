// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include "ad/tape.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"
#include "distill/kl.hpp"
#include "distill/loss.hpp"
#include "distill/trainer.hpp"
#include "doctest.h"
#include "dsp/stft.hpp"
#include "verify/oracles.hpp"

using namespace clar;
using namespace clar::distill;

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;

model::WaveNetHyper tiny_hyper() {
  model::WaveNetHyper hy;
  hy.layers = 2;
  hy.residual_channels = 2;
  hy.skip_channels = 2;
  hy.head_channels = 2;
  hy.cond_channels = 2;
  hy.filter_size = 2;
  hy.dilation_cycle = 2;
  return hy;
}

ad::Array rand_cond(int bands, int64_t T, uint64_t seed) {
  Rng r(seed);
  ad::Array c({bands, int(T)});
  for (auto& v : c.v) v = r.uniform(0.0, 1.0);
  return c;
}

}  // namespace

TEST_CASE("kl: closed form agrees with direct integration") {
  Rng r(7);
  for (int i = 0; i < 40; ++i) {
    const double mu_q = r.uniform(-2.0, 2.0), ls_q = r.uniform(-1.5, 1.0);
    const double mu_p = r.uniform(-2.0, 2.0), ls_p = r.uniform(-1.5, 1.0);
    const double closed = gaussian_kl_ls(mu_q, ls_q, mu_p, ls_p);
    const double quad =
        verify::gaussian_kl_quadrature(mu_q, std::exp(ls_q), mu_p, std::exp(ls_p), 1e-12);
    const double gh = verify::gaussian_kl_gauss_hermite(mu_q, std::exp(ls_q), mu_p, std::exp(ls_p));
    CHECK(closed == doctest::Approx(quad).epsilon(1e-9));
    CHECK(closed == doctest::Approx(gh).epsilon(1e-9));
    CHECK(gaussian_kl(mu_q, std::exp(ls_q), mu_p, std::exp(ls_p)) ==
          doctest::Approx(closed).epsilon(1e-12));
  }
  CHECK_THROWS_AS((void)gaussian_kl(0.0, -1.0, 0.0, 1.0), clar::Error);
  CHECK_THROWS_AS((void)gaussian_kl(0.0, 1.0, 0.0, 0.0), clar::Error);
}

TEST_CASE("kl: nonnegative, zero only at equality, forward swaps the roles") {
  Rng r(8);
  for (int i = 0; i < 10000; ++i) {
    const double mu_q = r.uniform(-3.0, 3.0), ls_q = r.uniform(-4.0, 2.0);
    const double mu_p = r.uniform(-3.0, 3.0), ls_p = r.uniform(-4.0, 2.0);
    const double kl = gaussian_kl_ls(mu_q, ls_q, mu_p, ls_p);
    CHECK(kl >= 0.0);
    CHECK(gaussian_kl_forward_ls(mu_q, ls_q, mu_p, ls_p) ==
          doctest::Approx(gaussian_kl_ls(mu_p, ls_p, mu_q, ls_q)).epsilon(1e-13));
  }
  CHECK(gaussian_kl_ls(0.7, -0.3, 0.7, -0.3) == 0.0);
  CHECK(gaussian_kl_ls(0.7, -0.3, 0.7, -0.29) > 0.0);
  CHECK(gaussian_kl_ls(0.7, -0.3, 0.71, -0.3) > 0.0);
}

TEST_CASE("kl: entropy identities against integral oracles") {
  Rng r(9);
  for (int i = 0; i < 25; ++i) {
    const double mu_q = r.uniform(-2.0, 2.0), ls_q = r.uniform(-1.0, 1.0);
    const double mu_p = r.uniform(-2.0, 2.0), ls_p = r.uniform(-1.0, 1.0);
    const double sq = std::exp(ls_q), sp = std::exp(ls_p);

    // KL = cross entropy minus entropy
    CHECK(gaussian_kl_ls(mu_q, ls_q, mu_p, ls_p) ==
          doctest::Approx(gaussian_cross_entropy_ls(mu_q, ls_q, mu_p, ls_p) -
                          gaussian_entropy_ls(ls_q))
              .epsilon(1e-12));
    CHECK(gaussian_entropy(sq) == doctest::Approx(gaussian_entropy_ls(ls_q)).epsilon(1e-13));
    CHECK(gaussian_cross_entropy(mu_q, sq, mu_p, sp) ==
          doctest::Approx(gaussian_cross_entropy_ls(mu_q, ls_q, mu_p, ls_p)).epsilon(1e-13));

    // H(q) = E_q[-log q], H(q,p) = E_q[-log p], both by quadrature
    const double h = verify::gauss_expectation(
        [&](double x) { return -gaussian_log_pdf(x, mu_q, ls_q); }, mu_q, sq, 64);
    const double ce = verify::gauss_expectation(
        [&](double x) { return -gaussian_log_pdf(x, mu_p, ls_p); }, mu_q, sq, 64);
    CHECK(gaussian_entropy_ls(ls_q) == doctest::Approx(h).epsilon(1e-10));
    CHECK(gaussian_cross_entropy_ls(mu_q, ls_q, mu_p, ls_p) == doctest::Approx(ce).epsilon(1e-10));
  }
}

TEST_CASE("kl: regularized form adds the squared log sigma gap") {
  Rng r(10);
  for (int i = 0; i < 200; ++i) {
    const double mu_q = r.uniform(-2.0, 2.0), ls_q = r.uniform(-2.0, 1.0);
    const double mu_p = r.uniform(-2.0, 2.0), ls_p = r.uniform(-2.0, 1.0);
    const double lambda = r.uniform(0.0, 8.0);
    const double d = ls_p - ls_q;
    CHECK(regularized_kl_ls(mu_q, ls_q, mu_p, ls_p, lambda) ==
          doctest::Approx(lambda * d * d + gaussian_kl_ls(mu_q, ls_q, mu_p, ls_p))
              .epsilon(1e-13));
  }
}

TEST_CASE("kl: log pdf matches the Gaussian density") {
  Rng r(11);
  for (int i = 0; i < 200; ++i) {
    const double x = r.uniform(-4.0, 4.0), mu = r.uniform(-2.0, 2.0), ls = r.uniform(-2.0, 1.0);
    const double d = x - mu;
    const double want = -kHalfLog2Pi - ls - 0.5 * d * d * std::exp(-2.0 * ls);
    CHECK(gaussian_log_pdf(x, mu, ls) == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("kl: monte carlo estimate converges on the closed form") {
  const double mu_q = 0.3, ls_q = -0.2, mu_p = -0.5, ls_p = 0.4;
  const double truth = gaussian_kl_ls(mu_q, ls_q, mu_p, ls_p);

  const McEstimate e1 = mc_kl_estimate(mu_q, ls_q, mu_p, ls_p, 50000, 17);
  CHECK(e1.draws == 50000);
  CHECK(std::fabs(e1.mean - truth) < 5.0 * e1.std_error);
  CHECK(e1.std_error == doctest::Approx(std::sqrt(e1.variance / 50000.0)).epsilon(1e-12));

  // quadrupling the draws should halve the standard error
  const McEstimate e4 = mc_kl_estimate(mu_q, ls_q, mu_p, ls_p, 200000, 17);
  CHECK(e4.std_error / e1.std_error > 0.4);
  CHECK(e4.std_error / e1.std_error < 0.6);

  // identical distributions: every draw contributes exactly zero
  const McEstimate z = mc_kl_estimate(0.4, -0.7, 0.4, -0.7, 1000, 18);
  CHECK(z.mean == 0.0);
  CHECK(z.variance == 0.0);

  // a peaked reference far from q blows the integrand's spread up
  const McEstimate calm = mc_kl_estimate(0.0, 0.0, 1.0, 0.0, 4000, 19);
  const McEstimate wild = mc_kl_estimate(0.0, -2.0, 1.0, -6.0, 4000, 19);
  CHECK(wild.variance > 100.0 * calm.variance);
}

TEST_CASE("distill loss: every term matches its hand formula") {
  dsp::StftConfig stft;
  stft.fft_size = 16;
  stft.hop = 4;
  stft.window_len = 8;
  DistillLossConfig cfg;  // lambda 4, floor -6, weights 1, warmup 500

  const int T = 24;
  Rng r(31);
  std::vector<double> xv(T), ref(T);
  for (auto& v : xv) v = r.uniform(-0.5, 0.5);
  for (auto& v : ref) v = r.uniform(-0.5, 0.5);

  ad::Array mu_q({T}), ls_q({T}), mu_p({T}), ls_p({T}), xa({T});
  xa.v = xv;
  for (int t = 0; t < T; ++t) {
    mu_q.v[t] = r.uniform(-1.0, 1.0);
    mu_p.v[t] = r.uniform(-1.0, 1.0);
    // straddle the -6 floor so the clamping actually matters
    ls_q.v[t] = r.uniform(-9.0, 1.0);
    ls_p.v[t] = r.uniform(-9.0, 1.0);
  }

  ad::Tape t;
  GaussianPairVar pair{t.leaf(mu_q), t.leaf(ls_q), t.constant(mu_p), t.constant(ls_p)};
  const DistillLossParts parts = distill_loss(t, pair, t.leaf(xa), ref, stft, cfg, 0);

  double kl_want = 0.0, reg_want = 0.0;
  for (int tt = 0; tt < T; ++tt) {
    const double lq = std::max(ls_q.v[tt], cfg.log_sigma_floor);
    const double lp = std::max(ls_p.v[tt], cfg.log_sigma_floor);
    kl_want += gaussian_kl_ls(mu_q.v[tt], lq, mu_p.v[tt], lp);
    const double d = ls_p.v[tt] - ls_q.v[tt];  // raw gap, no floor
    reg_want += d * d;
  }
  kl_want /= T;
  reg_want *= cfg.lambda / T;

  CHECK(parts.kl_value == doctest::Approx(kl_want).epsilon(1e-11));
  CHECK(parts.reg_value == doctest::Approx(reg_want).epsilon(1e-12));
  CHECK(parts.stft_value == doctest::Approx(dsp::stft_loss(xv, ref, stft)).epsilon(1e-12));
  CHECK(!parts.masked);  // step 0 is inside the warmup window
  CHECK(parts.total.value().v[0] ==
        doctest::Approx(kl_want + reg_want + parts.stft_value).epsilon(1e-11));

  // gradients flow; the reverse KL sees the floored sigmas only
  t.backward(parts.total);
  CHECK(t.grad_array(mu_q).all_finite());
  CHECK(t.grad_array(ls_q).all_finite());
  CHECK(t.grad_array(xa).all_finite());
}

TEST_CASE("distill loss: gradients match central differences") {
  dsp::StftConfig stft;
  stft.fft_size = 16;
  stft.hop = 4;
  stft.window_len = 8;
  DistillLossConfig cfg;

  const int T = 12;
  Rng r(37);
  std::vector<double> ref(T);
  for (auto& v : ref) v = r.uniform(-0.5, 0.5);
  ad::Array mu_q({T}), ls_q({T}), mu_p({T}), ls_p({T}), xa({T});
  for (int t = 0; t < T; ++t) {
    mu_q.v[t] = r.uniform(-1.0, 1.0);
    ls_q.v[t] = r.uniform(-2.0, 0.5);  // clear of the floor so FD stays smooth
    mu_p.v[t] = r.uniform(-1.0, 1.0);
    ls_p.v[t] = r.uniform(-2.0, 0.5);
    xa.v[t] = r.uniform(-0.5, 0.5);
  }

  const auto loss_value = [&]() {
    ad::Tape t;
    GaussianPairVar pair{t.leaf(mu_q), t.leaf(ls_q), t.constant(mu_p), t.constant(ls_p)};
    return distill_loss(t, pair, t.leaf(xa), ref, stft, cfg, 0).total.value().v[0];
  };

  ad::Tape t;
  GaussianPairVar pair{t.leaf(mu_q), t.leaf(ls_q), t.constant(mu_p), t.constant(ls_p)};
  const DistillLossParts parts = distill_loss(t, pair, t.leaf(xa), ref, stft, cfg, 0);
  t.backward(parts.total);
  CHECK(verify::max_rel_err(t.grad_array(mu_q).v, verify::fd_gradient(loss_value, mu_q, 1e-6)) <
        1e-5);
  CHECK(verify::max_rel_err(t.grad_array(ls_q).v, verify::fd_gradient(loss_value, ls_q, 1e-6)) <
        1e-5);
  CHECK(verify::max_rel_err(t.grad_array(xa).v, verify::fd_gradient(loss_value, xa, 1e-6)) < 1e-5);
}

TEST_CASE("distill loss: mask drops the kl term after warmup when it explodes") {
  dsp::StftConfig stft;
  stft.fft_size = 16;
  stft.hop = 4;
  stft.window_len = 8;
  DistillLossConfig cfg;
  cfg.warmup_steps = 10;
  cfg.mask_threshold = 5.0;

  const int T = 8;
  std::vector<double> ref(T, 0.1);
  ad::Array mu_q({T}), ls_q({T}), mu_p({T}), ls_p({T}), xa({T});
  for (int t = 0; t < T; ++t) {
    mu_q.v[t] = 4.0;  // far from the teacher: per-step KL is 8 > threshold
    mu_p.v[t] = 0.0;
    ls_q.v[t] = 0.0;
    ls_p.v[t] = 0.0;
    xa.v[t] = 0.1;
  }

  const auto run = [&](ad::Tape& t, int64_t step) {
    GaussianPairVar pair{t.leaf(mu_q), t.leaf(ls_q), t.constant(mu_p), t.constant(ls_p)};
    return distill_loss(t, pair, t.leaf(xa), ref, stft, cfg, step);
  };

  ad::Tape t1;
  const DistillLossParts warm = run(t1, 9);  // still warming up: keep the kl term
  CHECK(!warm.masked);
  CHECK(warm.total.value().v[0] ==
        doctest::Approx(warm.kl_value + warm.reg_value + warm.stft_value).epsilon(1e-12));

  ad::Tape t2;
  const DistillLossParts masked = run(t2, 10);
  CHECK(masked.masked);
  CHECK(masked.kl_value > cfg.mask_threshold);
  CHECK(masked.total.value().v[0] ==
        doctest::Approx(masked.reg_value + masked.stft_value).epsilon(1e-12));

  // under the threshold nothing is dropped even after warmup
  for (int t = 0; t < T; ++t) mu_q.v[t] = 0.5;
  ad::Tape t3;
  const DistillLossParts calm = run(t3, 10);
  CHECK(!calm.masked);

  // weights rescale their terms
  cfg.kl_weight = 2.0;
  cfg.stft_weight = 0.5;
  ad::Tape t4;
  const DistillLossParts weighted = run(t4, 11);
  CHECK(!weighted.masked);
  CHECK(weighted.total.value().v[0] ==
        doctest::Approx(2.0 * (weighted.kl_value + weighted.reg_value) +
                        0.5 * weighted.stft_value)
            .epsilon(1e-12));
}

TEST_CASE("distill loss: forward direction swaps the kl roles") {
  dsp::StftConfig stft;
  stft.fft_size = 16;
  stft.hop = 4;
  stft.window_len = 8;
  DistillLossConfig cfg;
  cfg.direction = KlDirection::Forward;

  const int T = 10;
  Rng r(41);
  std::vector<double> ref(T, 0.0);
  ad::Array mu_q({T}), ls_q({T}), mu_p({T}), ls_p({T}), xa({T});
  for (int t = 0; t < T; ++t) {
    mu_q.v[t] = r.uniform(-1.0, 1.0);
    ls_q.v[t] = r.uniform(-2.0, 0.5);
    mu_p.v[t] = r.uniform(-1.0, 1.0);
    ls_p.v[t] = r.uniform(-2.0, 0.5);
    xa.v[t] = 0.0;
  }
  ad::Tape t;
  GaussianPairVar pair{t.leaf(mu_q), t.leaf(ls_q), t.constant(mu_p), t.constant(ls_p)};
  const DistillLossParts parts = distill_loss(t, pair, t.leaf(xa), ref, stft, cfg, 0);
  double want = 0.0;
  for (int tt = 0; tt < T; ++tt)
    want += gaussian_kl_ls(mu_p.v[tt], ls_p.v[tt], mu_q.v[tt], ls_q.v[tt]);  // KL(p || q)
  CHECK(parts.kl_value == doctest::Approx(want / T).epsilon(1e-11));
}

TEST_CASE("grad policy: norm decides between loose and tight clipping") {
  GradPolicyConfig cfg;  // threshold 1000, tight 0.1, loose 5
  ad::Array a({2}), b({1});
  a.v = {3.0, -4.0};
  b.v = {12.0};

  std::vector<ad::Array> g1 = {a, b};
  const GradPolicyResult r1 = apply_grad_policy(g1, cfg);
  CHECK(r1.global_norm == doctest::Approx(13.0).epsilon(1e-14));
  CHECK(!r1.tight);
  CHECK(g1[0].v[0] == 3.0);   // inside the loose bound: untouched
  CHECK(g1[0].v[1] == -4.0);
  CHECK(g1[1].v[0] == 5.0);   // clipped to the loose bound

  cfg.norm_threshold = 10.0;  // now the same gradients count as an outburst
  std::vector<ad::Array> g2 = {a, b};
  const GradPolicyResult r2 = apply_grad_policy(g2, cfg);
  CHECK(r2.tight);
  CHECK(g2[0].v[0] == 0.1);
  CHECK(g2[0].v[1] == -0.1);
  CHECK(g2[1].v[0] == 0.1);
}

TEST_CASE("sequence kl: single-step sequences match the closed form with zero spread") {
  model::TeacherModel teacher;
  teacher.hy.net = tiny_hyper();
  teacher.hy.mel_bands = 3;
  teacher.init(51);
  verify::perturb_params(teacher.named_params(), 52, 0.3);

  model::StudentModel student;
  student.hy.base = tiny_hyper();
  student.hy.flow_layers = {2};
  student.hy.reverse_time = {0};
  student.hy.mel_bands = 3;
  student.init(53);
  verify::perturb_params(student.named_params(), 54, 0.3);

  const ad::Array cond_up = rand_cond(3, 1, 55);

  // at T=1 both nets see only the zero-shifted input, so the per-draw
  // integrand is a constant and the estimator variance collapses to zero
  const McEstimate e =
      sequence_kl_estimate(teacher, student, cond_up, teacher.cond, 1, 64, 56, 1);
  CHECK(e.draws == 64);
  CHECK(e.variance == 0.0);
  CHECK(e.std_error == 0.0);

  const model::IafOut s = model::iaf_sample(student, {0.0}, cond_up, teacher.cond, 1);
  const model::GaussianOut p = teacher.forward_plain(s.x, cond_up, 1);
  CHECK(e.mean ==
        doctest::Approx(gaussian_kl_ls(s.mu[0], s.log_sigma[0], p.mu[0], p.log_sigma[0]))
            .epsilon(1e-12));
}

TEST_CASE("sequence kl: fresh identical models give exactly zero divergence") {
  // a fresh teacher and a fresh student both emit N(0,1) at every step
  model::TeacherModel teacher;
  teacher.hy.net = tiny_hyper();
  teacher.hy.mel_bands = 3;
  teacher.init(61);

  model::StudentModel student;
  student.hy.base = tiny_hyper();
  student.hy.flow_layers = {2, 2};
  student.hy.reverse_time = {0, 1};
  student.hy.mel_bands = 3;
  student.init(62);

  const ad::Array cond_up = rand_cond(3, 16, 63);
  const McEstimate e =
      sequence_kl_estimate(teacher, student, cond_up, teacher.cond, 16, 8, 64, 1);
  CHECK(e.mean == 0.0);
  CHECK(e.variance == 0.0);
}

TEST_CASE("distiller: steps move the student and poisoned steps abort cleanly") {
  model::TeacherModel teacher;
  teacher.hy.net = tiny_hyper();
  teacher.hy.mel_bands = 3;
  teacher.init(71);
  verify::perturb_params(teacher.named_params(), 72, 0.2);

  model::StudentModel student;
  student.hy.base = tiny_hyper();
  student.hy.flow_layers = {2};
  student.hy.reverse_time = {0};
  student.hy.mel_bands = 3;
  student.init(73);

  dsp::StftConfig stft;
  stft.fft_size = 16;
  stft.hop = 4;
  stft.window_len = 8;
  DistillLossConfig loss_cfg;
  GradPolicyConfig grad_cfg;
  ad::AdamConfig adam_cfg;
  adam_cfg.lr = 1e-3;

  const int T = 32;
  Rng r(74);
  std::vector<double> ref(T);
  for (auto& v : ref) v = r.uniform(-0.5, 0.5);
  const ad::Array cond_up = rand_cond(3, T, 75);
  const std::vector<DistillBatchItem> batch = {{&ref, &cond_up}};

  Distiller d(teacher, student, loss_cfg, grad_cfg, adam_cfg, stft, 76);
  const std::vector<double> heads0 = student.flows[0].head_logs.w.v;
  const std::vector<double> in0 = student.flows[0].in_proj.w.v;

  const DistillStepMetrics m0 = d.step(batch);
  CHECK(m0.step == 0);
  CHECK(!m0.aborted);
  CHECK(m0.lr == adam_cfg.lr);
  CHECK(std::isfinite(m0.kl));
  CHECK(std::isfinite(m0.reg));
  CHECK(std::isfinite(m0.stft));
  CHECK(m0.grad_norm > 0.0);
  // zero-initialized heads block the gradient into the trunk on step 0;
  // only the heads themselves move, the trunk follows once they are nonzero
  CHECK(student.flows[0].head_logs.w.v != heads0);
  CHECK(student.flows[0].in_proj.w.v == in0);

  const DistillStepMetrics m1 = d.step(batch);
  CHECK(m1.step == 1);
  CHECK(d.steps_done() == 2);
  CHECK(d.aborted_steps() == 0);
  CHECK(student.flows[0].in_proj.w.v != in0);

  // histogram covers one batch item: T values on each side
  int64_t np = 0, nq = 0;
  for (int i = 0; i < LogSigmaHistogram::kBins; ++i) {
    np += d.last_histogram().count_p[i];
    nq += d.last_histogram().count_q[i];
  }
  CHECK(np == T);
  CHECK(nq == T);

  // poison one weight: the forward goes non-finite, the step aborts, and
  // the parameters stay exactly where they were
  const double saved = student.flows[0].in_proj.w.v[0];
  student.flows[0].in_proj.w.v[0] = std::nan("");
  const std::vector<double> before = student.flows[0].head_mu.w.v;
  const DistillStepMetrics bad = d.step(batch);
  CHECK(bad.aborted);
  CHECK(d.aborted_steps() == 1);
  CHECK(student.flows[0].head_mu.w.v == before);

  student.flows[0].in_proj.w.v[0] = saved;  // recovery
  const DistillStepMetrics again = d.step(batch);
  CHECK(!again.aborted);
  CHECK(d.steps_done() == 4);  // aborted steps still advance the counter
}

TEST_CASE("histogram: counts, edges and overlap behave") {
  LogSigmaHistogram h;
  CHECK(h.overlap() == 0.0);  // empty histograms do not overlap

  CHECK(h.bin_edge(0) == doctest::Approx(-10.0));
  CHECK(h.bin_edge(LogSigmaHistogram::kBins) == doctest::Approx(2.0));
  const double width = 12.0 / LogSigmaHistogram::kBins;
  CHECK(h.bin_edge(1) == doctest::Approx(-10.0 + width));

  // identical samples overlap fully; far-apart samples not at all
  std::vector<double> a = {-5.0, -4.9, -1.0, 0.5};
  h.add(a, a);
  CHECK(h.overlap() == doctest::Approx(1.0));

  LogSigmaHistogram g;
  g.add(std::vector<double>(10, -8.0), std::vector<double>(10, 1.0));
  CHECK(g.overlap() == 0.0);

  // out-of-range values clamp into the edge bins instead of vanishing
  LogSigmaHistogram e;
  e.add({-500.0}, {500.0});
  CHECK(e.count_p[0] == 1);
  CHECK(e.count_q[LogSigmaHistogram::kBins - 1] == 1);
}
