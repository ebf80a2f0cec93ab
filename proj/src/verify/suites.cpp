// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "verify/suites.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "core/rng.hpp"
#include "distill/kl.hpp"
#include "distill/loss.hpp"
#include "dsp/stft.hpp"
#include "dsp/stft_tape.hpp"
#include "model/student.hpp"
#include "model/teacher.hpp"
#include "verify/oracles.hpp"

namespace clar::verify {

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};
using CheckFn = std::function<Outcome()>;
struct Check {
  std::string name;
  CheckFn fn;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

Outcome bound(const char* what, double err, double tol) {
  Outcome o;
  o.pass = std::isfinite(err) && err <= tol;
  o.detail = std::string(what) + " " + fmt(err) + " (tol " + fmt(tol) + ")";
  return o;
}

// the fresh output heads sit at exactly mu=0, log sigma=0, so every model
// is kicked to a generic position before checking
model::TeacherModel tiny_teacher(uint64_t seed) {
  model::TeacherModel t;
  t.hy.net.layers = 2;
  t.hy.net.residual_channels = 4;
  t.hy.net.skip_channels = 4;
  t.hy.net.head_channels = 4;
  t.hy.net.cond_channels = 3;
  t.hy.net.filter_size = 2;
  t.hy.net.dilation_cycle = 2;
  t.hy.mel_bands = 3;
  t.init(seed);
  perturb_params(t.named_params(), seed ^ 0xFACEull, 0.2);
  return t;
}

model::StudentModel tiny_student(uint64_t seed, std::vector<int> reverse) {
  model::StudentModel s;
  s.hy.flow_layers = {2, 2};
  s.hy.reverse_time = std::move(reverse);
  s.hy.base.residual_channels = 4;
  s.hy.base.skip_channels = 4;
  s.hy.base.head_channels = 4;
  s.hy.base.cond_channels = 3;
  s.hy.base.filter_size = 3;
  s.hy.base.dilation_cycle = 2;
  s.hy.mel_bands = 3;
  s.init(seed);
  perturb_params(s.named_params(), seed ^ 0xBEEFull, 0.2);
  return s;
}

ad::Array random_cond(int bands, int64_t T, uint64_t seed) {
  ad::Array c({bands, static_cast<int>(T)});
  Rng rng(seed);
  for (auto& v : c.v) v = rng.uniform();
  return c;
}

std::vector<double> random_signal(int64_t T, uint64_t seed, double amp = 0.5) {
  std::vector<double> x(T);
  Rng rng(seed);
  for (auto& v : x) v = rng.uniform(-amp, amp);
  return x;
}

// scale-matched Gaussian pairs: sigmas span the range without blowing the
// KL up to where double precision cannot hold an absolute tolerance
struct Pair {
  double mu_q, ls_q, mu_p, ls_p;
};
Pair matched_pair(Rng& rng, double ls_lo, double ls_hi) {
  Pair p;
  p.ls_p = rng.uniform(ls_lo, ls_hi);
  p.ls_q = std::min(ls_hi, std::max(ls_lo, p.ls_p + rng.uniform(-1.0, 1.0)));
  p.mu_q = rng.uniform(-1.0, 1.0);
  p.mu_p = p.mu_q + rng.uniform(-2.0, 2.0) * std::exp(p.ls_p);
  return p;
}

// ---- kl ----

Outcome check_kl_quadrature() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Pair p = matched_pair(rng, -6.0, 2.0);
    const double cf = distill::gaussian_kl_ls(p.mu_q, p.ls_q, p.mu_p, p.ls_p);
    const double qd = gaussian_kl_quadrature(p.mu_q, std::exp(p.ls_q), p.mu_p, std::exp(p.ls_p),
                                             1e-12);
    worst = std::max(worst, std::abs(cf - qd));
  }
  return bound("max abs err", worst, 1e-8);
}

Outcome check_kl_gauss_hermite() {
  Rng rng(102);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Pair p = matched_pair(rng, -6.0, 2.0);
    const double cf = distill::gaussian_kl_ls(p.mu_q, p.ls_q, p.mu_p, p.ls_p);
    const double gh =
        gaussian_kl_gauss_hermite(p.mu_q, std::exp(p.ls_q), p.mu_p, std::exp(p.ls_p), 64);
    worst = std::max(worst, std::abs(cf - gh));
  }
  return bound("max abs err", worst, 1e-8);
}

Outcome check_entropy_identity() {
  Rng rng(103);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Pair p = matched_pair(rng, -2.0, 2.0);
    const double kl = distill::gaussian_kl_ls(p.mu_q, p.ls_q, p.mu_p, p.ls_p);
    const double hh = distill::gaussian_cross_entropy_ls(p.mu_q, p.ls_q, p.mu_p, p.ls_p) -
                      distill::gaussian_entropy_ls(p.ls_q);
    worst = std::max(worst, std::abs(kl - hh));
  }
  return bound("max abs err", worst, 1e-12);
}

Outcome check_reg_kl_nonneg() {
  Rng rng(104);
  double low = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double ls_q = rng.uniform(-9.0, 2.0);
    const double ls_p = rng.uniform(-9.0, 2.0);
    const double mu_q = rng.uniform(-5.0, 5.0);
    const double mu_p = rng.uniform(-5.0, 5.0);
    low = std::min(low, distill::regularized_kl_ls(mu_q, ls_q, mu_p, ls_p, 4.0));
  }
  Outcome o;
  o.pass = low >= 0.0;
  o.detail = "min value " + fmt(low);
  return o;
}

Outcome check_reg_kl_zero_iff_equal() {
  Rng rng(105);
  for (int i = 0; i < 100; ++i) {
    const double mu = rng.uniform(-3.0, 3.0);
    const double ls = rng.uniform(-6.0, 2.0);
    if (distill::regularized_kl_ls(mu, ls, mu, ls, 4.0) != 0.0)
      return {false, "nonzero at identical parameters"};
    const double eps = 1e-3;
    if (!(distill::regularized_kl_ls(mu + eps, ls, mu, ls, 4.0) > 0.0))
      return {false, "zero despite mean offset"};
    if (!(distill::regularized_kl_ls(mu, ls + eps, mu, ls, 4.0) > 0.0))
      return {false, "zero despite sigma_q offset"};
    if (!(distill::regularized_kl_ls(mu, ls, mu, ls + eps, 4.0) > 0.0))
      return {false, "zero despite sigma_p offset"};
  }
  return {true, "exact zero at equality, positive off it"};
}

Outcome check_logistic_reg_nonneg() {
  Rng rng(106);
  double low = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double mu_q = rng.uniform(-2.0, 2.0);
    const double mu_p = rng.uniform(-2.0, 2.0);
    const double lq = rng.uniform(-2.0, 1.0);
    const double lp = rng.uniform(-2.0, 1.0);
    const double kl =
        logistic_kl_quadrature(mu_q, std::exp(lq), mu_p, std::exp(lp), 1e-10);
    low = std::min(low, 4.0 * (lp - lq) * (lp - lq) + kl);
  }
  Outcome o;
  o.pass = low >= -1e-8;  // quadrature tolerance
  o.detail = "min value " + fmt(low);
  return o;
}

// ---- iaf ----

Outcome check_iaf_sample_identity() {
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const model::StudentModel s =
        tiny_student(20 + trial, {trial & 1, (trial >> 1) & 1});
    const int64_t T = 16;
    const ad::Array cond = random_cond(3, T, 30 + trial);
    const std::vector<double> z0 = random_signal(T, 40 + trial, 1.5);
    const model::IafOut out = model::iaf_sample(s, z0, cond, s.cond, 1);
    for (int64_t t = 0; t < T; ++t)
      worst = std::max(worst,
                       std::abs(out.x[t] - (out.mu[t] + std::exp(out.log_sigma[t]) * z0[t])));
  }
  return bound("max abs err", worst, 1e-10);
}

Outcome check_iaf_inverse_noise() {
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const model::StudentModel s =
        tiny_student(50 + trial, {trial & 1, (trial >> 1) & 1});
    const int64_t T = 16;
    const ad::Array cond = random_cond(3, T, 60 + trial);
    const std::vector<double> z0 = random_signal(T, 70 + trial, 1.5);
    const model::IafOut out = model::iaf_sample(s, z0, cond, s.cond, 1);
    std::vector<double> z0_rec;
    model::iaf_log_likelihood(s, out.x, cond, s.cond, &z0_rec);
    for (int64_t t = 0; t < T; ++t) worst = std::max(worst, std::abs(z0_rec[t] - z0[t]));
  }
  return bound("max abs err", worst, 1e-8);
}

Outcome check_iaf_inverse_density() {
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const model::StudentModel s =
        tiny_student(80 + trial, {trial & 1, (trial >> 1) & 1});
    const int64_t T = 16;
    const ad::Array cond = random_cond(3, T, 90 + trial);
    const std::vector<double> z0 = random_signal(T, 100 + trial, 1.5);
    const model::IafOut out = model::iaf_sample(s, z0, cond, s.cond, 1);
    const double ll = model::iaf_log_likelihood(s, out.x, cond, s.cond);
    double direct = 0.0;
    for (int64_t t = 0; t < T; ++t)
      direct += distill::gaussian_log_pdf(out.x[t], out.mu[t], out.log_sigma[t]);
    worst = std::max(worst, std::abs(ll - direct));
  }
  return bound("max abs err", worst, 1e-8);
}

Outcome check_iaf_tape_matches_plain() {
  double worst = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const model::StudentModel s =
        tiny_student(110 + trial, {trial & 1, (trial >> 1) & 1});
    const int64_t T = 16;
    const ad::Array cond = random_cond(3, T, 120 + trial);
    const std::vector<double> z0 = random_signal(T, 130 + trial, 1.5);
    const model::IafOut plain = model::iaf_sample(s, z0, cond, s.cond, 1);
    ad::Tape tape;
    const model::IafOutVar taped = model::iaf_sample_var(tape, s, z0, cond, s.cond, false);
    for (int64_t t = 0; t < T; ++t) {
      worst = std::max(worst, std::abs(plain.x[t] - taped.x.value().v[t]));
      worst = std::max(worst, std::abs(plain.mu[t] - taped.mu.value().v[t]));
      worst = std::max(worst, std::abs(plain.log_sigma[t] - taped.log_sigma.value().v[t]));
    }
  }
  return bound("max abs err", worst, 1e-10);
}

// ---- gradients ----

Outcome fd_check(const std::function<double()>& eval,
                 const std::function<ad::Array(const ad::Array&)>& tape_grad,
                 std::vector<ad::Array*> params, double tol) {
  double worst = 0.0;
  for (ad::Array* p : params) {
    const ad::Array g = tape_grad(*p);
    const std::vector<double> fd = fd_gradient(eval, *p, 1e-5);
    worst = std::max(worst, max_rel_err(g.v, fd));
  }
  return bound("max rel err", worst, tol);
}

Outcome check_teacher_nll_fd() {
  model::TeacherModel teacher = tiny_teacher(7);
  const int64_t T = 12;
  const ad::Array cond = random_cond(3, T, 8);
  const std::vector<double> x = random_signal(T, 9);
  auto eval = [&]() {
    ad::Tape t;
    const model::GaussianOutVar out = teacher.forward_teacher_forced(t, x, cond, true);
    return teacher.nll_var(t, out, x).value().v[0];
  };
  auto tape_grad = [&](const ad::Array& p) {
    ad::Tape t;
    const model::GaussianOutVar out = teacher.forward_teacher_forced(t, x, cond, true);
    t.backward(teacher.nll_var(t, out, x));
    return t.grad_array(p);
  };
  return fd_check(eval, tape_grad,
                  {&teacher.net.blocks[0].gate.w, &teacher.net.blocks[1].skip.w,
                   &teacher.net.head_logs.w, &teacher.cond.w},
                  1e-4);
}

Outcome check_distill_loss_fd() {
  model::TeacherModel teacher = tiny_teacher(14);
  model::StudentModel student = tiny_student(15, {0, 1});
  const int64_t T = 16;
  const ad::Array cond = random_cond(3, T, 16);
  const std::vector<double> z0 = random_signal(T, 17, 1.0);
  const std::vector<double> ref = random_signal(T, 18);
  dsp::StftConfig stft;
  stft.fft_size = 16;
  stft.hop = 4;
  stft.window_len = 8;
  distill::DistillLossConfig cfg;
  auto run = [&](ad::Tape& t) {
    const model::IafOutVar s = model::iaf_sample_var(t, student, z0, cond, teacher.cond, true);
    const ad::Var feat = teacher.cond_features_var(t, cond, false);
    const model::GaussianOutVar p = teacher.forward_on(t, s.x, feat);
    const distill::GaussianPairVar pair{s.mu, s.log_sigma, p.mu, p.log_sigma};
    return distill::distill_loss(t, pair, s.x, ref, stft, cfg, 0).total;
  };
  auto eval = [&]() {
    ad::Tape t;
    return run(t).value().v[0];
  };
  auto tape_grad = [&](const ad::Array& p) {
    ad::Tape t;
    t.backward(run(t));
    return t.grad_array(p);
  };
  return fd_check(eval, tape_grad,
                  {&student.flows[0].blocks[0].filt.w, &student.flows[0].in_proj.w,
                   &student.flows[1].head_mu.w, &student.flows[1].blocks[1].res.b},
                  1e-4);
}

Outcome check_stft_loss_fd() {
  const int64_t T = 32;
  ad::Array x({static_cast<int>(T)});
  {
    const std::vector<double> v = random_signal(T, 19);
    x.v = v;
  }
  const std::vector<double> ref = random_signal(T, 21);
  dsp::StftConfig stft;
  stft.fft_size = 16;
  stft.hop = 4;
  stft.window_len = 8;
  auto eval = [&]() {
    ad::Tape t;
    return dsp::stft_loss_var(t.leaf(x), ref, stft).value().v[0];
  };
  auto tape_grad = [&](const ad::Array& p) {
    ad::Tape t;
    t.backward(dsp::stft_loss_var(t.leaf(x), ref, stft));
    return t.grad_array(p);
  };
  return fd_check(eval, tape_grad, {&x}, 1e-4);
}

// ---- sequence-kl ----

Outcome check_seq_kl_single_step() {
  const model::TeacherModel teacher = tiny_teacher(22);
  const model::StudentModel student = tiny_student(23, {1, 0});
  const ad::Array cond = random_cond(3, 1, 24);
  // at one timestep both nets see only zeros and the conditioner, so every
  // draw lands on the same closed-form value
  const distill::McEstimate e =
      distill::sequence_kl_estimate(teacher, student, cond, student.cond, 1, 16, 25);
  const std::vector<double> z0 = {0.37};
  const model::IafOut s = model::iaf_sample(student, z0, cond, student.cond, 1);
  const model::GaussianOut p = teacher.forward_plain(s.x, cond, 1);
  const double expect = distill::gaussian_kl_ls(s.mu[0], s.log_sigma[0], p.mu[0], p.log_sigma[0]);
  if (e.variance > 1e-20) return {false, "draw variance " + fmt(e.variance) + " expected 0"};
  return bound("mean abs err", std::abs(e.mean - expect), 1e-12);
}

Outcome check_seq_kl_nonneg() {
  const model::TeacherModel teacher = tiny_teacher(26);
  const model::StudentModel student = tiny_student(27, {0, 1});
  const ad::Array cond = random_cond(3, 8, 28);
  const distill::McEstimate e =
      distill::sequence_kl_estimate(teacher, student, cond, student.cond, 8, 32, 29);
  Outcome o;
  o.pass = std::isfinite(e.mean) && e.mean >= 0.0;
  o.detail = "mean " + fmt(e.mean);
  return o;
}

Outcome check_seq_kl_se_shrinks() {
  const model::TeacherModel teacher = tiny_teacher(30);
  const model::StudentModel student = tiny_student(31, {0, 0});
  const ad::Array cond = random_cond(3, 8, 32);
  const distill::McEstimate small =
      distill::sequence_kl_estimate(teacher, student, cond, student.cond, 8, 64, 33);
  const distill::McEstimate big =
      distill::sequence_kl_estimate(teacher, student, cond, student.cond, 8, 256, 33);
  Outcome o;
  o.pass = big.std_error < small.std_error && big.std_error > 0.0;
  o.detail = "se " + fmt(small.std_error) + " at 64 draws, " + fmt(big.std_error) + " at 256";
  return o;
}

// ---- stft ----

Outcome check_stft_naive_dft() {
  const int64_t T = 100;
  const std::vector<double> x = random_signal(T, 34);
  dsp::StftConfig cfg;
  cfg.fft_size = 64;
  cfg.hop = 16;
  cfg.window_len = 32;
  const ad::Array mag = dsp::stft_magnitude(x, cfg);
  const dsp::FramePlan plan = dsp::plan_frames(T, cfg);
  const int bins = dsp::stft_bins(cfg);
  double worst = 0.0;
  for (int f = 0; f < plan.frames; ++f) {
    std::vector<double> frame(cfg.fft_size, 0.0);
    for (int n = 0; n < cfg.window_len; ++n)
      frame[n] = plan.sample(x.data(), int64_t(f) * cfg.hop + n) * plan.window[n];
    const std::vector<double> ref = naive_dft_magnitude(frame);
    for (int b = 0; b < bins; ++b)
      worst = std::max(worst, std::abs(mag.v[size_t(f) * bins + b] - ref[b]));
  }
  return bound("max abs err", worst, 1e-10);
}

Outcome check_stft_zero_loss() {
  const std::vector<double> x = random_signal(300, 35);
  dsp::StftConfig cfg;
  cfg.fft_size = 64;
  cfg.hop = 16;
  cfg.window_len = 32;
  const double self = dsp::stft_loss(x, x, cfg);
  std::vector<double> y = x;
  for (auto& v : y) v *= 1.1;
  const double off = dsp::stft_loss(x, y, cfg);
  if (self != 0.0) return {false, "nonzero self loss " + fmt(self)};
  if (!(off > 0.0)) return {false, "zero loss for distinct signals"};
  return {true, "self loss exactly 0, distinct loss " + fmt(off)};
}

Outcome check_stft_frame_count() {
  dsp::StftConfig cfg;
  cfg.fft_size = 64;
  cfg.hop = 16;
  cfg.window_len = 32;
  for (int64_t T : {1, 5, 16, 17, 31, 32, 100, 512}) {
    const int expect = static_cast<int>(T / cfg.hop) + 1;
    if (dsp::stft_frames(T, cfg) != expect)
      return {false, "frame count mismatch at T=" + std::to_string(T)};
    const ad::Array mag = dsp::stft_magnitude(random_signal(T, 36 + T), cfg);
    if (mag.shape[0] != expect) return {false, "spectrogram rows mismatch at T=" + std::to_string(T)};
  }
  return {true, "floor(T/hop)+1 across short and long inputs"};
}

const std::vector<std::pair<std::string, std::vector<Check>>>& registry() {
  static const std::vector<std::pair<std::string, std::vector<Check>>> reg = {
      {"kl",
       {{"closed-form-vs-quadrature", check_kl_quadrature},
        {"closed-form-vs-gauss-hermite", check_kl_gauss_hermite},
        {"entropy-identity", check_entropy_identity},
        {"regularized-nonnegative", check_reg_kl_nonneg},
        {"regularized-zero-iff-equal", check_reg_kl_zero_iff_equal},
        {"logistic-regularized-nonnegative", check_logistic_reg_nonneg}}},
      {"iaf",
       {{"sample-matches-accumulator", check_iaf_sample_identity},
        {"inverse-recovers-noise", check_iaf_inverse_noise},
        {"inverse-density-matches-accumulator", check_iaf_inverse_density},
        {"tape-matches-plain", check_iaf_tape_matches_plain}}},
      {"gradients",
       {{"teacher-nll-fd", check_teacher_nll_fd},
        {"distill-loss-fd", check_distill_loss_fd},
        {"stft-loss-fd", check_stft_loss_fd}}},
      {"sequence-kl",
       {{"single-step-closed-form", check_seq_kl_single_step},
        {"nonnegative", check_seq_kl_nonneg},
        {"standard-error-shrinks", check_seq_kl_se_shrinks}}},
      {"stft",
       {{"matches-naive-dft", check_stft_naive_dft},
        {"identical-inputs-zero-loss", check_stft_zero_loss},
        {"frame-count", check_stft_frame_count}}},
  };
  return reg;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& [name, checks] : registry()) names.push_back(name);
  names.push_back("all");
  return names;
}

int run_suite(const std::string& name, std::ostream& out, bool verbose) {
  int failures = 0;
  bool found = false;
  for (const auto& [suite, checks] : registry()) {
    if (name != "all" && name != suite) continue;
    found = true;
    for (const auto& check : checks) {
      const Outcome o = check.fn();
      const std::string full = suite + "/" + check.name;
      if (o.pass) {
        out << "PASS " << full;
        if (verbose && !o.detail.empty()) out << "  [" << o.detail << "]";
        out << "\n";
      } else {
        out << "FAIL " << full << "  [" << o.detail << "]\n";
        ++failures;
      }
    }
  }
  if (!found) {
    std::string known;
    for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown verify suite '" + name + "' (known: " + known + ")");
  }
  return failures;
}

}  // namespace clar::verify
