// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "distill/trainer.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace clar::distill {

GradPolicyResult apply_grad_policy(std::vector<ad::Array>& grads, const GradPolicyConfig& cfg) {
  GradPolicyResult r;
  double acc = 0.0;
  for (const auto& g : grads)
    for (double v : g.v) acc += v * v;
  r.global_norm = std::sqrt(acc);
  r.tight = r.global_norm > cfg.norm_threshold;
  const double c = r.tight ? cfg.tight_clip : cfg.loose_clip;
  for (auto& g : grads)
    for (auto& v : g.v) {
      if (v > c) v = c;
      if (v < -c) v = -c;
    }
  return r;
}

void LogSigmaHistogram::add(const std::vector<double>& ls_p, const std::vector<double>& ls_q) {
  auto put = [](std::vector<int64_t>& counts, double v) {
    int b = static_cast<int>(std::floor((v - kLo) / (kHi - kLo) * kBins));
    if (b < 0) b = 0;
    if (b >= kBins) b = kBins - 1;
    counts[b]++;
  };
  for (double v : ls_p) put(count_p, v);
  for (double v : ls_q) put(count_q, v);
}

double LogSigmaHistogram::overlap() const {
  int64_t np = 0, nq = 0;
  for (int i = 0; i < kBins; ++i) {
    np += count_p[i];
    nq += count_q[i];
  }
  if (np == 0 || nq == 0) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < kBins; ++i)
    acc += std::min(double(count_p[i]) / double(np), double(count_q[i]) / double(nq));
  return acc;
}

double LogSigmaHistogram::bin_edge(int i) { return kLo + (kHi - kLo) * double(i) / kBins; }

Distiller::Distiller(const model::TeacherModel& teacher, model::StudentModel& student,
                     DistillLossConfig loss_cfg, GradPolicyConfig grad_cfg,
                     ad::AdamConfig adam_cfg, const dsp::StftConfig& stft, uint64_t seed)
    : teacher_(teacher),
      student_(student),
      loss_cfg_(loss_cfg),
      grad_cfg_(grad_cfg),
      stft_(stft),
      opt_(adam_cfg),
      seed_(seed) {
  params_ = student_.named_params();
  std::vector<ad::Array*> ptrs;
  for (auto& [name, a] : params_) ptrs.push_back(a);
  opt_.attach(std::move(ptrs));
}

DistillStepMetrics Distiller::step(const std::vector<DistillBatchItem>& batch) {
  require(!batch.empty(), "distill step: empty batch");
  DistillStepMetrics m;
  m.step = step_;
  m.lr = opt_.effective_lr();

  ad::Tape tape;
  ad::Var total;
  double kl_acc = 0.0, reg_acc = 0.0, stft_acc = 0.0;
  bool any_masked = false;
  LogSigmaHistogram hist;
  Rng noise_root = Rng(seed_).split(static_cast<uint64_t>(step_));

  for (size_t bi = 0; bi < batch.size(); ++bi) {
    const DistillBatchItem& item = batch[bi];
    const int64_t T = static_cast<int64_t>(item.ref->size());
    Rng rng = noise_root.split(bi);
    std::vector<double> z0(T);
    for (auto& z : z0) z = rng.gauss();

    model::IafOutVar s =
        iaf_sample_var(tape, student_, z0, *item.cond_up, teacher_.cond, /*trainable=*/true);
    ad::Var cond_feat = teacher_.cond_features_var(tape, *item.cond_up, /*trainable=*/false);
    model::GaussianOutVar p = teacher_.forward_on(tape, s.x, cond_feat);

    GaussianPairVar pair{s.mu, s.log_sigma, p.mu, p.log_sigma};
    DistillLossParts parts = distill_loss(tape, pair, s.x, *item.ref, stft_, loss_cfg_, step_);
    kl_acc += parts.kl_value;
    reg_acc += parts.reg_value;
    stft_acc += parts.stft_value;
    any_masked = any_masked || parts.masked;
    hist.add(p.log_sigma.value().v, s.log_sigma.value().v);
    total = total.valid() ? add(total, parts.total) : parts.total;
  }
  total = scale(total, 1.0 / double(batch.size()));
  m.kl = kl_acc / double(batch.size());
  m.reg = reg_acc / double(batch.size());
  m.stft = stft_acc / double(batch.size());
  m.masked = any_masked;
  last_hist_ = hist;

  const double loss_value = total.value().v[0];
  if (!std::isfinite(loss_value)) {
    m.aborted = true;
    ++aborted_;
    ++step_;
    return m;
  }

  tape.backward(total);
  std::vector<ad::Array> grads;
  grads.reserve(params_.size());
  bool bad = false;
  for (auto& [name, a] : params_) {
    grads.push_back(tape.grad_array(*a));
    if (!grads.back().all_finite()) bad = true;
  }
  if (bad) {
    m.aborted = true;
    ++aborted_;
    ++step_;
    return m;
  }
  const GradPolicyResult pol = apply_grad_policy(grads, grad_cfg_);
  m.grad_norm = pol.global_norm;
  opt_.step(grads);
  ++step_;
  return m;
}

}  // namespace clar::distill
