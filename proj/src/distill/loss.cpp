// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "distill/loss.hpp"

#include <cmath>

#include "dsp/stft_tape.hpp"

namespace clar::distill {

using namespace ad;

namespace {

// mean_t KL(q_t || p_t) with both log sigmas floored
Var kl_term_reverse(const GaussianPairVar& g, double floor) {
  Var lsq = clamp_min(g.ls_q, floor);
  Var lsp = clamp_min(g.ls_p, floor);
  Var dmu = sub(g.mu_p, g.mu_q);
  Var ratio = vexp(scale(sub(lsq, lsp), 2.0));               // (sq/sp)^2
  Var quad = mul(square(dmu), vexp(scale(lsp, -2.0)));       // dmu^2 / sp^2
  Var per_t = add(add(sub(lsp, lsq), scale(add_scalar(ratio, -1.0), 0.5)), scale(quad, 0.5));
  return vmean(per_t);
}

// mean_t KL(p_t || q_t); same structure with the roles swapped
Var kl_term_forward(const GaussianPairVar& g, double floor) {
  Var lsq = clamp_min(g.ls_q, floor);
  Var lsp = clamp_min(g.ls_p, floor);
  Var dmu = sub(g.mu_q, g.mu_p);
  Var ratio = vexp(scale(sub(lsp, lsq), 2.0));
  Var quad = mul(square(dmu), vexp(scale(lsq, -2.0)));
  Var per_t = add(add(sub(lsq, lsp), scale(add_scalar(ratio, -1.0), 0.5)), scale(quad, 0.5));
  return vmean(per_t);
}

}  // namespace

DistillLossParts distill_loss(ad::Tape&, const GaussianPairVar& pair, ad::Var x,
                              const std::vector<double>& ref, const dsp::StftConfig& stft,
                              const DistillLossConfig& cfg, int64_t step) {
  DistillLossParts out;

  Var kl = cfg.direction == KlDirection::Reverse ? kl_term_reverse(pair, cfg.log_sigma_floor)
                                                 : kl_term_forward(pair, cfg.log_sigma_floor);
  // regularizer sees the raw log sigmas, not the floored ones
  Var reg = scale(vmean(square(sub(pair.ls_p, pair.ls_q))), cfg.lambda);
  Var spectral = dsp::stft_loss_var(x, ref, stft);

  out.kl_value = kl.value().v[0];
  out.reg_value = reg.value().v[0];
  out.stft_value = spectral.value().v[0];
  out.masked = step >= cfg.warmup_steps && std::isfinite(out.kl_value) &&
               out.kl_value > cfg.mask_threshold;

  Var total = add(scale(reg, cfg.kl_weight), scale(spectral, cfg.stft_weight));
  if (!out.masked) total = add(total, scale(kl, cfg.kl_weight));
  out.total = total;
  return out;
}

}  // namespace clar::distill
