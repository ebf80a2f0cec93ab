// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#include "verify/oracles.hpp"

#include <cmath>

#include "core/rng.hpp"

namespace clar::verify {

namespace {

double simpson_rule(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double& fm) {
  const double m = 0.5 * (a + b);
  fm = f(m);
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double m,
                   double fm, double b, double fb, double whole, double tol, int depth) {
  double fml, fmr;
  const double left = simpson_rule(f, a, fa, m, fm, fml);
  const double right = simpson_rule(f, m, fm, b, fb, fmr);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, fa, 0.5 * (a + m), fml, m, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, 0.5 * (m + b), fmr, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double simpson_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  const double fa = f(a), fb = f(b);
  double fm;
  const double whole = simpson_rule(f, a, fa, b, fb, fm);
  return simpson_rec(f, a, fa, 0.5 * (a + b), fm, b, fb, whole, tol, max_depth);
}

GaussHermite gauss_hermite(int n) {
  require(n >= 2, "gauss_hermite: need at least two nodes");
  GaussHermite gh;
  gh.nodes.assign(n, 0.0);
  gh.weights.assign(n, 0.0);
  const double eps = 1e-14;
  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    // initial guesses for the largest roots, then step inward
    if (i == 0)
      z = std::sqrt(double(2 * n + 1)) - 1.85575 * std::pow(double(2 * n + 1), -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(double(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * gh.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * gh.nodes[1];
    else
      z = 2.0 * z - gh.nodes[i - 2];
    for (int it = 0; it < 100; ++it) {
      // orthonormal Hermite recurrence
      double p1 = 0.7511255444649425;  // pi^(-1/4)
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt(double(j - 1) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= eps) break;
    }
    gh.nodes[i] = z;
    gh.nodes[n - 1 - i] = -z;
    gh.weights[i] = 2.0 / (pp * pp);
    gh.weights[n - 1 - i] = gh.weights[i];
  }
  return gh;
}

double gauss_expectation(const std::function<double(double)>& f, double mu, double sigma, int n) {
  const GaussHermite gh = gauss_hermite(n);
  const double inv_sqrt_pi = 0.5641895835477563;
  const double sqrt2 = 1.4142135623730951;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += gh.weights[i] * f(mu + sqrt2 * sigma * gh.nodes[i]);
  return inv_sqrt_pi * acc;
}

namespace {
double gaussian_log_pdf_s(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.9189385332046727 - std::log(sigma) - 0.5 * z * z;
}
}  // namespace

double gaussian_kl_quadrature(double mu_q, double sigma_q, double mu_p, double sigma_p,
                              double tol) {
  auto integrand = [&](double x) {
    return std::exp(gaussian_log_pdf_s(x, mu_q, sigma_q)) *
           (gaussian_log_pdf_s(x, mu_q, sigma_q) - gaussian_log_pdf_s(x, mu_p, sigma_p));
  };
  const double lo = mu_q - 12.0 * sigma_q;
  const double hi = mu_q + 12.0 * sigma_q;
  return simpson_adaptive(integrand, lo, hi, tol);
}

double gaussian_kl_gauss_hermite(double mu_q, double sigma_q, double mu_p, double sigma_p, int n) {
  auto log_ratio = [&](double x) {
    return gaussian_log_pdf_s(x, mu_q, sigma_q) - gaussian_log_pdf_s(x, mu_p, sigma_p);
  };
  return gauss_expectation(log_ratio, mu_q, sigma_q, n);
}

double logistic_log_pdf(double x, double mu, double s) {
  const double z = (x - mu) / s;
  // softplus(-z) evaluated stably
  const double sp = std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  return -z - std::log(s) - 2.0 * sp;
}

double logistic_kl_quadrature(double mu_q, double s_q, double mu_p, double s_p, double tol) {
  auto integrand = [&](double x) {
    return std::exp(logistic_log_pdf(x, mu_q, s_q)) *
           (logistic_log_pdf(x, mu_q, s_q) - logistic_log_pdf(x, mu_p, s_p));
  };
  // logistic tails decay like exp(-|z|); 80 scales bounds the truncation
  // far below the quadrature tolerance
  const double spread = 80.0 * std::max(s_q, s_p);
  const double lo = std::min(mu_q, mu_p) - spread;
  const double hi = std::max(mu_q, mu_p) + spread;
  return simpson_adaptive(integrand, lo, hi, tol);
}

ad::Array conv1d_naive(const ad::Array& x, const ad::Array& w, int dilation) {
  require(x.shape.size() == 2 && w.shape.size() == 3, "conv1d_naive: bad shapes");
  const int Cin = x.shape[0];
  const int64_t T = x.shape[1];
  const int Cout = w.shape[0];
  const int K = w.shape[2];
  require(w.shape[1] == Cin, "conv1d_naive: channel mismatch");
  ad::Array y(ad::Shape{Cout, static_cast<int>(T)});
  for (int o = 0; o < Cout; ++o)
    for (int64_t t = 0; t < T; ++t) {
      double acc = 0.0;
      for (int ci = 0; ci < Cin; ++ci)
        for (int k = 0; k < K; ++k) {
          const int64_t src = t - int64_t(K - 1 - k) * dilation;
          if (src >= 0) acc += w.v[(int64_t(o) * Cin + ci) * K + k] * x.v[int64_t(ci) * T + src];
        }
      y.v[int64_t(o) * T + t] = acc;
    }
  return y;
}

std::vector<double> naive_dft_magnitude(const std::vector<double>& frame) {
  const size_t n = frame.size();
  const size_t bins = n / 2 + 1;
  std::vector<double> mag(bins);
  const double pi = 3.14159265358979323846;
  for (size_t b = 0; b < bins; ++b) {
    double re = 0.0, im = 0.0;
    for (size_t k = 0; k < n; ++k) {
      const double th = 2.0 * pi * double(b) * double(k) / double(n);
      re += frame[k] * std::cos(th);
      im -= frame[k] * std::sin(th);
    }
    mag[b] = std::sqrt(re * re + im * im);
  }
  return mag;
}

std::vector<double> fd_gradient(const std::function<double()>& eval, ad::Array& param,
                                double step) {
  std::vector<double> g(param.v.size());
  for (size_t i = 0; i < param.v.size(); ++i) {
    const double keep = param.v[i];
    param.v[i] = keep + step;
    const double up = eval();
    param.v[i] = keep - step;
    const double dn = eval();
    param.v[i] = keep;
    g[i] = (up - dn) / (2.0 * step);
  }
  return g;
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b, double floor) {
  require(a.size() == b.size(), "max_rel_err: length mismatch");
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

void perturb_params(const std::vector<std::pair<std::string, ad::Array*>>& params, uint64_t seed,
                    double amp) {
  Rng rng(seed);
  for (const auto& [name, arr] : params)
    for (auto& v : arr->v) v += rng.uniform(-amp, amp);
}

}  // namespace clar::verify
