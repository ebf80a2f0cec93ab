// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "ad/array.hpp"

namespace clar::verify {

// Adaptive Simpson quadrature with an absolute tolerance.
double simpson_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 60);

// Gauss-Hermite rule: integrates f against exp(-x^2) on the real line.
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

// E_{x ~ N(mu, sigma)}[f(x)] via an n-point Gauss-Hermite rule.
double gauss_expectation(const std::function<double(double)>& f, double mu, double sigma, int n);

// KL(q || p) between two Gaussians by direct integration of q log(q/p).
double gaussian_kl_quadrature(double mu_q, double sigma_q, double mu_p, double sigma_p,
                              double tol);
double gaussian_kl_gauss_hermite(double mu_q, double sigma_q, double mu_p, double sigma_p,
                                 int n = 64);

// Logistic density utilities for the location-scale regularizer check.
double logistic_log_pdf(double x, double mu, double s);
double logistic_kl_quadrature(double mu_q, double s_q, double mu_p, double s_p, double tol);

// Reference causal dilated convolution, direct triple loop.
ad::Array conv1d_naive(const ad::Array& x, const ad::Array& w, int dilation);

// Magnitude of the DFT of one frame (frame length = transform length).
std::vector<double> naive_dft_magnitude(const std::vector<double>& frame);

// Central-difference gradient of eval() w.r.t. every element of param.
std::vector<double> fd_gradient(const std::function<double()>& eval, ad::Array& param,
                                double step);

// max over components of |a-b| / max(|a|, |b|, floor)
double max_rel_err(const std::vector<double>& a, const std::vector<double>& b,
                   double floor = 1e-6);

// Adds uniform(-amp, amp) noise to every array. Checks on freshly built
// models need this: the output heads initialize to exactly zero, which puts
// both distributions at N(0,1) and makes consistency checks vacuous.
void perturb_params(const std::vector<std::pair<std::string, ad::Array*>>& params, uint64_t seed,
                    double amp);

}  // namespace clar::verify
