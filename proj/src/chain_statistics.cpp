// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/chain_statistics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "chainfield/errors.hpp"

namespace chainfield {

namespace {

void require_above_one(double lambda, const char* what) {
  if (!(lambda > 1.0)) {
    throw DomainError(std::string(what) + ": stretch must be > 1, got " + std::to_string(lambda));
  }
}

}  // namespace

WesslauParams WesslauParams::derive(double Q, double lambda_M) {
  if (!(Q > 1.0)) {
    throw DomainError("Wesslau polydispersity index Q must be > 1, got " + std::to_string(Q));
  }
  if (!(lambda_M > 1.0)) {
    throw DomainError("Wesslau average chain stretch must be > 1, got " + std::to_string(lambda_M));
  }
  WesslauParams p;
  p.Q = Q;
  p.lambda_M = lambda_M;
  p.beta = std::sqrt(2.0 * std::log(Q));
  p.lambda_N = lambda_M / Q;
  p.lambda_0 = std::sqrt(lambda_M * p.lambda_N);
  p.a0 = p.lambda_N / (p.beta * std::sqrt(std::numbers::pi));
  p.a1 = 1.0 / (p.beta * p.beta);
  p.a2 = 1.0 / p.lambda_0;
  return p;
}

double WesslauParams::integration_constant() const {
  return a0 * a2 * std::exp(1.0 / (4.0 * a1)) * std::sqrt(std::numbers::pi) / (2.0 * std::sqrt(a1));
}

double pdf_w(double lambda_m, const WesslauParams& p) {
  require_above_one(lambda_m, "pdf_w");
  const double x = lambda_m - 1.0;
  const double l = std::log(x / p.lambda_0);
  return std::exp(-l * l / (p.beta * p.beta)) / (p.beta * std::sqrt(std::numbers::pi) * x);
}

double pdf_g(double lambda_m, const WesslauParams& p) {
  require_above_one(lambda_m, "pdf_g");
  const double x = lambda_m - 1.0;
  const double l = std::log(p.a2 * x);
  return p.a0 / (x * x) * std::exp(-p.a1 * l * l);
}

double pdf_g_derivative(double lambda_m, const WesslauParams& p) {
  const double g = pdf_g(lambda_m, p);
  const double x = lambda_m - 1.0;
  const double l = std::log(p.a2 * x);
  return -g * (2.0 + 2.0 * p.a1 * l) / x;
}

double cdf(double lambda, const WesslauParams& p) {
  if (!(lambda >= 1.0)) {
    throw DomainError("cdf: stretch must be >= 1, got " + std::to_string(lambda));
  }
  if (lambda == 1.0) return 0.0;
  const double z = (1.0 + 2.0 * p.a1 * std::log(p.a2 * (lambda - 1.0))) / (2.0 * std::sqrt(p.a1));
  // 1 + erf(z) == erfc(-z); the latter keeps relative precision for z << 0.
  return p.integration_constant() * std::erfc(-z);
}

double survival(double lambda_c, const WesslauParams& p) { return 1.0 - cdf(lambda_c, p); }

double survival_d1(double lambda_c, const WesslauParams& p) { return -pdf_g(lambda_c, p); }

double survival_d2(double lambda_c, const WesslauParams& p) { return -pdf_g_derivative(lambda_c, p); }

Jet survival_guarded(double lambda_c, const WesslauParams& p) {
  if (lambda_c <= 1.0 + kUnitStretchGuard) return {1.0, 0.0, 0.0};
  return {survival(lambda_c, p), survival_d1(lambda_c, p), survival_d2(lambda_c, p)};
}

}  // namespace chainfield
