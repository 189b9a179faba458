// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Least-squares identification of MaterialParams from a uniaxial stress–stretch
// curve recorded at constant stretch rate. Relaxation times stay fixed.

#pragma once

#include <string>
#include <vector>

#include "chainfield/constitutive.hpp"
#include "chainfield/nelder_mead.hpp"

namespace chainfield {

struct FitSample {
  double stretch{};
  double stress{};  // nominal [MPa]
  double weight = 1.0;
};

enum class ParameterKind { c10, branch_modulus, Q, lambda_M, D };

struct FreeParameter {
  ParameterKind kind = ParameterKind::c10;
  int branch = -1;  // index into MaterialParams::branches for branch_modulus
  double lower{};
  double upper{};

  std::string name() const;  // "c10", "c10_3", "Q", ...
};

struct FitProblem {
  std::vector<FitSample> data;
  std::vector<FreeParameter> free;

  /// Throws ValidationError: fewer samples than free parameters, stretches not
  /// strictly increasing or not above 1, weights <= 0, bad bounds, or a branch
  /// index outside `params`.
  void validate(const MaterialParams& params) const;
};

struct FitOptions {
  double stretch_step = 0.01;  // max stretch increment of the driver
  NelderMeadOptions optimizer = [] {
    NelderMeadOptions o;
    o.tolerance = 1e-7;  // in log-parameter space
    o.max_evaluations = 3000;
    o.initial_step = 0.05;
    return o;
  }();
};

struct FitResult {
  MaterialParams params;
  double objective{};          // Σ w (σ_model − σ_data)²
  double initial_objective{};
  std::vector<double> model_stress;
  std::vector<double> residuals;  // σ_model − σ_data per sample
  int evaluations{};
  bool converged{};
  std::string message;
  std::vector<double> trace;
};

/// Nominal stress of a constant-rate uniaxial ramp (from stretch 1, `rate`
/// in 1/s) at the given increasing stretches. Throws on driver failure.
std::vector<double> ramp_response(const MaterialParams& params, const std::vector<double>& stretches, double rate,
                                  double stretch_step = 0.01);

double fit_objective(const FitProblem& problem, const MaterialParams& params, double rate,
                     const FitOptions& options = {});

/// Reads and writes one free parameter of a parameter set.
double get_parameter(const MaterialParams& p, const FreeParameter& f);
void set_parameter(MaterialParams& p, const FreeParameter& f, double value);

/// Nelder–Mead on log-transformed parameters (moduli, D, Q−1, ᴹλ_m−1), bounds
/// by projection. Driver failures count as +inf.
FitResult fit(const FitProblem& problem, const MaterialParams& params0, double rate, const FitOptions& options = {});

/// Synthetic curve for round-trip tests and shipped fixtures.
std::vector<FitSample> synthesize(const MaterialParams& params, double rate, double max_stretch, int samples,
                                  double stretch_step = 0.01);

}  // namespace chainfield
