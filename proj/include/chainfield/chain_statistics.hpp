// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Wesslau-type distribution of the maximum chain stretch and the survival
// factor S(λ_c) = 1 − ∫₁^λc g dλ_m that multiplies every free-energy term.
//
// The distribution is log-normal in (λ_m − 1):
//   w(λ_m) = 1/(β√π) · 1/(λ_m−1) · exp(−ln²((λ_m−1)/⁰λ_m)/β²)
//   g(λ_m) = ᴺλ_m/(λ_m−1) · w(λ_m) = a0 (λ_m−1)⁻² exp(−a1 ln²(a2(λ_m−1)))
// and its cumulative mass has the closed form
//   G(λ) = C · (1 + erf((1 + 2a1 ln(a2(λ−1))) / (2√a1))),
//   C    = a0 a2 exp(1/(4a1)) √π / (2√a1).

#pragma once

namespace chainfield {

/// Distribution constants. Construct through `derive`, never field by field.
struct WesslauParams {
  double Q{};         ///< polydispersity index, > 1
  double lambda_M{};  ///< mass-average chain stretch ᴹλ_m, > 1
  double beta{};      ///< √(2 ln Q)
  double lambda_N{};  ///< ᴹλ_m / Q
  double lambda_0{};  ///< √(ᴹλ_m ᴺλ_m)
  double a0{};
  double a1{};
  double a2{};

  /// Throws DomainError unless Q > 1 and lambda_M > 1.
  static WesslauParams derive(double Q, double lambda_M);

  /// Integration constant C; the total mass ∫₁^∞ g is 2C.
  double integration_constant() const;
  double total_mass() const { return 2.0 * integration_constant(); }
};

double pdf_w(double lambda_m, const WesslauParams& p);
double pdf_g(double lambda_m, const WesslauParams& p);
/// dg/dλ_m.
double pdf_g_derivative(double lambda_m, const WesslauParams& p);

/// ∫₁^λ g dλ_m. cdf(1) = 0; domain error for λ < 1.
double cdf(double lambda, const WesslauParams& p);

/// S(λ_c) = 1 − cdf(λ_c).
double survival(double lambda_c, const WesslauParams& p);
/// dS/dλ_c = −g(λ_c); domain error for λ_c <= 1.
double survival_d1(double lambda_c, const WesslauParams& p);
/// d²S/dλ_c² = −dg/dλ_c; domain error for λ_c <= 1.
double survival_d2(double lambda_c, const WesslauParams& p);

/// Value and first two derivatives of a scalar function.
struct Jet {
  double value{};
  double d1{};
  double d2{};
};

/// Stretches within this distance of 1 (or below 1) use the limit values.
inline constexpr double kUnitStretchGuard = 1e-9;

/// S, S', S'' with the λ_c → 1⁺ limits {1, 0, 0}. Also used for λ_c < 1,
/// which occurs for the volumetric chain stretch J^{1/3} under compression.
Jet survival_guarded(double lambda_c, const WesslauParams& p);

/// Either the Wesslau survival factor or the identity (S ≡ 1, plain Neo-Hooke).
class ChainSurvival {
 public:
  ChainSurvival() = default;  // S ≡ 1
  explicit ChainSurvival(const WesslauParams& p) : params_(p), enabled_(true) {}

  static ChainSurvival none() { return {}; }

  bool enabled() const noexcept { return enabled_; }
  const WesslauParams& params() const noexcept { return params_; }

  Jet at(double lambda_c) const {
    return enabled_ ? survival_guarded(lambda_c, params_) : Jet{1.0, 0.0, 0.0};
  }

 private:
  WesslauParams params_{};
  bool enabled_ = false;
};

}  // namespace chainfield
