// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Pointwise ingredients of the phase-field crack model. φ = 1 is intact
// material, φ = 0 fully broken.

#pragma once

#include "chainfield/chain_statistics.hpp"
#include "chainfield/tensor.hpp"

namespace chainfield {

enum class CriticalEnergyMode {
  constant,          ///< E_c = g_c
  survival_scaled,   ///< E_c = S(λ_c)·g_c
};

struct FractureParams {
  double g_c = 4.185;   ///< [N/mm]
  double ell_f = 2.0;   ///< regularisation length [mm]
  double zeta = 1e-5;   ///< residual stiffness
  CriticalEnergyMode ec_mode = CriticalEnergyMode::constant;
  /// Optional rate term η·φ̇ in the phase-field equation [MPa·s]; 0 is the
  /// rate-independent model. Used only to regularise unstable crack jumps.
  double viscosity = 0.0;

  /// Throws ValidationError unless g_c > 0, ell_f > 0, 0 < zeta <= 1e-3 and viscosity >= 0.
  void validate() const;
};

struct Degradation {
  double value{};
  double d1{};
};

/// g(φ) = (1−ζ)φ² + ζ.
inline Degradation degradation(double phi, double zeta) {
  return {(1.0 - zeta) * phi * phi + zeta, 2.0 * (1.0 - zeta) * phi};
}

/// γ(φ, ∇φ) = (1−φ)²/(2ℓ) + (ℓ/2)|∇φ|².
inline double crack_density(double phi, const Vec3& grad_phi, double ell_f) {
  return (1.0 - phi) * (1.0 - phi) / (2.0 * ell_f) + 0.5 * ell_f * grad_phi.squaredNorm();
}

double critical_energy(double lambda_c, const FractureParams& fp, const WesslauParams& p);
double critical_energy(double lambda_c, const FractureParams& fp, const ChainSurvival& survival);

/// Local terms of the phase-field equation; the ℓ∇φ·∇δφ part is assembled weakly.
struct PhaseFieldTerms {
  double driving{};     ///< 2(1−ζ)φ·W₀
  double resistance{};  ///< −(E_c/ℓ)(1−φ)
};

inline PhaseFieldTerms pde_terms(double phi, double W0, double Ec, double ell_f, double zeta) {
  return {2.0 * (1.0 - zeta) * phi * W0, -(Ec / ell_f) * (1.0 - phi)};
}

/// Spatially homogeneous solution of the phase-field equation:
/// φ* = E_c / (E_c + 2(1−ζ)ℓ W₀).
inline double homogeneous_phase_field(double W0, double Ec, double ell_f, double zeta) {
  return Ec / (Ec + 2.0 * (1.0 - zeta) * ell_f * W0);
}

}  // namespace chainfield
