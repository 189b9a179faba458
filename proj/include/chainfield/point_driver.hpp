// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Homogeneous-deformation driver for a single material point.

#pragma once

#include <span>
#include <vector>

#include "chainfield/constitutive.hpp"

namespace chainfield {

enum class LoadMode {
  /// F = diag(λ, λ_t, λ_t); λ_t found so that the lateral stress vanishes.
  /// Reported stress: nominal (engineering) axial stress P₁₁ = T₁₁/λ.
  uniaxial_stress,
  /// Isochoric simple shear whose principal stretch is λ, i.e. shear amount
  /// γ = λ − 1/λ. Reported stress: Cauchy shear stress σ₁₂.
  simple_shear,
  /// Uniaxial stress where the jump from the first to the second history
  /// point is applied instantaneously (no viscous flow), then followed in time.
  relaxation,
};

struct HistoryPoint {
  double t{};        ///< [s]
  double stretch{};  ///< [-]
};

struct DriverSample {
  double t{};
  double stretch{};
  double stress{};          ///< [MPa], see LoadMode
  double lateral_stretch{};  ///< λ_t for uniaxial modes, 1 for shear
};

struct PointDriverOptions {
  double lateral_tolerance = 1e-8;  ///< |T₂₂| [MPa]
  int max_lateral_iterations = 50;
  EvolveOptions evolve{};
};

/// Throws ValidationError for a malformed history (not strictly increasing in
/// time, not starting at stretch 1), ConvergenceError if the evolution law or
/// the lateral-stress iteration fails.
std::vector<DriverSample> point_driver(std::span<const HistoryPoint> history, LoadMode mode,
                                       const MaterialParams& params, const PointDriverOptions& options = {});

/// Linear ramp from stretch 1 to `final_stretch` at `rate` [1/s] sampled every
/// `stretch_step`.
std::vector<HistoryPoint> ramp_history(double final_stretch, double rate, double stretch_step);

}  // namespace chainfield
