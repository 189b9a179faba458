// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Built-in oracles: quadrature of the chain distribution, finite differences
// of energies and stresses, finite-difference Jacobian of the FE residual.
// Shared by the `check` subcommand and the acceptance runner.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chainfield/chain_statistics.hpp"

namespace chainfield {

struct CheckResult {
  std::string name;
  double error{};      // worst relative error found
  double tolerance{};
  int samples{};
  std::string detail;  // where the worst error occurred
  bool pass() const { return error <= tolerance; }
};

/// ∫₁^λ g by adaptive Gauss–Kronrod, split at the mode of the integrand.
double cdf_by_quadrature(double lambda, const WesslauParams& p);

/// Closed-form cdf against quadrature on Q ∈ {1.001, 1.01, 1.1, 1.5},
/// ᴹλ_m ∈ {1.1, 1.2, 1.5, 2} and λ ∈ {1.05, 1.1, 1.5, 2, 5}.
CheckResult check_cdf_quadrature(double tolerance = 1e-8);

/// S′, S″, W_iso′, W_iso″, W_vol′, W_vol″ against Ridders differences at
/// `points` random admissible points (random Wesslau parameters and stretches
/// around the bulk of the distribution).
CheckResult check_energy_derivatives(std::uint64_t seed, int points = 50, double tolerance = 1e-6);

/// P against the directional derivative of the free energy at random F
/// (det F ∈ [0.9, 1.1]) and random frozen branch states.
CheckResult check_stress_energy(std::uint64_t seed, int points = 10, double tolerance = 1e-5);

/// Assembled tangent of a two-hex mesh (no branches) against a central
/// difference Jacobian of the residual, random u and φ.
CheckResult check_fem_jacobian(std::uint64_t seed, double tolerance = 1e-5);

/// Same mesh, K_φφ block only: analytic block and the variant with the
/// driving term halved. Returns {error of the implemented block, error of the
/// halved one}.
std::pair<double, double> phase_block_errors(std::uint64_t seed);

std::vector<CheckResult> run_all_checks(std::uint64_t seed);

}  // namespace chainfield
