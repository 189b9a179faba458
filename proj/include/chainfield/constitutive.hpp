// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Finite-strain viscoelastic network model: an equilibrium Neo-Hooke spring
// in parallel with Maxwell branches, every energy multiplied by the chain
// survival factor, plus a volumetric penalty (1/D)(J−1)²·S(J^{1/3}).
//
// Stresses are Kirchhoff stresses T = P·Fᵀ. The fourth-order tangent
// `kappa` is the spatial tangent of the Truesdell rate of T, obtained from
// the first elasticity tensor A = ∂P/∂F by
//   kappa_abcd = F_bB F_dD A_aBcD − δ_ac T_bd.
// Non-equilibrium contributions are differentiated at frozen internal
// variables (continuum tangent).

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "chainfield/chain_statistics.hpp"
#include "chainfield/tensor.hpp"

namespace chainfield {

struct MaxwellBranch {
  double modulus{};  ///< c10_j [MPa]
  double tau{};      ///< relaxation time [s]

  /// η_j = 4·c10_j·τ_j: the linearised evolution law then relaxes the
  /// branch overstress as exp(−t/τ_j).
  double viscosity() const { return 4.0 * modulus * tau; }
};

struct MaterialParams {
  double c10{};                       ///< equilibrium modulus [MPa]
  std::vector<MaxwellBranch> branches;
  double D{};                         ///< volumetric penalty [1/MPa]
  ChainSurvival survival_iso;
  ChainSurvival survival_vol;

  /// Throws ValidationError if a modulus, relaxation time or D is not positive,
  /// or if branches are not sorted by relaxation time.
  void validate() const;
  /// Sort branches by ascending relaxation time.
  void canonicalize();

  /// Penalty D giving small-strain Poisson ratio `nu` for shear modulus 2·c10:
  /// K = 2/D, K = 2μ(1+ν)/(3(1−2ν)).
  static double penalty_for_poisson(double c10, double nu);

  /// Identified parameter set of the crosslinked polyurethane adhesive
  /// (seven Maxwell branches, Q = 1.001, ᴹλ_m = 1.194). D targets ν = 0.45.
  static MaterialParams reference_adhesive();
};

struct DeformationState {
  Mat3 F = Mat3::Identity();
  double J = 1.0;
  Mat3 B_bar = Mat3::Identity();  ///< J^{-2/3} F Fᵀ
  double I1_bar = 3.0;
};

/// Throws SingularDeformationError if det F <= 0.
DeformationState decompose(const Mat3& F);

/// λ_c = √(Ī₁/3).
inline double chain_stretch_iso(double I1_bar);
/// λ_c = J^{1/3}.
inline double chain_stretch_vol(double J);

/// W = c(Ī₁−3)·S(λ_c(Ī₁)) with derivatives w.r.t. Ī₁.
Jet energy_iso(double I1_bar, double modulus, const ChainSurvival& survival);
Jet energy_iso(double I1_bar, double modulus, const WesslauParams& p);

/// W = (1/D)(J−1)²·S(J^{1/3}) with derivatives w.r.t. J.
Jet energy_vol(double J, double D, const ChainSurvival& survival);
Jet energy_vol(double J, double D, const WesslauParams& p);

/// Unimodular inelastic right Cauchy–Green tensors C̄ᵢʲ, one per branch.
struct MaxwellState {
  std::vector<Mat3> Ci_bar;

  static MaxwellState virgin(std::size_t branches) {
    return MaxwellState{std::vector<Mat3>(branches, Mat3::Identity())};
  }
};

struct EvolveOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;  ///< Frobenius norm of the local residual
};

/// Backward-Euler update of one branch,
///   C̄ᵢ − C̄ᵢⁿ = Δt (4/η) W′(Ī₁ᵉ) [C̄ − ⅓ tr(C̄ C̄ᵢ⁻¹) C̄ᵢ],  Ī₁ᵉ = tr(C̄ C̄ᵢ⁻¹),
/// solved by Newton on the six independent components, then projected back to
/// det C̄ᵢ = 1. Throws ConvergenceError after `max_iterations`.
Mat3 evolve_branch(const Mat3& Ci_old, const Mat3& C_bar_new, double dt, const MaxwellBranch& branch,
                   const ChainSurvival& survival, const EvolveOptions& options = {});

/// Advance all branches to the isochoric right Cauchy–Green tensor `C_bar_new`.
MaxwellState evolve(const MaxwellState& old, const Mat3& C_bar_new, double dt, const MaterialParams& params,
                    const EvolveOptions& options = {});

struct StressTangent {
  Mat3 T = Mat3::Zero();           ///< Kirchhoff stress [MPa]
  Tensor4 kappa = Tensor4::Zero();  ///< spatial tangent [MPa]
};

/// Everything a finite element needs at one point.
struct MaterialResponse {
  double energy{};                 ///< W₀ = W_vol + W_eq + Σ W_neq [MPa = mJ/mm³]
  Mat3 P = Mat3::Zero();           ///< first Piola–Kirchhoff stress
  Mat3 T = Mat3::Zero();           ///< Kirchhoff stress P·Fᵀ
  Tensor4 A = Tensor4::Zero();     ///< ∂P/∂F at frozen internal state
};

/// Evaluate at frozen internal state. `with_tangent = false` skips A.
MaterialResponse material_response(const Mat3& F, const MaxwellState& state, const MaterialParams& params,
                                   bool with_tangent = true);

struct StressUpdate {
  MaxwellState state;         ///< branches evolved over dt
  MaterialResponse response;  ///< A is the algorithmic tangent when dt > 0
  Mat3 dW = Mat3::Zero();     ///< total derivative of the energy w.r.t. F
};

/// Evolves all branches to F over dt and evaluates the response there. With
/// `with_tangent`, A and dW include the dependence of the updated branch
/// states on F, so they are the exact derivatives of the update.
StressUpdate update_stress(const Mat3& F, const MaxwellState& old, double dt, const MaterialParams& params,
                           bool with_tangent, const EvolveOptions& options = {});

double free_energy(const Mat3& F, const MaxwellState& state, const MaterialParams& params);

/// kappa_abcd = F_bB F_dD A_aBcD − δ_ac T_bd.
Tensor4 spatial_tangent(const Mat3& F, const Mat3& T, const Tensor4& A);

StressTangent stress_and_tangent(const DeformationState& state, const MaxwellState& maxwell,
                                 const MaterialParams& params);

// ---------------------------------------------------------------------------

inline double chain_stretch_iso(double I1_bar) { return std::sqrt(I1_bar / 3.0); }
inline double chain_stretch_vol(double J) { return std::cbrt(J); }

}  // namespace chainfield
