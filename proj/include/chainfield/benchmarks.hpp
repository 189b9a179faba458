// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Reference problems with known answers, shared by the CLI, the tests and
// the acceptance runner.

#pragma once

#include <string>
#include <vector>

#include "chainfield/io.hpp"

namespace chainfield {

struct ProfileResult {
  int elements{};
  double h{};
  double l2_error{};        // relative L2 error against 1 − exp(−x/ℓ)
  double surface_energy{};  // ∫ E_c γ dV per unit cross-section [mJ/mm²]
  int iterations{};
};

/// Unloaded quad4 strip of length `length_in_ell`·ℓ with φ = 0 at x = 0,
/// `per_ell` elements per ℓ. The continuum solution is φ = 1 − exp(−x/ℓ).
ProfileResult phase_field_profile(int per_ell, double ell_f = 2.0, double length_in_ell = 20.0);

struct HomogeneousResult {
  double expected{};  // E_c / (E_c + 2(1−ζ)ℓ W₀)
  double phi_min{};
  double phi_max{};
  double W0{};
  int iterations{};
};

/// 2×2×2 hex cube under the affine displacement u = H·X on every node, no
/// φ constraints, no branches. φ must come out uniform and equal to φ*.
HomogeneousResult homogeneous_patch(const Mat3& H);

/// The calibrated desk-scale tear test: angle specimen, plane strain,
/// clamp_right pulled along x at the calibrated rate, nick held at φ = 0.
RunConfig tear_test_config();

/// Clamp speed giving crack initiation near 25 s with the shipped mesh [mm/s].
inline constexpr double kTearTestRate = 0.095;

/// Summary of a tear-test run, built step by step.
class TearTestMonitor {
 public:
  explicit TearTestMonitor(const Model& model, const BoundaryProgram& program);

  void on_step(const SystemState& state, const SolveResult& r);

  double peak_force() const { return peak_force_; }
  double peak_time() const { return peak_time_; }
  double final_force() const { return final_force_; }
  double final_time() const { return final_time_; }
  /// First time a node outside the φ-constrained sets drops below 0.05; < 0 if never.
  double initiation_time() const { return init_time_; }
  int initiation_node() const { return init_node_; }
  bool initiation_in(const std::string& node_set) const;
  /// Ligament nodes with φ < 0.05 over all ligament nodes.
  int ligament_cracked() const { return ligament_cracked_; }
  int ligament_nodes() const { return static_cast<int>(ligament_.size()); }
  /// Number of (step, node) pairs where φ increased. Exact comparison.
  long phi_increases() const { return phi_increases_; }
  int steps() const { return steps_; }

 private:
  const Model& model_;
  std::vector<char> constrained_;
  std::vector<int> ligament_;
  Vector last_phi_;
  double peak_force_ = 0.0, peak_time_ = 0.0, final_force_ = 0.0, final_time_ = 0.0;
  double init_time_ = -1.0;
  int init_node_ = -1;
  int ligament_cracked_ = 0;
  long phi_increases_ = 0;
  int steps_ = 0;
};

}  // namespace chainfield
