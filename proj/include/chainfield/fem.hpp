// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Monolithic finite element discretisation of the coupled displacement /
// phase-field problem.
//
// Unknowns are interleaved per node: [u_x, u_y, (u_z), φ]. With P the first
// Piola–Kirchhoff stress, A = ∂P/∂F and g(φ) = (1−ζ)φ² + ζ, the element
// residuals are
//   r_u,i = ∫ g(φ) P·∇N_i dV
//   r_φ,i = ∫ 2(1−ζ)φ W₀ N_i − (E_c/ℓ)(1−φ) N_i + E_c ℓ ∇φ·∇N_i dV
// and the blocks of their exact Jacobian (at frozen internal variables) are
//   K_uu = ∫ g ∇N_i·A·∇N_j,  K_uφ = ∫ 2(1−ζ)φ (P·∇N_i) N_j = K_φuᵀ,
//   K_φφ = ∫ [2(1−ζ)W₀ + E_c/ℓ] N_i N_j + E_c ℓ ∇N_i·∇N_j.
// Gradients are taken in the reference configuration.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "chainfield/constitutive.hpp"
#include "chainfield/mesh.hpp"
#include "chainfield/phase_field.hpp"

namespace chainfield {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct Model {
  Mesh mesh;
  MaterialParams material;
  FractureParams fracture;
  double thickness = 1.0;  ///< out-of-plane thickness for quad4 (plane strain) [mm]

  void validate() const;
};

struct QuadPointState {
  MaxwellState maxwell;
  double lambda_c = 1.0;  ///< chain stretch of the last converged step (explicit E_c)
};

struct SystemState {
  Vector u;    ///< nodal displacements, node-major [mm]
  Vector phi;  ///< nodal phase field
  std::vector<QuadPointState> qp;  ///< element-major, quadrature point minor
  double t = 0.0;

  static SystemState initial(const Model& model);
};

/// Degree-of-freedom numbering of the monolithic system.
class DofMap {
 public:
  explicit DofMap(const Mesh& mesh) : dim_(mesh.dim()), nodes_(static_cast<int>(mesh.num_nodes())) {}

  int dim() const { return dim_; }
  int per_node() const { return dim_ + 1; }
  int size() const { return nodes_ * per_node(); }
  int u(int node, int comp) const { return node * per_node() + comp; }
  int phi(int node) const { return node * per_node() + dim_; }

  /// Component 0..dim−1 → displacement, `kPhaseField` → φ.
  static constexpr int kPhaseField = 3;
  int dof(int node, int component) const { return component == kPhaseField ? phi(node) : u(node, component); }

  Vector pack(const SystemState& s) const;
  void unpack(const Vector& x, SystemState& s) const;

 private:
  int dim_;
  int nodes_;
};

enum class TangentKind {
  consistent,  ///< exact derivative of the stress update, incl. branch evolution
  continuum,  ///< A at frozen Maxwell state
  numerical,  ///< central differences of the full stress update (incl. evolution law)
};

struct AssemblyOptions {
  double dt = 0.0;  ///< evolution step; 0 freezes the Maxwell state
  bool with_matrix = true;
  TangentKind tangent = TangentKind::consistent;
};

struct AssemblyResult {
  Vector residual;            ///< monolithic, DofMap order
  SparseMatrix stiffness;     ///< empty unless requested
  std::vector<QuadPointState> qp;  ///< trial internal state
  double stored_energy = 0.0;      ///< ∫ g(φ) W₀ dV [mJ]
  double surface_energy = 0.0;     ///< ∫ E_c γ dV [mJ]
  double undegraded_energy = 0.0;  ///< ∫ W₀ dV
};

/// Element loop. The Maxwell state is evolved from `converged_qp` to the
/// trial deformation over `options.dt`. Throws ElementInversionError if a
/// quadrature Jacobian is not positive and SingularDeformationError if det F <= 0.
AssemblyResult assemble(const Model& model, const SystemState& trial, const std::vector<QuadPointState>& converged_qp,
                        const AssemblyOptions& options);

struct FieldResiduals {
  Vector r_u;
  Vector r_phi;
  double stored_energy = 0.0;
  double surface_energy = 0.0;
};

/// Residuals split by field, using the internal state stored in `state`.
FieldResiduals assemble_residuals(const Model& model, const SystemState& state);

struct StiffnessBlocks {
  SparseMatrix K_uu, K_uphi, K_phiu, K_phiphi;
};

StiffnessBlocks assemble_stiffness(const Model& model, const SystemState& state);

// ---------------------------------------------------------------------------
// Boundary conditions and time stepping

/// Piecewise-linear function of time, held constant outside its table.
class TimeFunction {
 public:
  TimeFunction() = default;
  static TimeFunction constant(double value) { return TimeFunction({{0.0, value}}); }
  /// v(t) = rate·t for t >= 0.
  static TimeFunction ramp(double rate);
  static TimeFunction table(std::vector<std::pair<double, double>> points) { return TimeFunction(std::move(points)); }

  double operator()(double t) const;
  bool is_ramp() const { return ramp_rate_.has_value(); }
  const std::vector<std::pair<double, double>>& points() const { return points_; }
  std::optional<double> ramp_rate() const { return ramp_rate_; }

 private:
  explicit TimeFunction(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {}
  std::vector<std::pair<double, double>> points_;
  std::optional<double> ramp_rate_;
};

struct DirichletCondition {
  std::string node_set;
  int component = 0;  ///< 0..2 displacement, DofMap::kPhaseField for φ
  TimeFunction value;
};

enum class LinearSolverKind { direct_sparse, preconditioned_iterative };

struct SolveConfig {
  double dt = 1.0;
  double t_end = 1.0;
  double newton_tol = 1e-8;
  int newton_max = 25;
  LinearSolverKind linear_solver = LinearSolverKind::direct_sparse;
  bool clamp_irreversibility = true;
  TangentKind tangent = TangentKind::consistent;
  int max_halvings = 5;

  void validate() const;
};

struct StepDiagnostics {
  int iterations = 0;              ///< Newton updates performed
  std::vector<double> residual_history;
  int active_bounds = 0;           ///< φ dofs held at their irreversibility bound
};

/// One implicit step from `state` (converged at state.t) to state.t + dt.
/// On success `state` holds the converged solution; on failure it is left
/// unchanged and ConvergenceError (or the constitutive error) is thrown.
StepDiagnostics solve_step(const Model& model, SystemState& state, const std::vector<DirichletCondition>& bcs,
                           double dt, const SolveConfig& config);

/// Sum of the internal nodal forces over a node set [N]; these balance the
/// reactions at constrained nodes and vanish at free nodes in equilibrium.
Vec3 reaction_force(const Model& model, const SystemState& state, const std::string& node_set);

struct BoundaryProgram {
  std::vector<DirichletCondition> conditions;
  std::string reaction_set;  ///< monitored for force and displacement output
  int reaction_component = 0;
  std::string crack_set;            ///< optional: seeds for the mesh-size rule
  double initial_crack_length = 0;  ///< [mm], used with crack_set
};

struct SolveResult {
  double t = 0.0;
  double displacement = 0.0;  ///< mean displacement of the reaction set [mm]
  double force = 0.0;         ///< reaction force component [N]
  int newton_iterations = 0;
  double stored_energy = 0.0;
  double surface_energy = 0.0;
  Vector u;
  Vector phi;
};

struct SimulationCallbacks {
  /// Called after every accepted step with the converged state.
  std::function<void(const SystemState&, const SolveResult&)> on_step;
  std::function<void(const std::string&)> warn;
  bool keep_fields = true;
};

/// Element size / initial crack length ratio of the reference discretisation
/// (h = 1.23 mm for l = 9.31 mm); coarser meshes near the crack trigger a warning.
inline constexpr double kReferenceCrackMeshRatio = 1.23 / 9.31;

/// Lumped nodal volumes ∫N_i dV (thickness included for quad4).
Vector nodal_volumes(const Model& model);

/// Largest edge length of elements touching `node_set`.
double max_element_size_near(const Mesh& mesh, const std::vector<int>& node_set);

/// Steps from state.t to config.t_end with fixed dt; a failed step is retried
/// as two half steps, at most `max_halvings` levels deep. Throws
/// ConvergenceError carrying the failing time.
std::vector<SolveResult> run_simulation(const Model& model, const SolveConfig& config, const BoundaryProgram& program,
                                        SystemState& state, const SimulationCallbacks& callbacks = {});

/// Von Mises norm of the degraded Cauchy stress, averaged from quadrature
/// points to nodes.
Vector nodal_stress_norm(const Model& model, const SystemState& state);

/// Element-loop concurrency: CHAINFIELD_THREADS if set, else hardware threads.
int worker_threads();

}  // namespace chainfield
