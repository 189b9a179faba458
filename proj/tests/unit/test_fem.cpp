// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "chainfield/benchmarks.hpp"
#include "chainfield/element.hpp"
#include "chainfield/errors.hpp"
#include "chainfield/fem.hpp"
#include "chainfield/mesh_gen.hpp"
#include "chainfield/verify.hpp"

using namespace chainfield;

namespace {

Model elastic_model(Mesh mesh) {
  Model m;
  m.mesh = std::move(mesh);
  m.material = MaterialParams::reference_adhesive();
  m.material.branches.clear();
  return m;
}

// Every node in its own set, pinned to u = H·X.
std::vector<DirichletCondition> affine_on(Model& m, const Mat3& H, const std::vector<int>& nodes) {
  std::vector<DirichletCondition> bc;
  for (int n : nodes) {
    const std::string name = "n" + std::to_string(n);
    m.mesh.node_sets[name] = {n};
    const Vec3 u = H * m.mesh.nodes[n];
    for (int c = 0; c < m.mesh.dim(); ++c) bc.push_back({name, c, TimeFunction::constant(u[c])});
  }
  return bc;
}

void set_affine(const Model& m, SystemState& s, const Mat3& H) {
  const DofMap d(m.mesh);
  for (int n = 0; n < static_cast<int>(m.mesh.num_nodes()); ++n) {
    const Vec3 u = H * m.mesh.nodes[n];
    for (int c = 0; c < m.mesh.dim(); ++c) s.u[d.u(n, c) / d.per_node() * d.dim() + c] = u[c];
  }
}

Mat3 stretch_x(double l) {
  Mat3 H = Mat3::Zero();
  H(0, 0) = l - 1.0;
  return H;
}

}  // namespace

TEST(Shape, Hex8CentreAndVertices) {
  const ShapeFunctions c = shape_functions(ElementKind::hex8, Vec3::Zero());
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(c.N[i], 0.125, 1e-16);
  const auto corners = reference_nodes(ElementKind::hex8);
  for (int k = 0; k < 8; ++k) {
    const ShapeFunctions s = shape_functions(ElementKind::hex8, corners[k]);
    for (int i = 0; i < 8; ++i) EXPECT_EQ(s.N[i], i == k ? 1.0 : 0.0);
  }
}

TEST(Shape, Quad4Vertices) {
  const auto corners = reference_nodes(ElementKind::quad4);
  for (int k = 0; k < 4; ++k) {
    const ShapeFunctions s = shape_functions(ElementKind::quad4, corners[k]);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(s.N[i], i == k ? 1.0 : 0.0);
  }
}

TEST(Shape, PartitionOfUnity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::array<Vec3, 8> X;
  const auto ref = reference_nodes(ElementKind::hex8);
  for (int a = 0; a < 8; ++a) X[a] = 1.3 * ref[a] + Vec3(0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng));
  for (auto kind : {ElementKind::hex8, ElementKind::quad4}) {
    for (int i = 0; i < 100; ++i) {
      const Vec3 xi(u(rng), u(rng), kind == ElementKind::hex8 ? u(rng) : 0.0);
      const ShapeFunctions s = shape_functions(kind, xi);
      double sum = 0.0;
      for (int a = 0; a < s.count; ++a) sum += s.N[a];
      EXPECT_NEAR(sum, 1.0, 1e-14);
      EXPECT_LT(s.dN_dxi.colwise().sum().norm(), 1e-14);
      const MappedShape m = map_shape(kind, std::span<const Vec3>(X.data(), s.count), xi);
      EXPECT_LT(m.dN_dX.colwise().sum().norm(), 1e-14);
      EXPECT_GT(m.detJ, 0.0);
    }
  }
}

TEST(Shape, MappedGradientsReproduceLinearFields) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::array<Vec3, 8> X;
  const auto ref = reference_nodes(ElementKind::hex8);
  for (int a = 0; a < 8; ++a) X[a] = 2.0 * ref[a] + Vec3(0.2 * u(rng), 0.2 * u(rng), 0.2 * u(rng));
  const Vec3 g(0.3, -1.1, 2.0);
  const Vec3 xi(0.2, -0.4, 0.7);
  const MappedShape m = map_shape(ElementKind::hex8, X, xi);
  Vec3 grad = Vec3::Zero();
  for (int a = 0; a < 8; ++a) grad += g.dot(X[a]) * m.dN_dX.row(a).transpose();
  EXPECT_LT((grad - g).norm(), 1e-13);
}

TEST(Mesh, RejectsInvertedElement) {
  Mesh m = box_mesh(1, 1, 1, 1, 1, 1);
  std::swap(m.connectivity[1], m.connectivity[3]);
  try {
    m.validate();
    FAIL() << "inverted element accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("element 0"), std::string::npos) << e.what();
  }
}

TEST(Residual, ZeroAtRest) {
  for (const Mesh& mesh : {box_mesh(2, 1, 1, 2, 1, 1), box_mesh(3, 2, 0, 3, 2, 0)}) {
    Model m;
    m.mesh = mesh;
    m.material = MaterialParams::reference_adhesive();
    const SystemState s = SystemState::initial(m);
    const FieldResiduals r = assemble_residuals(m, s);
    EXPECT_EQ(r.r_u.norm(), 0.0);
    EXPECT_EQ(r.r_phi.norm(), 0.0);
  }
}

TEST(Residual, SingleHexMatchesHandQuadrature) {
  Model m = elastic_model(box_mesh(1, 1, 1, 1, 1, 1));
  SystemState s = SystemState::initial(m);
  Mat3 H;
  H << 0.1, 0.02, -0.03, 0.01, -0.04, 0.05, 0.0, 0.03, 0.08;
  set_affine(m, s, H);
  const FieldResiduals r = assemble_residuals(m, s);
  const Mat3 P = material_response(Mat3::Identity() + H, MaxwellState::virgin(0), m.material, false).P;
  // unit cube: dX/dξ = I/2
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(24);
  for (const auto& q : gauss_rule(ElementKind::hex8)) {
    const ShapeFunctions sf = shape_functions(ElementKind::hex8, q.xi);
    for (int a = 0; a < 8; ++a) {
      const Vec3 grad = 2.0 * sf.dN_dxi.row(a).transpose();
      ref.segment<3>(3 * m.mesh.connectivity[a]) += q.weight * 0.125 * P * grad;
    }
  }
  EXPECT_LT((r.r_u - ref).norm(), 1e-10 * ref.norm());
}

TEST(Residual, ProfileResidualConvergesQuadratically) {
  // exact profile interpolated, no load: interior residual per unit length ~ h²
  auto defect = [](int n) {
    Model m = elastic_model(strip_mesh(40.0, n));
    SystemState s = SystemState::initial(m);
    for (int i = 0; i < static_cast<int>(m.mesh.num_nodes()); ++i)
      s.phi[i] = 1.0 - std::exp(-m.mesh.nodes[i].x() / m.fracture.ell_f);
    const FieldResiduals r = assemble_residuals(m, s);
    const double h = 40.0 / n;
    double worst = 0.0;
    for (int i = 0; i < static_cast<int>(m.mesh.num_nodes()); ++i) {
      const double x = m.mesh.nodes[i].x();
      if (x > 1e-9 && x < 40.0 - 1e-9) worst = std::max(worst, std::abs(r.r_phi[i]) / (h * h));
    }
    return worst;
  };
  const double coarse = defect(100), fine = defect(200);
  EXPECT_GT(coarse / fine, 3.5);
  EXPECT_LT(coarse / fine, 4.5);
}

TEST(Stiffness, MatchesFiniteDifferenceJacobian) {
  const CheckResult r = check_fem_jacobian(20240611, 1e-5);
  EXPECT_TRUE(r.pass()) << r.error << " " << r.detail;
}

TEST(Stiffness, PhaseBlockKeepsFullDrivingTerm) {
  const auto [implemented, halved] = phase_block_errors(20240611);
  EXPECT_LT(implemented, 1e-7);
  EXPECT_GT(halved, 1e-4);
}

TEST(Stiffness, CouplingBlocksAreTransposes) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (const Mesh& mesh : {box_mesh(2, 1, 1, 2, 1, 1), box_mesh(3, 2, 0, 3, 2, 0)}) {
    Model m;
    m.mesh = mesh;
    m.material = MaterialParams::reference_adhesive();
    SystemState s = SystemState::initial(m);
    for (Eigen::Index i = 0; i < s.u.size(); ++i) s.u[i] = u(rng);
    for (Eigen::Index i = 0; i < s.phi.size(); ++i) s.phi[i] = 0.7 + u(rng);
    const StiffnessBlocks b = assemble_stiffness(m, s);
    const Eigen::MatrixXd up(b.K_uphi), pu(b.K_phiu);
    EXPECT_LT((up - pu.transpose()).norm(), 1e-12 * up.norm());
    EXPECT_GT(up.norm(), 0.0);
  }
}

TEST(Stiffness, IntactBlockIndependentOfResidualStiffness) {
  Model a = elastic_model(box_mesh(2, 1, 1, 2, 1, 1));
  Model b = a;
  b.fracture.zeta = 1e-3;
  SystemState s = SystemState::initial(a);
  set_affine(a, s, stretch_x(1.1));
  const Eigen::MatrixXd Ka(assemble_stiffness(a, s).K_uu), Kb(assemble_stiffness(b, s).K_uu);
  EXPECT_LT((Ka - Kb).norm(), 1e-12 * Ka.norm());
}

TEST(Solve, PatchTestGivesUniformField) {
  Model m = elastic_model(box_mesh(2, 2, 2, 2, 2, 2));
  std::vector<int> boundary, interior;
  for (int n = 0; n < static_cast<int>(m.mesh.num_nodes()); ++n) {
    const Vec3& x = m.mesh.nodes[n];
    const bool inside = (x.array() > 1e-9).all() && (x.array() < 2 - 1e-9).all();
    (inside ? interior : boundary).push_back(n);
  }
  ASSERT_EQ(interior.size(), 1u);
  Mat3 H;
  H << 0.05, 0.01, 0.0, 0.02, -0.02, 0.01, 0.0, 0.015, 0.03;
  auto bc = affine_on(m, H, boundary);
  bc.push_back({"all", DofMap::kPhaseField, TimeFunction::constant(1.0)});
  SystemState s = SystemState::initial(m);
  SolveConfig c;
  c.newton_tol = 1e-12;
  solve_step(m, s, bc, 1.0, c);
  const int n = interior[0];
  EXPECT_LT((s.u.segment<3>(3 * n) - H * m.mesh.nodes[n]).norm(), 1e-10);
  const Vector sn = nodal_stress_norm(m, s);
  EXPECT_LT((sn.array() - sn[0]).abs().maxCoeff(), 1e-8 * sn[0]);
  EXPECT_LT(reaction_force(m, s, "n" + std::to_string(boundary[0])).norm() + 1.0, 1e9);  // finite
  const FieldResiduals r = assemble_residuals(m, s);
  EXPECT_LT(r.r_u.segment<3>(3 * n).norm(), 1e-10);
}

TEST(Solve, NewtonConvergesQuadraticallyWhenElastic) {
  Model m = elastic_model(box_mesh(2, 1, 1, 2, 1, 1));
  const std::vector<DirichletCondition> bc{{"xmin", 0, TimeFunction::constant(0.0)},
                                           {"ymin", 1, TimeFunction::constant(0.0)},
                                           {"zmin", 2, TimeFunction::constant(0.0)},
                                           {"xmax", 0, TimeFunction::constant(0.3)}};
  SystemState s = SystemState::initial(m);
  SolveConfig c;
  c.newton_tol = 1e-11;
  const StepDiagnostics d = solve_step(m, s, bc, 1.0, c);
  const auto& r = d.residual_history;
  ASSERT_GE(r.size(), 4u);
  // r[0] is the residual before the new boundary values are imposed
  const double top = *std::max_element(r.begin(), r.end());
  int checked = 0;
  for (std::size_t k = 1; k + 1 < r.size(); ++k) {
    if (r[k] > 0.1 * top || r[k + 1] < 1e-12 * top) continue;  // outside the basin, or at round-off
    EXPECT_LE(r[k + 1] / top, 10.0 * (r[k] / top) * (r[k] / top)) << k;
    ++checked;
  }
  EXPECT_GE(checked, 2);
}

TEST(Solve, ZeroIncrementNeedsNoIteration) {
  Model m = elastic_model(box_mesh(2, 1, 1, 2, 1, 1));
  const std::vector<DirichletCondition> bc{{"xmin", 0, TimeFunction::constant(0.0)},
                                           {"ymin", 1, TimeFunction::constant(0.0)},
                                           {"zmin", 2, TimeFunction::constant(0.0)},
                                           {"xmax", 0, TimeFunction::constant(0.2)}};
  SystemState s = SystemState::initial(m);
  SolveConfig c;
  c.newton_tol = 1e-9;
  solve_step(m, s, bc, 1.0, c);
  const Vector u = s.u;
  const StepDiagnostics d = solve_step(m, s, bc, 1.0, c);
  EXPECT_EQ(d.iterations, 0);
  EXPECT_EQ((s.u - u).norm(), 0.0);
}

TEST(Solve, RejectsNonPositiveStep) {
  Model m = elastic_model(box_mesh(1, 1, 1, 1, 1, 1));
  SystemState s = SystemState::initial(m);
  EXPECT_THROW(solve_step(m, s, {}, 0.0, {}), ValidationError);
}

TEST(Solve, UnknownNodeSetIsReported) {
  Model m = elastic_model(box_mesh(1, 1, 1, 1, 1, 1));
  SystemState s = SystemState::initial(m);
  EXPECT_THROW(solve_step(m, s, {{"nowhere", 0, TimeFunction::constant(0.0)}}, 1.0, {}), ValidationError);
  EXPECT_THROW(reaction_force(m, s, "nowhere"), ValidationError);
}

TEST(Reaction, UnloadedBodyIsFree) {
  Model m = elastic_model(box_mesh(1, 1, 1, 1, 1, 1));
  const SystemState s = SystemState::initial(m);
  EXPECT_EQ(reaction_force(m, s, "xmax").norm(), 0.0);
}

TEST(Reaction, SingleElementUniaxialStretch) {
  for (double l : {1.05, 1.3}) {
    Model m = elastic_model(box_mesh(2.0, 1.5, 0.5, 1, 1, 1));
    SystemState s = SystemState::initial(m);
    set_affine(m, s, stretch_x(l));
    const Mat3 P = material_response(Mat3::Identity() + stretch_x(l), MaxwellState::virgin(0), m.material, false).P;
    const Vec3 right = reaction_force(m, s, "xmax"), left = reaction_force(m, s, "xmin");
    EXPECT_NEAR(right.x(), P(0, 0) * 1.5 * 0.5, 1e-8 * std::abs(P(0, 0)));
    EXPECT_LT((right + left).norm(), 1e-10 * right.norm());
  }
}

TEST(Solve, IrreversibleUnderUnloading) {
  Model m = elastic_model(box_mesh(1, 1, 1, 1, 1, 1));
  const std::vector<int> nodes = m.mesh.node_set("all");
  auto load = affine_on(m, stretch_x(1.6), nodes);
  auto unload = affine_on(m, Mat3::Zero(), nodes);
  SystemState s = SystemState::initial(m);
  SolveConfig c;
  c.newton_tol = 1e-10;
  solve_step(m, s, load, 1.0, c);
  const Vector loaded = s.phi;
  ASSERT_LT(loaded.maxCoeff(), 0.99);
  solve_step(m, s, unload, 1.0, c);
  for (Eigen::Index i = 0; i < s.phi.size(); ++i) EXPECT_LE(s.phi[i], loaded[i]);
}

TEST(Solve, HomogeneousPatchMatchesClosedForm) {
  Mat3 H = Mat3::Zero();
  H(0, 0) = 0.25;
  H(0, 1) = 0.1;
  const HomogeneousResult r = homogeneous_patch(H);
  EXPECT_LT(r.expected, 0.999);
  EXPECT_NEAR(r.phi_min, r.expected, 1e-8);
  EXPECT_NEAR(r.phi_max, r.expected, 1e-8);
}

TEST(Solve, ProfileOnStrip) {
  const ProfileResult r = phase_field_profile(10);
  EXPECT_LT(r.l2_error, 0.01);
}

TEST(Solve, SurfaceEnergyIsMeshObjective) {
  const ProfileResult coarse = phase_field_profile(5), fine = phase_field_profile(10);
  // one crack face per strip of unit cross-section: about g_c/2
  EXPECT_LT(std::abs(coarse.surface_energy - fine.surface_energy) / fine.surface_energy, 0.10);
  EXPECT_NEAR(fine.surface_energy, 0.5 * 4.185, 0.05 * 4.185);
}

TEST(Simulation, TimeSeriesAndMeshRuleWarning) {
  Model m = elastic_model(box_mesh(4, 2, 0, 4, 2, 0));
  m.mesh.node_sets["tip"] = {0};
  BoundaryProgram p;
  p.conditions = {{"xmin", 0, TimeFunction::constant(0.0)},
                  {"ymin", 1, TimeFunction::constant(0.0)},
                  {"xmax", 0, TimeFunction::ramp(0.01)}};
  p.reaction_set = "xmax";
  p.crack_set = "tip";
  p.initial_crack_length = 2.0;  // element size 1 mm is far above the reference ratio
  SolveConfig c;
  c.dt = 1.0;
  c.t_end = 5.0;
  std::vector<std::string> warnings;
  int calls = 0;
  SimulationCallbacks cb;
  cb.warn = [&](const std::string& w) { warnings.push_back(w); };
  cb.on_step = [&](const SystemState&, const SolveResult&) { ++calls; };
  SystemState s = SystemState::initial(m);
  const auto out = run_simulation(m, c, p, s, cb);
  ASSERT_EQ(out.size(), 5u);
  EXPECT_EQ(calls, 5);
  EXPECT_FALSE(warnings.empty());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_NEAR(out[i].t, i + 1.0, 1e-12);
    EXPECT_NEAR(out[i].displacement, 0.01 * (i + 1.0), 1e-12);
    if (i) {
      EXPECT_GT(out[i].force, out[i - 1].force);
    }
  }
}

TEST(Simulation, EnergyDoesNotGrowWhileHeld) {
  // pull a notched plate until it cracks, then hold the clamps
  Model m = elastic_model(box_mesh(8, 8, 0, 16, 16, 0));
  m.fracture.g_c = 0.5;
  m.fracture.ell_f = 1.0;
  m.fracture.viscosity = 0.05;
  for (int n = 0; n < static_cast<int>(m.mesh.num_nodes()); ++n) {
    const Vec3& x = m.mesh.nodes[n];
    if (std::abs(x.y() - 4.0) < 1e-9 && x.x() < 2.0 + 1e-9) m.mesh.node_sets["seed"].push_back(n);
  }
  BoundaryProgram p;
  p.conditions = {{"ymin", 0, TimeFunction::constant(0.0)},
                  {"ymin", 1, TimeFunction::constant(0.0)},
                  {"ymax", 0, TimeFunction::constant(0.0)},
                  {"ymax", 1, TimeFunction::table({{0.0, 0.0}, {10.0, 0.45}, {20.0, 0.45}})},
                  {"seed", DofMap::kPhaseField, TimeFunction::constant(0.0)}};
  p.reaction_set = "ymax";
  p.reaction_component = 1;
  SolveConfig c;
  c.dt = 0.5;
  c.t_end = 20.0;
  SystemState s = SystemState::initial(m);
  const auto out = run_simulation(m, c, p, s);
  double peak = 0.0, surface_at_hold = 0.0;
  for (const auto& r : out) {
    peak = std::max(peak, r.stored_energy + r.surface_energy);
    if (r.t <= 10.0) surface_at_hold = r.surface_energy;
  }
  // the crack keeps growing after the clamps stop
  EXPECT_GT(out.back().surface_energy, surface_at_hold);
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i - 1].t >= 10.0) {
      EXPECT_LE(out[i].stored_energy + out[i].surface_energy,
                out[i - 1].stored_energy + out[i - 1].surface_energy + 0.01 * peak)
          << out[i].t;
    }
}
