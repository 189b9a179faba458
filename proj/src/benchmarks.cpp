// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/benchmarks.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>

#include "chainfield/mesh_gen.hpp"

namespace chainfield {

ProfileResult phase_field_profile(int per_ell, double ell_f, double length_in_ell) {
  Model m;
  const int n = static_cast<int>(std::lround(length_in_ell * per_ell));
  const double length = length_in_ell * ell_f;
  m.mesh = strip_mesh(length, n);
  m.material = MaterialParams::reference_adhesive();
  m.material.branches.clear();
  m.fracture.ell_f = ell_f;
  SystemState s = SystemState::initial(m);
  const std::vector<DirichletCondition> bc{{"all", 0, TimeFunction::constant(0.0)},
                                           {"all", 1, TimeFunction::constant(0.0)},
                                           {"xmin", DofMap::kPhaseField, TimeFunction::constant(0.0)}};
  SolveConfig c;
  c.newton_tol = 1e-10;
  const auto d = solve_step(m, s, bc, 1.0, c);

  // strip nodes: bottom row 0..n, top row n+1..2n+1, φ is uniform across
  ProfileResult r;
  r.elements = n;
  r.h = length / n;
  r.iterations = d.iterations;
  double e2 = 0.0, n2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x0 = r.h * i;
    auto err = [&](double x) {
      const double t = (x - x0) / r.h;
      const double ph = (1.0 - t) * s.phi[i] + t * s.phi[i + 1];
      const double ex = 1.0 - std::exp(-x / ell_f);
      return (ph - ex) * (ph - ex);
    };
    auto ref = [&](double x) {
      const double ex = 1.0 - std::exp(-x / ell_f);
      return ex * ex;
    };
    e2 += boost::math::quadrature::gauss<double, 7>::integrate(err, x0, x0 + r.h);
    n2 += boost::math::quadrature::gauss<double, 7>::integrate(ref, x0, x0 + r.h);
  }
  r.l2_error = std::sqrt(e2 / n2);
  // the strip is one element (h) wide and 1 mm thick
  r.surface_energy = assemble_residuals(m, s).surface_energy / (r.h * m.thickness);
  return r;
}

HomogeneousResult homogeneous_patch(const Mat3& H) {
  Model m;
  m.mesh = box_mesh(1.0, 1.0, 1.0, 2, 2, 2);
  m.material = MaterialParams::reference_adhesive();
  m.material.branches.clear();
  SystemState s = SystemState::initial(m);
  std::vector<DirichletCondition> bc;
  for (int nd = 0; nd < static_cast<int>(m.mesh.num_nodes()); ++nd) {
    const std::string name = "node" + std::to_string(nd);
    m.mesh.node_sets[name] = {nd};
    const Vec3 u = H * m.mesh.nodes[nd];
    for (int c = 0; c < 3; ++c) bc.push_back({name, c, TimeFunction::constant(u[c])});
  }
  SolveConfig c;
  c.newton_tol = 1e-12;
  const auto d = solve_step(m, s, bc, 1.0, c);

  HomogeneousResult r;
  r.W0 = free_energy(Mat3::Identity() + H, MaxwellState::virgin(0), m.material);
  r.expected = homogeneous_phase_field(r.W0, m.fracture.g_c, m.fracture.ell_f, m.fracture.zeta);
  r.phi_min = s.phi.minCoeff();
  r.phi_max = s.phi.maxCoeff();
  r.iterations = d.iterations;
  return r;
}

RunConfig tear_test_config() {
  RunConfig rc;
  rc.model.mesh = angle_specimen_mesh();
  rc.model.material = MaterialParams::reference_adhesive();
  rc.model.thickness = 2.0;
  rc.model.fracture.viscosity = 0.05;

  rc.solver.dt = 0.5;
  rc.solver.t_end = 29.5;
  rc.solver.newton_tol = 1e-6;
  rc.solver.newton_max = 30;

  const int phi = DofMap::kPhaseField;
  rc.program.conditions = {{"clamp_left", 0, TimeFunction::constant(0.0)},
                           {"clamp_left", 1, TimeFunction::constant(0.0)},
                           {"clamp_right", 0, TimeFunction::ramp(kTearTestRate)},
                           {"clamp_right", 1, TimeFunction::constant(0.0)},
                           {"notch", phi, TimeFunction::constant(0.0)}};
  rc.program.reaction_set = "clamp_right";
  rc.program.reaction_component = 0;
  rc.program.crack_set = "notch";
  rc.program.initial_crack_length = 9.31;
  rc.output.prefix = "tear";
  rc.output.vtk_stride = 5;
  return rc;
}

TearTestMonitor::TearTestMonitor(const Model& model, const BoundaryProgram& program)
    : model_(model), constrained_(model.mesh.num_nodes(), 0) {
  for (const auto& c : program.conditions)
    if (c.component == DofMap::kPhaseField)
      for (int n : model.mesh.node_set(c.node_set)) constrained_[n] = 1;
  if (model.mesh.node_sets.count("ligament")) ligament_ = model.mesh.node_set("ligament");
  last_phi_ = Vector::Ones(static_cast<Eigen::Index>(model.mesh.num_nodes()));
}

void TearTestMonitor::on_step(const SystemState& state, const SolveResult& r) {
  ++steps_;
  if (r.force > peak_force_) {
    peak_force_ = r.force;
    peak_time_ = r.t;
  }
  final_force_ = r.force;
  final_time_ = r.t;
  for (Eigen::Index i = 0; i < state.phi.size(); ++i)
    if (state.phi[i] > last_phi_[i]) ++phi_increases_;
  last_phi_ = state.phi;

  if (init_node_ < 0) {
    double lowest = 0.05;
    for (Eigen::Index i = 0; i < state.phi.size(); ++i)
      if (!constrained_[i] && state.phi[i] < lowest) {
        lowest = state.phi[i];
        init_node_ = static_cast<int>(i);
      }
    if (init_node_ >= 0) init_time_ = r.t;
  }
  ligament_cracked_ = 0;
  for (int n : ligament_)
    if (state.phi[n] < 0.05) ++ligament_cracked_;
}

bool TearTestMonitor::initiation_in(const std::string& node_set) const {
  if (init_node_ < 0 || !model_.mesh.node_sets.count(node_set)) return false;
  for (int n : model_.mesh.node_set(node_set))
    if (n == init_node_) return true;
  return false;
}

}  // namespace chainfield
