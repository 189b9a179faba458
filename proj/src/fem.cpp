// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "chainfield/element.hpp"
#include "chainfield/errors.hpp"

namespace chainfield {

void Model::validate() const {
  mesh.validate();
  material.validate();
  fracture.validate();
  if (!(thickness > 0.0)) throw ValidationError("thickness must be positive");
}

SystemState SystemState::initial(const Model& model) {
  SystemState s;
  const auto& mesh = model.mesh;
  s.u = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()) * mesh.dim());
  s.phi = Vector::Ones(static_cast<Eigen::Index>(mesh.num_nodes()));
  const std::size_t nq = gauss_rule(mesh.kind).size();
  s.qp.assign(mesh.num_elements() * nq, QuadPointState{MaxwellState::virgin(model.material.branches.size()), 1.0});
  return s;
}

Vector DofMap::pack(const SystemState& s) const {
  Vector x(size());
  for (int n = 0; n < nodes_; ++n) {
    for (int c = 0; c < dim_; ++c) x[u(n, c)] = s.u[n * dim_ + c];
    x[phi(n)] = s.phi[n];
  }
  return x;
}

void DofMap::unpack(const Vector& x, SystemState& s) const {
  s.u.resize(static_cast<Eigen::Index>(nodes_) * dim_);
  s.phi.resize(nodes_);
  for (int n = 0; n < nodes_; ++n) {
    for (int c = 0; c < dim_; ++c) s.u[n * dim_ + c] = x[u(n, c)];
    s.phi[n] = x[phi(n)];
  }
}

int worker_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CHAINFIELD_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n > 0 ? n : cap, cap);
  }
  return std::max(1, n);
}

namespace {

// Runs body(e) for every element, in contiguous chunks. The first exception
// in element order is rethrown.
template <class Body>
void for_each_element(std::size_t count, Body&& body) {
  const auto threads = static_cast<std::size_t>(std::min<int>(worker_threads(), static_cast<int>(std::max<std::size_t>(count / 64, 1))));
  if (threads <= 1) {
    for (std::size_t e = 0; e < count; ++e) body(e);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = t * chunk, hi = std::min(count, lo + chunk);
      try {
        for (std::size_t e = lo; e < hi; ++e) body(e);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

Mat3 isochoric_right_cauchy_green(const Mat3& F) {
  return std::pow(F.determinant(), -2.0 / 3.0) * (F.transpose() * F);
}

// Central differences of P over F, re-running the evolution law.
std::pair<Tensor4, Mat3> numerical_tangent(const Mat3& F, const MaxwellState& converged, double dt,
                                           const MaterialParams& params) {
  Tensor4 A = Tensor4::Zero();
  Mat3 dW = Mat3::Zero();
  const double h = 1e-6;
  auto response = [&](const Mat3& Fp) {
    const MaxwellState s = dt > 0.0 ? evolve(converged, isochoric_right_cauchy_green(Fp), dt, params) : converged;
    return material_response(Fp, s, params, false);
  };
  for (int c = 0; c < 3; ++c)
    for (int D = 0; D < 3; ++D) {
      Mat3 Fp = F, Fm = F;
      Fp(c, D) += h;
      Fm(c, D) -= h;
      const MaterialResponse rp = response(Fp), rm = response(Fm);
      const Mat3 dP = (rp.P - rm.P) / (2.0 * h);
      dW(c, D) = (rp.energy - rm.energy) / (2.0 * h);
      for (int a = 0; a < 3; ++a)
        for (int B = 0; B < 3; ++B) A(pair_index(a, B), pair_index(c, D)) = dP(a, B);
    }
  return {A, dW};
}

struct ElementBuffer {
  Eigen::VectorXd r;
  Eigen::MatrixXd K;
  double stored = 0.0, surface = 0.0, undegraded = 0.0;
};

}  // namespace

AssemblyResult assemble(const Model& model, const SystemState& trial, const std::vector<QuadPointState>& converged_qp,
                        const AssemblyOptions& options) {
  const Mesh& mesh = model.mesh;
  const DofMap dofs(mesh);
  const int dim = mesh.dim();
  const int npe = mesh.nodes_per_element();
  const int ndpn = dofs.per_node();
  const int nde = npe * ndpn;
  const auto rule = gauss_rule(mesh.kind);
  const std::size_t nq = rule.size();
  const std::size_t ne = mesh.num_elements();
  const double zeta = model.fracture.zeta;
  const double ell = model.fracture.ell_f;
  const double thick = mesh.kind == ElementKind::quad4 ? model.thickness : 1.0;

  if (converged_qp.size() != ne * nq) throw ValidationError("quadrature state size does not match the mesh");

  AssemblyResult out;
  out.qp.resize(ne * nq);
  std::vector<ElementBuffer> buffers(ne);

  for_each_element(ne, [&](std::size_t e) {
    const auto conn = mesh.element(e);
    std::array<Vec3, kMaxElementNodes> X{};
    Eigen::Matrix<double, kMaxElementNodes, 3> ue = Eigen::Matrix<double, kMaxElementNodes, 3>::Zero();
    std::array<double, kMaxElementNodes> phie{};
    for (int a = 0; a < npe; ++a) {
      const int n = conn[a];
      X[a] = mesh.nodes[n];
      if (dim == 2) X[a].z() = 0.0;
      for (int c = 0; c < dim; ++c) ue(a, c) = trial.u[n * dim + c];
      phie[a] = trial.phi[n];
    }
    ElementBuffer& buf = buffers[e];
    buf.r = Eigen::VectorXd::Zero(nde);
    if (options.with_matrix) buf.K = Eigen::MatrixXd::Zero(nde, nde);

    for (std::size_t q = 0; q < nq; ++q) {
      const MappedShape ms = map_shape(mesh.kind, std::span<const Vec3>(X.data(), npe), rule[q].xi);
      if (!(ms.detJ > 0.0)) {
        std::ostringstream os;
        os << "non-positive Jacobian " << ms.detJ << " at quadrature point " << q;
        throw ElementInversionError(e, os.str());
      }
      const double dV = rule[q].weight * ms.detJ * thick;
      const auto& N = ms.local.N;
      const auto& dN = ms.dN_dX;

      Mat3 F = Mat3::Identity();
      for (int a = 0; a < npe; ++a) F += ue.row(a).transpose() * dN.row(a);
      // ΣN = 1, ΣdN = 0; interpolating differences keeps uniform φ exact
      double phi = phie[0];
      Vec3 gphi = Vec3::Zero();
      for (int a = 0; a < npe; ++a) {
        phi += N[a] * (phie[a] - phie[0]);
        gphi += (phie[a] - phie[0]) * dN.row(a).transpose();
      }

      const QuadPointState& old = converged_qp[e * nq + q];
      QuadPointState& now = out.qp[e * nq + q];
      const DeformationState ds = decompose(F);
      const bool tangent_needed = options.with_matrix && options.tangent != TangentKind::numerical;
      StressUpdate up;
      if (options.tangent == TangentKind::consistent) {
        up = update_stress(F, old.maxwell, options.dt, model.material, tangent_needed);
      } else {
        // continuum / numerical: A at the frozen updated state
        up.state = options.dt > 0.0 ? evolve(old.maxwell, isochoric_right_cauchy_green(F),
                                             options.dt, model.material)
                                    : old.maxwell;
        up.response = material_response(F, up.state, model.material, tangent_needed);
        up.dW = up.response.P;
        if (options.with_matrix && options.tangent == TangentKind::numerical) {
          const auto [A, dW] = numerical_tangent(F, old.maxwell, options.dt, model.material);
          up.response.A = A;
          up.dW = dW;
        }
      }
      now.maxwell = std::move(up.state);
      now.lambda_c = chain_stretch_iso(ds.I1_bar);
      const MaterialResponse& mr = up.response;
      const Mat3& dW0 = up.dW;

      const Degradation g = degradation(phi, zeta);
      const double W0 = mr.energy;
      const double Ec = critical_energy(old.lambda_c, model.fracture, model.material.survival_iso);
      buf.stored += g.value * W0 * dV;
      buf.undegraded += W0 * dV;
      buf.surface += Ec * crack_density(phi, gphi, ell) * dV;

      // P·∇N_i per node, reused by r_u and the coupling blocks.
      Eigen::Matrix<double, 3, kMaxElementNodes> PdN;
      Eigen::Matrix<double, 3, kMaxElementNodes> dWdN;
      for (int a = 0; a < npe; ++a) {
        PdN.col(a) = mr.P * dN.row(a).transpose();
        dWdN.col(a) = dW0 * dN.row(a).transpose();
      }

      const double drive = g.d1 * W0;        // 2(1−ζ)φW₀
      const double resist = -(Ec / ell) * (1.0 - phi);
      for (int i = 0; i < npe; ++i) {
        for (int c = 0; c < dim; ++c) buf.r[i * ndpn + c] += g.value * PdN(c, i) * dV;
        buf.r[i * ndpn + dim] += ((drive + resist) * N[i] + Ec * ell * gphi.dot(dN.row(i).transpose())) * dV;
      }
      if (!options.with_matrix) continue;

      const double kpp = 2.0 * (1.0 - zeta) * W0 + Ec / ell;
      for (int i = 0; i < npe; ++i) {
        for (int j = 0; j < npe; ++j) {
          for (int a = 0; a < dim; ++a) {
            for (int c = 0; c < dim; ++c) {
              double s = 0.0;
              for (int B = 0; B < dim; ++B)
                for (int D = 0; D < dim; ++D) s += dN(i, B) * mr.A(pair_index(a, B), pair_index(c, D)) * dN(j, D);
              buf.K(i * ndpn + a, j * ndpn + c) += g.value * s * dV;
            }
            const double coupling = g.d1 * PdN(a, i) * N[j] * dV;
            buf.K(i * ndpn + a, j * ndpn + dim) += coupling;
          }
          // ∂r_φ,i/∂u_j: 2(1−ζ)φ N_i dW₀/dF : ∇N_j
          for (int c = 0; c < dim; ++c) buf.K(i * ndpn + dim, j * ndpn + c) += g.d1 * N[i] * dWdN(c, j) * dV;
          buf.K(i * ndpn + dim, j * ndpn + dim) +=
              (kpp * N[i] * N[j] + Ec * ell * dN.row(i).dot(dN.row(j))) * dV;
        }
      }
    }
  });

  out.residual = Vector::Zero(dofs.size());
  std::vector<Eigen::Triplet<double>> trip;
  if (options.with_matrix) trip.reserve(ne * static_cast<std::size_t>(nde * nde));
  std::vector<int> gdof(nde);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto conn = mesh.element(e);
    for (int a = 0; a < npe; ++a)
      for (int c = 0; c < ndpn; ++c) gdof[a * ndpn + c] = conn[a] * ndpn + c;
    const ElementBuffer& buf = buffers[e];
    for (int i = 0; i < nde; ++i) out.residual[gdof[i]] += buf.r[i];
    if (options.with_matrix)
      for (int j = 0; j < nde; ++j)
        for (int i = 0; i < nde; ++i)
          if (buf.K(i, j) != 0.0) trip.emplace_back(gdof[i], gdof[j], buf.K(i, j));
    out.stored_energy += buf.stored;
    out.surface_energy += buf.surface;
    out.undegraded_energy += buf.undegraded;
  }
  if (options.with_matrix) {
    out.stiffness.resize(dofs.size(), dofs.size());
    out.stiffness.setFromTriplets(trip.begin(), trip.end());
  }
  return out;
}

FieldResiduals assemble_residuals(const Model& model, const SystemState& state) {
  const AssemblyResult a = assemble(model, state, state.qp, {0.0, false, TangentKind::continuum});
  const DofMap dofs(model.mesh);
  const int nn = static_cast<int>(model.mesh.num_nodes());
  FieldResiduals r;
  r.r_u.resize(static_cast<Eigen::Index>(nn) * dofs.dim());
  r.r_phi.resize(nn);
  for (int n = 0; n < nn; ++n) {
    for (int c = 0; c < dofs.dim(); ++c) r.r_u[n * dofs.dim() + c] = a.residual[dofs.u(n, c)];
    r.r_phi[n] = a.residual[dofs.phi(n)];
  }
  r.stored_energy = a.stored_energy;
  r.surface_energy = a.surface_energy;
  return r;
}

namespace {

// Selection matrix picking the listed rows of a full vector.
SparseMatrix selector(const std::vector<int>& rows, int n) {
  SparseMatrix S(static_cast<Eigen::Index>(rows.size()), n);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) t.emplace_back(static_cast<int>(i), rows[i], 1.0);
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

}  // namespace

StiffnessBlocks assemble_stiffness(const Model& model, const SystemState& state) {
  const AssemblyResult a = assemble(model, state, state.qp, {0.0, true, TangentKind::continuum});
  const DofMap dofs(model.mesh);
  const int nn = static_cast<int>(model.mesh.num_nodes());
  std::vector<int> ud, pd;
  for (int n = 0; n < nn; ++n) {
    for (int c = 0; c < dofs.dim(); ++c) ud.push_back(dofs.u(n, c));
    pd.push_back(dofs.phi(n));
  }
  const SparseMatrix Su = selector(ud, dofs.size()), Sp = selector(pd, dofs.size());
  StiffnessBlocks b;
  b.K_uu = Su * a.stiffness * SparseMatrix(Su.transpose());
  b.K_uphi = Su * a.stiffness * SparseMatrix(Sp.transpose());
  b.K_phiu = Sp * a.stiffness * SparseMatrix(Su.transpose());
  b.K_phiphi = Sp * a.stiffness * SparseMatrix(Sp.transpose());
  return b;
}

// ---------------------------------------------------------------------------

TimeFunction TimeFunction::ramp(double rate) {
  TimeFunction f({{0.0, 0.0}});
  f.ramp_rate_ = rate;
  return f;
}

double TimeFunction::operator()(double t) const {
  if (ramp_rate_) return *ramp_rate_ * std::max(t, 0.0);
  if (points_.empty()) return 0.0;
  if (t <= points_.front().first) return points_.front().second;
  if (t >= points_.back().first) return points_.back().second;
  const auto it = std::upper_bound(points_.begin(), points_.end(), t,
                                   [](double v, const std::pair<double, double>& p) { return v < p.first; });
  const auto& [t1, v1] = *it;
  const auto& [t0, v0] = *(it - 1);
  return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

void SolveConfig::validate() const {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(t_end >= 0.0)) throw ValidationError("t_end must be non-negative");
  if (!(newton_tol > 0.0)) throw ValidationError("newton_tol must be positive");
  if (newton_max < 1) throw ValidationError("newton_max must be at least 1");
  if (max_halvings < 0) throw ValidationError("max_halvings must be non-negative");
}

namespace {

// Jacobi preconditioner with dense per-node blocks; block ids give the node
// each reduced unknown belongs to.
class NodalBlockJacobi {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  NodalBlockJacobi() = default;
  void set_blocks(std::vector<int> block_of) { block_of_ = std::move(block_of); }

  template <class M>
  NodalBlockJacobi& analyzePattern(const M&) { return *this; }
  template <class M>
  NodalBlockJacobi& factorize(const M& mat) {
    const int n = static_cast<int>(mat.rows());
    if (static_cast<int>(block_of_.size()) != n) {
      block_of_.resize(n);
      for (int i = 0; i < n; ++i) block_of_[i] = i;
    }
    // Unknowns of one block are contiguous in the reduced numbering.
    starts_.clear();
    for (int i = 0; i < n; ++i)
      if (i == 0 || block_of_[i] != block_of_[i - 1]) starts_.push_back(i);
    starts_.push_back(n);
    inverses_.clear();
    const SparseMatrix K = mat;
    for (std::size_t b = 0; b + 1 < starts_.size(); ++b) {
      const int lo = starts_[b], sz = starts_[b + 1] - lo;
      Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(sz, sz);
      for (int j = lo; j < lo + sz; ++j)
        for (SparseMatrix::InnerIterator it(K, j); it; ++it)
          if (it.row() >= lo && it.row() < lo + sz) blk(it.row() - lo, j - lo) = it.value();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(blk);
      inverses_.push_back(lu.isInvertible() ? Eigen::MatrixXd(lu.inverse()) : Eigen::MatrixXd::Identity(sz, sz));
    }
    return *this;
  }
  template <class M>
  NodalBlockJacobi& compute(const M& mat) { return factorize(mat); }

  template <class Rhs>
  Vector solve(const Rhs& b) const {
    Vector x(b.size());
    for (std::size_t k = 0; k + 1 < starts_.size(); ++k) {
      const int lo = starts_[k], sz = starts_[k + 1] - lo;
      x.segment(lo, sz) = inverses_[k] * b.segment(lo, sz);
    }
    return x;
  }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

 private:
  std::vector<int> block_of_;
  std::vector<int> starts_;
  std::vector<Eigen::MatrixXd> inverses_;
};

Vector linear_solve(const SparseMatrix& K, const Vector& b, LinearSolverKind kind, const std::vector<int>& block_of) {
  if (b.size() == 0) return b;
  if (b.lpNorm<Eigen::Infinity>() == 0.0) return Vector::Zero(b.size());
  Vector x;
  if (kind == LinearSolverKind::direct_sparse) {
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw ConvergenceError("sparse factorisation failed: " + lu.lastErrorMessage());
    x = lu.solve(b);
    // Normwise backward error, refined a few times; a residual relative to
    // ‖b‖ alone is unattainable once nearly broken elements drive the
    // condition number towards 1e9.
    Vector kabs = Vector::Zero(K.rows());
    for (int j = 0; j < K.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(K, j); it; ++it) kabs[it.row()] += std::abs(it.value());
    const double knorm = kabs.maxCoeff();
    auto backward_error = [&] {
      return (K * x - b).lpNorm<Eigen::Infinity>() / (knorm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
    };
    double err = backward_error();
    for (int sweep = 0; sweep < 3 && err > 1e-14; ++sweep) {
      x += lu.solve(Vector(b - K * x));
      err = backward_error();
    }
    if (!(err <= 1e-10)) {
      std::ostringstream os;
      os << "direct solve backward error " << err << " exceeds 1e-10";
      throw ConvergenceError(os.str());
    }
  } else {
    Eigen::BiCGSTAB<SparseMatrix, NodalBlockJacobi> it;
    it.preconditioner().set_blocks(block_of);
    it.setTolerance(1e-8);
    it.setMaxIterations(std::max<Eigen::Index>(1000, 4 * K.rows()));
    it.compute(K);
    x = it.solve(b);
    if (it.info() != Eigen::Success || !x.allFinite()) {
      std::ostringstream os;
      os << "iterative solver breakdown after " << it.iterations() << " iterations (error " << it.error() << ")";
      throw ConvergenceError(os.str());
    }
  }
  if (!x.allFinite()) throw ConvergenceError("linear solve produced non-finite values");
  return x;
}

}  // namespace

StepDiagnostics solve_step(const Model& model, SystemState& state, const std::vector<DirichletCondition>& bcs,
                           double dt, const SolveConfig& config) {
  if (!(dt > 0.0)) throw ValidationError("solve_step: dt must be positive");
  const Mesh& mesh = model.mesh;
  const DofMap dofs(mesh);
  const int n = dofs.size();
  const double t_new = state.t + dt;

  // Prescribed values at the end of the step; later conditions win.
  std::vector<char> fixed(n, 0);
  Vector x_n = dofs.pack(state);
  Vector x = x_n;
  for (const auto& bc : bcs) {
    if (bc.component != DofMap::kPhaseField && (bc.component < 0 || bc.component >= dofs.dim()))
      throw ValidationError("Dirichlet component " + std::to_string(bc.component) + " out of range for set '" +
                            bc.node_set + "'");
    const double v = bc.value(t_new);
    for (int node : mesh.node_set(bc.node_set)) {
      const int d = dofs.dof(node, bc.component);
      fixed[d] = 1;
      x[d] = v;
    }
  }
  const Vector dx_c = x - x_n;

  // Irreversibility box for φ.
  Vector lo = Vector::Constant(n, -std::numeric_limits<double>::infinity());
  Vector hi = Vector::Constant(n, std::numeric_limits<double>::infinity());
  for (int node = 0; node < static_cast<int>(mesh.num_nodes()); ++node) {
    const int d = dofs.phi(node);
    lo[d] = 0.0;
    hi[d] = config.clamp_irreversibility ? std::min(1.0, x_n[d]) : 1.0;
  }

  StepDiagnostics diag;
  std::vector<char> active(n, 0);
  AssemblyOptions opts{dt, true, config.tangent};

  // Lumped rate term (η/dt)·m_i·(φ_i − φ_n,i), if requested.
  Vector visc;
  if (model.fracture.viscosity > 0.0 && dt > 0.0) visc = nodal_volumes(model) * (model.fracture.viscosity / dt);
  auto assemble_at = [&](const SystemState& s) {
    AssemblyResult a = assemble(model, s, state.qp, opts);
    if (visc.size() > 0) {
      std::vector<Eigen::Triplet<double>> diag_t;
      for (int node = 0; node < visc.size(); ++node) {
        const int d = dofs.phi(node);
        a.residual[d] += visc[node] * (s.phi[node] - x_n[d]);
        diag_t.emplace_back(d, d, visc[node]);
      }
      SparseMatrix Dm(n, n);
      Dm.setFromTriplets(diag_t.begin(), diag_t.end());
      a.stiffness += Dm;
    }
    return a;
  };

  auto residual_norm = [&](const Vector& r) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      if (!fixed[i] && !active[i]) s += r[i] * r[i];
    return std::sqrt(s);
  };
  // A φ dof sits on an active bound when it is at the bound and the
  // residual pushes it outward by more than round-off.
  const double push = 1e-3 * config.newton_tol;
  auto update_active = [&](const Vector& xs, const Vector& r) {
    int count = 0;
    for (int i = 0; i < n; ++i) {
      active[i] = 0;
      if (fixed[i] || !std::isfinite(lo[i])) continue;
      if ((xs[i] >= hi[i] && r[i] < -push) || (xs[i] <= lo[i] && r[i] > push)) {
        active[i] = 1;
        ++count;
      }
    }
    diag.active_bounds = count;
  };
  // Newton direction over the free, inactive dofs.
  auto newton_direction = [&](const AssemblyResult& a, const Vector& rhs_full) {
    std::vector<int> free, block_of;
    for (int i = 0; i < n; ++i)
      if (!fixed[i] && !active[i]) {
        free.push_back(i);
        block_of.push_back(i / dofs.per_node());
      }
    const SparseMatrix S = selector(free, n);
    const SparseMatrix Kff = S * a.stiffness * SparseMatrix(S.transpose());
    const Vector dxf = linear_solve(Kff, -(S * rhs_full), config.linear_solver, block_of);
    Vector dx = Vector::Zero(n);
    for (std::size_t k = 0; k < free.size(); ++k) dx[free[k]] = dxf[static_cast<Eigen::Index>(k)];
    return dx;
  };
  auto project = [&](const Vector& xs) {
    Vector p = xs;
    for (int i = 0; i < n; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    return p;
  };
  // Assembles at xs; nullopt if the point is not admissible (inverted
  // element, det F <= 0 or a failed local update).
  auto evaluate = [&](const Vector& xs, SystemState& into) -> std::optional<AssemblyResult> {
    dofs.unpack(xs, into);
    try {
      return assemble_at(into);
    } catch (const SingularDeformationError&) {
    } catch (const ElementInversionError&) {
    } catch (const ConvergenceError&) {
    }
    return std::nullopt;
  };

  SystemState trial = state;
  const bool has_increment = dx_c.cwiseAbs().maxCoeff() > 0.0;

  std::optional<AssemblyResult> cur;
  {
    // Predictor: linearise about the converged state and carry the
    // prescribed increment through K_fc.
    AssemblyResult a0 = assemble_at(state);
    const Vector rhs = a0.residual + a0.stiffness * dx_c;
    update_active(x_n, rhs);
    const double r0 = residual_norm(a0.residual);
    diag.residual_history.push_back(r0);
    if (!has_increment && r0 < config.newton_tol) {
      state.qp = std::move(a0.qp);
      state.t = t_new;
      return diag;
    }
    const Vector predicted = project(x + newton_direction(a0, rhs));
    ++diag.iterations;
    cur = evaluate(predicted, trial);
    if (cur) {
      x = predicted;
    } else {
      cur = evaluate(x, trial);  // prescribed values only
      if (!cur) throw ConvergenceError("no admissible predictor at t = " + std::to_string(t_new));
    }
  }

  constexpr int kMaxBacktracks = 8;
  for (;;) {
    update_active(x, cur->residual);
    const double r = residual_norm(cur->residual);
    diag.residual_history.push_back(r);
    if (!std::isfinite(r)) throw ConvergenceError("non-finite residual");
    if (r < config.newton_tol) {
      trial.qp = std::move(cur->qp);
      trial.t = t_new;
      state = std::move(trial);
      return diag;
    }
    if (diag.iterations >= config.newton_max) {
      std::ostringstream os;
      os << "Newton did not converge in " << config.newton_max << " iterations at t = " << t_new
         << " (residual " << r << ")";
      throw ConvergenceError(os.str());
    }
    const Vector dx = newton_direction(*cur, cur->residual);
    ++diag.iterations;
    // Backtracking: halve the step until the point is admissible and the
    // residual decreases; the last admissible trial is taken regardless.
    std::optional<AssemblyResult> next;
    Vector x_next;
    const std::vector<char> active_here = active;
    double alpha = 1.0;
    for (int ls = 0; ls <= kMaxBacktracks; ++ls, alpha *= 0.5) {
      const Vector xt = project(x + alpha * dx);
      auto at = evaluate(xt, trial);
      if (!at) continue;
      update_active(xt, at->residual);
      const double rt = residual_norm(at->residual);
      active = active_here;
      next = std::move(at);
      x_next = xt;
      if (std::isfinite(rt) && rt < r) break;
    }
    if (!next) throw ConvergenceError("Newton update leaves the admissible set at t = " + std::to_string(t_new));
    x = x_next;
    cur = std::move(next);
    dofs.unpack(x, trial);
  }
}

Vec3 reaction_force(const Model& model, const SystemState& state, const std::string& node_set) {
  const auto& nodes = model.mesh.node_set(node_set);
  const AssemblyResult a = assemble(model, state, state.qp, {0.0, false, TangentKind::continuum});
  const DofMap dofs(model.mesh);
  Vec3 f = Vec3::Zero();
  for (int node : nodes)
    for (int c = 0; c < dofs.dim(); ++c) f[c] += a.residual[dofs.u(node, c)];
  return f;
}

Vector nodal_volumes(const Model& model) {
  const Mesh& mesh = model.mesh;
  const int npe = mesh.nodes_per_element();
  const auto rule = gauss_rule(mesh.kind);
  const double thick = mesh.kind == ElementKind::quad4 ? model.thickness : 1.0;
  Vector v = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto conn = mesh.element(e);
    std::array<Vec3, kMaxElementNodes> X{};
    for (int a = 0; a < npe; ++a) {
      X[a] = mesh.nodes[conn[a]];
      if (mesh.dim() == 2) X[a].z() = 0.0;
    }
    for (const auto& qp : rule) {
      const MappedShape ms = map_shape(mesh.kind, std::span<const Vec3>(X.data(), npe), qp.xi);
      for (int a = 0; a < npe; ++a) v[conn[a]] += ms.local.N[a] * qp.weight * ms.detJ * thick;
    }
  }
  return v;
}

double max_element_size_near(const Mesh& mesh, const std::vector<int>& node_set) {
  std::vector<char> mark(mesh.num_nodes(), 0);
  for (int n : node_set) mark[n] = 1;
  const int npe = mesh.nodes_per_element();
  double h = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto conn = mesh.element(e);
    if (std::none_of(conn.begin(), conn.end(), [&](int n) { return mark[n] != 0; })) continue;
    for (int a = 0; a < npe; ++a)
      for (int b = a + 1; b < npe; ++b) {
        // element edges only: nodes differing in one local coordinate
        const auto ref = reference_nodes(mesh.kind);
        if ((ref[a] - ref[b]).cwiseAbs().sum() != 2.0) continue;
        h = std::max(h, (mesh.nodes[conn[a]] - mesh.nodes[conn[b]]).norm());
      }
  }
  return h;
}

namespace {

double mean_displacement(const Model& model, const SystemState& s, const BoundaryProgram& p) {
  if (p.reaction_set.empty()) return 0.0;
  const auto& nodes = model.mesh.node_set(p.reaction_set);
  if (nodes.empty()) return 0.0;
  double sum = 0.0;
  for (int n : nodes) sum += s.u[n * model.mesh.dim() + p.reaction_component];
  return sum / static_cast<double>(nodes.size());
}

SolveResult make_result(const Model& model, const SystemState& s, const BoundaryProgram& p, int iterations,
                        bool keep_fields) {
  SolveResult r;
  r.t = s.t;
  r.newton_iterations = iterations;
  r.displacement = mean_displacement(model, s, p);
  const AssemblyResult a = assemble(model, s, s.qp, {0.0, false, TangentKind::continuum});
  if (!p.reaction_set.empty()) {
    const DofMap dofs(model.mesh);
    for (int n : model.mesh.node_set(p.reaction_set)) r.force += a.residual[dofs.u(n, p.reaction_component)];
  }
  r.stored_energy = a.stored_energy;
  r.surface_energy = a.surface_energy;
  if (keep_fields) {
    r.u = s.u;
    r.phi = s.phi;
  }
  return r;
}

}  // namespace

std::vector<SolveResult> run_simulation(const Model& model, const SolveConfig& config, const BoundaryProgram& program,
                                        SystemState& state, const SimulationCallbacks& callbacks) {
  config.validate();
  model.validate();
  for (const auto& bc : program.conditions) (void)model.mesh.node_set(bc.node_set);
  if (!program.reaction_set.empty()) (void)model.mesh.node_set(program.reaction_set);
  if (program.reaction_component < 0 || program.reaction_component >= model.mesh.dim())
    throw ValidationError("reaction component out of range");

  if (!program.crack_set.empty() && program.initial_crack_length > 0.0) {
    const double h = max_element_size_near(model.mesh, model.mesh.node_set(program.crack_set));
    const double limit = kReferenceCrackMeshRatio * program.initial_crack_length;
    if (h > limit && callbacks.warn) {
      std::ostringstream os;
      os << "element size near the initial crack h = " << h << " mm exceeds " << limit << " mm (h/l = " << h / program.initial_crack_length
         << ", reference ratio " << kReferenceCrackMeshRatio << ")";
      callbacks.warn(os.str());
    }
  }

  std::vector<SolveResult> series;
  auto accept = [&](int iterations) {
    series.push_back(make_result(model, state, program, iterations, callbacks.keep_fields));
    if (callbacks.on_step) callbacks.on_step(state, series.back());
  };

  // Attempts [state.t, state.t + dt]; on failure the interval is split in two.
  std::function<void(double, int)> advance = [&](double dt, int level) {
    SystemState backup = state;
    try {
      const StepDiagnostics d = solve_step(model, state, program.conditions, dt, config);
      accept(d.iterations);
      return;
    } catch (const ConvergenceError& err) {
      state = std::move(backup);
      if (level >= config.max_halvings) {
        std::ostringstream os;
        os << "step from t = " << state.t << " failed after " << level << " halvings: " << err.what();
        throw ConvergenceError(os.str());
      }
    } catch (const SingularDeformationError& err) {
      state = std::move(backup);
      if (level >= config.max_halvings) throw;
    } catch (const ElementInversionError& err) {
      state = std::move(backup);
      if (level >= config.max_halvings) throw;
    }
    advance(0.5 * dt, level + 1);
    advance(0.5 * dt, level + 1);
  };

  const double t0 = state.t;
  const double span = config.t_end - t0;
  if (span <= 0.0) return series;
  const auto steps = static_cast<long>(std::ceil(span / config.dt - 1e-9));
  for (long k = 1; k <= steps; ++k) {
    const double target = k == steps ? config.t_end : t0 + static_cast<double>(k) * config.dt;
    advance(target - state.t, 0);
    state.t = target;  // absorb round-off of the halving sums
  }
  return series;
}

Vector nodal_stress_norm(const Model& model, const SystemState& state) {
  const Mesh& mesh = model.mesh;
  const int dim = mesh.dim();
  const int npe = mesh.nodes_per_element();
  const auto rule = gauss_rule(mesh.kind);
  const std::size_t nq = rule.size();
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
  Vector count = Vector::Zero(sum.size());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto conn = mesh.element(e);
    std::array<Vec3, kMaxElementNodes> X{};
    for (int a = 0; a < npe; ++a) {
      X[a] = mesh.nodes[conn[a]];
      if (dim == 2) X[a].z() = 0.0;
    }
    double avg = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const MappedShape ms = map_shape(mesh.kind, std::span<const Vec3>(X.data(), npe), rule[q].xi);
      Mat3 F = Mat3::Identity();
      double phi = 0.0;
      for (int a = 0; a < npe; ++a) {
        Vec3 ua = Vec3::Zero();
        for (int c = 0; c < dim; ++c) ua[c] = state.u[conn[a] * dim + c];
        F += ua * ms.dN_dX.row(a);
        phi += ms.local.N[a] * state.phi[conn[a]];
      }
      const MaterialResponse mr = material_response(F, state.qp[e * nq + q].maxwell, model.material, false);
      const Mat3 sigma = degradation(phi, model.fracture.zeta).value * mr.T / F.determinant();
      const Mat3 dev = sigma - sigma.trace() / 3.0 * Mat3::Identity();
      avg += std::sqrt(1.5 * (dev.array() * dev.array()).sum());
    }
    avg /= static_cast<double>(nq);
    for (int a = 0; a < npe; ++a) {
      sum[conn[a]] += avg;
      count[conn[a]] += 1.0;
    }
  }
  for (Eigen::Index i = 0; i < sum.size(); ++i)
    if (count[i] > 0) sum[i] /= count[i];
  return sum;
}

}  // namespace chainfield
