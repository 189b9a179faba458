// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/constitutive.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "chainfield/errors.hpp"

namespace chainfield {

void MaterialParams::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("material: " + msg); };
  if (!(c10 > 0.0)) fail("c10 must be > 0");
  if (!(D > 0.0)) fail("D must be > 0");
  for (std::size_t j = 0; j < branches.size(); ++j) {
    if (!(branches[j].modulus > 0.0)) fail("branch " + std::to_string(j + 1) + " modulus must be > 0");
    if (!(branches[j].tau > 0.0)) fail("branch " + std::to_string(j + 1) + " relaxation time must be > 0");
    if (j > 0 && branches[j].tau < branches[j - 1].tau) fail("branches must be sorted by relaxation time");
  }
}

void MaterialParams::canonicalize() {
  std::stable_sort(branches.begin(), branches.end(),
                   [](const MaxwellBranch& a, const MaxwellBranch& b) { return a.tau < b.tau; });
}

double MaterialParams::penalty_for_poisson(double c10, double nu) {
  const double mu = 2.0 * c10;
  const double bulk = 2.0 * mu * (1.0 + nu) / (3.0 * (1.0 - 2.0 * nu));
  return 2.0 / bulk;
}

MaterialParams MaterialParams::reference_adhesive() {
  MaterialParams p;
  p.c10 = 9.183;
  p.branches = {{5.223, 0.5}, {4.152, 10.0},  {3.140, 100.0}, {2.328, 500.0},
                {1.582, 1000.0}, {1.131, 2500.0}, {0.961, 5000.0}};
  p.D = penalty_for_poisson(p.c10, 0.45);
  const auto w = WesslauParams::derive(1.001, 1.194);
  p.survival_iso = ChainSurvival(w);
  p.survival_vol = ChainSurvival(w);
  return p;
}

DeformationState decompose(const Mat3& F) {
  DeformationState s;
  s.F = F;
  s.J = F.determinant();
  if (!(s.J > 0.0)) {
    std::ostringstream os;
    os << "det F = " << s.J << " <= 0";
    throw SingularDeformationError(os.str());
  }
  s.B_bar = std::pow(s.J, -2.0 / 3.0) * (F * F.transpose());
  s.I1_bar = s.B_bar.trace();
  return s;
}

Jet energy_iso(double I1_bar, double modulus, const ChainSurvival& survival) {
  const double r = I1_bar / 3.0;
  const double lc = std::sqrt(r);
  const double dlc = 1.0 / (6.0 * std::sqrt(r));
  const double ddlc = -1.0 / (36.0 * r * std::sqrt(r));
  const Jet s = survival.at(lc);
  const double s1 = s.d1 * dlc;
  const double s2 = s.d2 * dlc * dlc + s.d1 * ddlc;
  const double psi = modulus * (I1_bar - 3.0);
  const double dpsi = modulus;
  return {psi * s.value, dpsi * s.value + psi * s1, 2.0 * dpsi * s1 + psi * s2};
}

Jet energy_iso(double I1_bar, double modulus, const WesslauParams& p) {
  return energy_iso(I1_bar, modulus, ChainSurvival(p));
}

Jet energy_vol(double J, double D, const ChainSurvival& survival) {
  const double lc = std::cbrt(J);
  const double dlc = 1.0 / (3.0 * lc * lc);
  const double ddlc = -2.0 / (9.0 * J * lc * lc);
  const Jet s = survival.at(lc);
  const double s1 = s.d1 * dlc;
  const double s2 = s.d2 * dlc * dlc + s.d1 * ddlc;
  const double psi = (J - 1.0) * (J - 1.0) / D;
  const double dpsi = 2.0 * (J - 1.0) / D;
  const double ddpsi = 2.0 / D;
  return {psi * s.value, dpsi * s.value + psi * s1, ddpsi * s.value + 2.0 * dpsi * s1 + psi * s2};
}

Jet energy_vol(double J, double D, const WesslauParams& p) { return energy_vol(J, D, ChainSurvival(p)); }

namespace {

constexpr std::array<std::array<int, 2>, 6> kVoigt{{{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}, {0, 2}}};

Mat3 voigt_basis(int k) {
  Mat3 e = Mat3::Zero();
  const auto [i, j] = kVoigt[k];
  e(i, j) = 1.0;
  e(j, i) = 1.0;
  return e;
}

Eigen::Matrix<double, 6, 1> to_voigt(const Mat3& m) {
  Eigen::Matrix<double, 6, 1> v;
  for (int k = 0; k < 6; ++k) v(k) = m(kVoigt[k][0], kVoigt[k][1]);
  return v;
}

}  // namespace

using Mat6 = Eigen::Matrix<double, 6, 6>;

namespace {

// Backward-Euler update of one branch. With `sensitivity`, also returns
// dC̄ᵢ/dC̄ (Voigt coordinates) of the projected update by implicit
// differentiation of the local residual at its root.
Mat3 evolve_branch_impl(const Mat3& Ci_old, const Mat3& C_bar_new, double dt, const MaxwellBranch& branch,
                        const ChainSurvival& survival, const EvolveOptions& options, Mat6* sensitivity) {
  if (dt <= 0.0) {
    if (sensitivity) sensitivity->setZero();
    return Ci_old;
  }
  const double k = 4.0 * dt / branch.viscosity();
  auto residual = [&](const Mat3& Ci, double& I1e, Jet& w, Mat3& X) {
    I1e = (C_bar_new * Ci.inverse()).trace();
    w = energy_iso(I1e, branch.modulus, survival);
    X = C_bar_new - (I1e / 3.0) * Ci;
    const Mat3 R = Ci - Ci_old - k * w.d1 * X;
    return Mat3(0.5 * (R + R.transpose()));
  };
  double I1e{};
  Jet w;
  Mat3 X;
  // Start from whichever end state is closer: the old state (slow branch) or
  // the fully relaxed one (fast branch, Ci = C̄).
  Mat3 Ci = Ci_old;
  Mat3 R = residual(Ci, I1e, w, X);
  {
    double I1r{};
    Jet wr;
    Mat3 Xr;
    const Mat3 Rr = residual(C_bar_new, I1r, wr, Xr);
    if (Rr.norm() < R.norm()) {
      Ci = C_bar_new;
      R = Rr;
      I1e = I1r;
      w = wr;
      X = Xr;
    }
  }
  for (int it = 0; it <= options.max_iterations; ++it) {
    if (R.norm() < options.tolerance) {
      Ci = 0.5 * (Ci + Ci.transpose());
      const double s = std::cbrt(Ci.determinant());
      if (sensitivity) {
        const Mat3 M = Ci.inverse();
        const Mat3 MCM = M * C_bar_new * M;
        Mat6 R_Ci, R_C;
        for (int c = 0; c < 6; ++c) {
          const Mat3 E = voigt_basis(c);
          const double dI_ci = -(MCM.cwiseProduct(E)).sum();
          R_Ci.col(c) = to_voigt(E - k * w.d2 * dI_ci * X + k * w.d1 * (dI_ci / 3.0 * Ci + I1e / 3.0 * E));
          const double dI_c = (M.cwiseProduct(E)).sum();
          R_C.col(c) = to_voigt(-k * (w.d2 * dI_c * X + w.d1 * (E - dI_c / 3.0 * Ci)));
        }
        const Mat6 L = -R_Ci.partialPivLu().solve(R_C);
        // projection Ci / det(Ci)^{1/3}
        for (int c = 0; c < 6; ++c) {
          Mat3 d = Mat3::Zero();
          for (int r = 0; r < 6; ++r) d += L(r, c) * voigt_basis(r);
          sensitivity->col(c) = to_voigt((d - ((M.cwiseProduct(d)).sum() / 3.0) * Ci) / s);
        }
      }
      return Ci / s;
    }
    if (it == options.max_iterations) break;
    const Mat3 A = Ci.inverse();
    const Mat3 ACA = A * C_bar_new * A;
    Eigen::Matrix<double, 6, 6> jac;
    for (int c = 0; c < 6; ++c) {
      const Mat3 E = voigt_basis(c);
      const double dI = -(ACA.cwiseProduct(E)).sum();
      const Mat3 dR = E - k * w.d2 * dI * X + k * w.d1 * (dI / 3.0 * Ci + I1e / 3.0 * E);
      jac.col(c) = to_voigt(dR);
    }
    const Eigen::Matrix<double, 6, 1> dv = jac.partialPivLu().solve(-to_voigt(R));
    Mat3 step = Mat3::Zero();
    for (int c = 0; c < 6; ++c) step += dv(c) * voigt_basis(c);
    // Backtrack until the residual drops and Ci stays positive definite.
    double alpha = 1.0;
    const double r0 = R.norm();
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      const Mat3 trial = Ci + alpha * step;
      if (Eigen::LLT<Mat3>(trial).info() != Eigen::Success) continue;
      double I1t{};
      Jet wt;
      Mat3 Xt;
      const Mat3 Rt = residual(trial, I1t, wt, Xt);
      if (std::isfinite(Rt.norm()) && (Rt.norm() < r0 || ls == 29)) {
        Ci = trial;
        R = Rt;
        I1e = I1t;
        w = wt;
        X = Xt;
        break;
      }
    }
  }
  throw ConvergenceError("evolution equation did not converge in " + std::to_string(options.max_iterations) +
                         " iterations (time step too large?)");
}

}  // namespace

Mat3 evolve_branch(const Mat3& Ci_old, const Mat3& C_bar_new, double dt, const MaxwellBranch& branch,
                   const ChainSurvival& survival, const EvolveOptions& options) {
  return evolve_branch_impl(Ci_old, C_bar_new, dt, branch, survival, options, nullptr);
}

MaxwellState evolve(const MaxwellState& old, const Mat3& C_bar_new, double dt, const MaterialParams& params,
                    const EvolveOptions& options) {
  MaxwellState next;
  next.Ci_bar.reserve(params.branches.size());
  for (std::size_t j = 0; j < params.branches.size(); ++j) {
    next.Ci_bar.push_back(evolve_branch(old.Ci_bar[j], C_bar_new, dt, params.branches[j], params.survival_iso, options));
  }
  return next;
}

namespace {

// Ī = J^{-2/3} tr(F M Fᵀ) together with ∂Ī/∂F and ∂²Ī/∂F∂F. M = I gives the
// equilibrium invariant, M = C̄ᵢ⁻¹ the elastic invariant of a Maxwell branch.
struct IsoInvariant {
  double value{};
  Mat3 grad;
  Tensor4 hess;
};

IsoInvariant iso_invariant(const Mat3& F, const Mat3& FinvT, double J, const Mat3& M, bool with_hessian) {
  IsoInvariant inv;
  const double jm23 = std::pow(J, -2.0 / 3.0);
  const Mat3 dI = 2.0 * F * M;  // ∂ tr(F M Fᵀ) / ∂F
  inv.value = jm23 * (F * M * F.transpose()).trace();
  inv.grad = jm23 * dI - (2.0 / 3.0) * inv.value * FinvT;
  if (!with_hessian) return inv;
  const double v = inv.value;
  for (int a = 0; a < 3; ++a)
    for (int B = 0; B < 3; ++B)
      for (int b = 0; b < 3; ++b)
        for (int D = 0; D < 3; ++D) {
          double h = -(2.0 / 3.0) * jm23 * (dI(a, B) * FinvT(b, D) + FinvT(a, B) * dI(b, D)) +
                     (4.0 / 9.0) * v * FinvT(a, B) * FinvT(b, D) + (2.0 / 3.0) * v * FinvT(a, D) * FinvT(b, B);
          if (a == b) h += 2.0 * jm23 * M(B, D);
          inv.hess(pair_index(a, B), pair_index(b, D)) = h;
        }
  return inv;
}

void add_iso_branch(MaterialResponse& r, const IsoInvariant& inv, double modulus, const ChainSurvival& survival,
                    bool with_tangent) {
  const Jet w = energy_iso(inv.value, modulus, survival);
  r.energy += w.value;
  r.P += w.d1 * inv.grad;
  if (with_tangent) r.A += w.d2 * outer(inv.grad, inv.grad) + w.d1 * inv.hess;
}

}  // namespace

MaterialResponse material_response(const Mat3& F, const MaxwellState& state, const MaterialParams& params,
                                   bool with_tangent) {
  const DeformationState kin = decompose(F);
  const Mat3 FinvT = F.inverse().transpose();
  MaterialResponse r;

  add_iso_branch(r, iso_invariant(F, FinvT, kin.J, Mat3::Identity(), with_tangent), params.c10,
                 params.survival_iso, with_tangent);
  for (std::size_t j = 0; j < params.branches.size(); ++j) {
    const Mat3 Ci_inv = state.Ci_bar[j].inverse();
    add_iso_branch(r, iso_invariant(F, FinvT, kin.J, Ci_inv, with_tangent), params.branches[j].modulus,
                   params.survival_iso, with_tangent);
  }

  const Jet wv = energy_vol(kin.J, params.D, params.survival_vol);
  r.energy += wv.value;
  r.P += wv.d1 * kin.J * FinvT;
  if (with_tangent) {
    const double J = kin.J;
    for (int a = 0; a < 3; ++a)
      for (int B = 0; B < 3; ++B)
        for (int b = 0; b < 3; ++b)
          for (int D = 0; D < 3; ++D) {
            const double ff = FinvT(a, B) * FinvT(b, D);
            r.A(pair_index(a, B), pair_index(b, D)) +=
                wv.d2 * J * J * ff + wv.d1 * J * (ff - FinvT(a, D) * FinvT(b, B));
          }
  }
  r.T = r.P * F.transpose();
  return r;
}

StressUpdate update_stress(const Mat3& F, const MaxwellState& old, double dt, const MaterialParams& params,
                           bool with_tangent, const EvolveOptions& options) {
  StressUpdate up;
  const double J = F.determinant();
  if (!(J > 0.0)) {
    std::ostringstream os;
    os << "det F = " << J << " <= 0";
    throw SingularDeformationError(os.str());
  }
  const double jm23 = std::pow(J, -2.0 / 3.0);
  const Mat3 C_bar = jm23 * (F.transpose() * F);
  const std::size_t nb = params.branches.size();
  std::vector<Mat6> sens(nb);
  const bool evolving = dt > 0.0 && nb > 0;
  up.state.Ci_bar.reserve(nb);
  for (std::size_t j = 0; j < nb; ++j)
    up.state.Ci_bar.push_back(evolve_branch_impl(old.Ci_bar[j], C_bar, dt, params.branches[j], params.survival_iso,
                                                 options, with_tangent && evolving ? &sens[j] : nullptr));
  up.response = material_response(F, up.state, params, with_tangent);
  up.dW = up.response.P;
  if (!with_tangent || !evolving) return up;

  const Mat3 FinvT = F.inverse().transpose();
  // Coordinates of dC̄ for each unit perturbation of F.
  Eigen::Matrix<double, 6, 9> dC;
  for (int c = 0; c < 3; ++c)
    for (int D = 0; D < 3; ++D) {
      Mat3 dF = Mat3::Zero();
      dF(c, D) = 1.0;
      dC.col(pair_index(c, D)) =
          to_voigt(jm23 * (dF.transpose() * F + F.transpose() * dF) - (2.0 / 3.0) * FinvT(c, D) * C_bar);
    }
  for (std::size_t j = 0; j < nb; ++j) {
    const MaxwellBranch& br = params.branches[j];
    const Mat3 M = up.state.Ci_bar[j].inverse();
    const double I1e = (C_bar * M).trace();
    const Jet w = energy_iso(I1e, br.modulus, params.survival_iso);
    const Mat3 G = jm23 * 2.0 * F * M - (2.0 / 3.0) * I1e * FinvT;  // ∂Ī/∂F at fixed M
    const Eigen::Matrix<double, 6, 9> dCi = sens[j] * dC;
    for (int col = 0; col < 9; ++col) {
      Mat3 d = Mat3::Zero();
      for (int c = 0; c < 6; ++c) d += dCi(c, col) * voigt_basis(c);
      const Mat3 dM = -M * d * M;
      const double dI = (C_bar.cwiseProduct(dM)).sum();
      const Mat3 dP = w.d2 * dI * G + w.d1 * (jm23 * 2.0 * F * dM - (2.0 / 3.0) * dI * FinvT);
      for (int a = 0; a < 3; ++a)
        for (int B = 0; B < 3; ++B) up.response.A(pair_index(a, B), col) += dP(a, B);
      up.dW(col / 3, col % 3) += w.d1 * dI;
    }
  }
  return up;
}

double free_energy(const Mat3& F, const MaxwellState& state, const MaterialParams& params) {
  return material_response(F, state, params, false).energy;
}

Tensor4 spatial_tangent(const Mat3& F, const Mat3& T, const Tensor4& A) {
  Tensor4 k = Tensor4::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          double s = 0.0;
          for (int B = 0; B < 3; ++B)
            for (int D = 0; D < 3; ++D) s += F(b, B) * F(d, D) * A(pair_index(a, B), pair_index(c, D));
          if (a == c) s -= T(b, d);
          k(pair_index(a, b), pair_index(c, d)) = s;
        }
  return k;
}

StressTangent stress_and_tangent(const DeformationState& state, const MaxwellState& maxwell,
                                 const MaterialParams& params) {
  const MaterialResponse r = material_response(state.F, maxwell, params, true);
  return {r.T, spatial_tangent(state.F, r.T, r.A)};
}

}  // namespace chainfield
