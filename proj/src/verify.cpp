// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/verify.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "chainfield/constitutive.hpp"
#include "chainfield/fem.hpp"
#include "chainfield/finite_difference.hpp"
#include "chainfield/mesh_gen.hpp"

namespace chainfield {

namespace {

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Relative error with a floor for values that underflow in the far tails.
double rel(double a, double ref, double floor = 1e-300) {
  return std::abs(a - ref) / std::max(std::abs(ref), floor);
}

void keep_worst(CheckResult& r, double err, const std::string& where) {
  ++r.samples;
  if (err > r.error || std::isnan(err)) {
    r.error = std::isnan(err) ? INFINITY : err;
    r.detail = where;
  }
}

}  // namespace

double cdf_by_quadrature(double lambda, const WesslauParams& p) {
  using boost::math::quadrature::gauss_kronrod;
  if (lambda <= 1.0) return 0.0;
  auto g = [&](double x) { return x <= 1.0 ? 0.0 : pdf_g(x, p); };
  // mode of g: d/dx[−2 ln x − a1 ln²(a2 x)] = 0 → ln(a2 x) = −1/a1
  const double mode = 1.0 + std::exp(-1.0 / p.a1) / p.a2;
  // pieces of a few standard deviations, so no panel straddles a sharp peak
  std::vector<double> cuts{1.0};
  for (double k : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) {
    const double c = 1.0 + (mode - 1.0) * std::exp(k * p.beta);
    if (c > cuts.back() && c < lambda) cuts.push_back(c);
  }
  cuts.push_back(lambda);
  double sum = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i)
    sum += gauss_kronrod<double, 31>::integrate(g, cuts[i - 1], cuts[i], 8, 1e-13);
  return sum;
}

CheckResult check_cdf_quadrature(double tolerance) {
  CheckResult r{"cdf vs quadrature", 0.0, tolerance, 0, ""};
  for (double Q : {1.001, 1.01, 1.1, 1.5})
    for (double lm : {1.1, 1.2, 1.5, 2.0}) {
      const auto p = WesslauParams::derive(Q, lm);
      for (double l : {1.05, 1.1, 1.5, 2.0, 5.0}) {
        const double a = cdf(l, p), q = cdf_by_quadrature(l, p);
        // both below the smallest normal double: nothing left to compare
        const double e = (std::abs(q) < 1e-290 && std::abs(a) < 1e-290) ? 0.0 : rel(a, q);
        keep_worst(r, e, fmt("Q=%g lambda_M=%g lambda=%g", Q, lm, l));
      }
    }
  return r;
}

CheckResult check_energy_derivatives(std::uint64_t seed, int points, double tolerance) {
  CheckResult r{"energy derivatives vs finite differences", 0.0, tolerance, 0, ""};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  // Derivatives smaller than this fraction of the function's scale are pure
  // tail noise and are compared absolutely against it.
  constexpr double floor_frac = 1e-10;

  for (int k = 0; k < points; ++k) {
    const double Q = 1.001 * std::pow(1.5 / 1.001, u01(rng));
    const double lm = 1.1 + 0.9 * u01(rng);
    const auto p = WesslauParams::derive(Q, lm);
    // stretch in the bulk of the distribution, clipped to [1.01, 3]
    const double z = -2.5 + 5.0 * u01(rng);
    const double lc = std::clamp(1.0 + p.lambda_0 * std::exp(p.beta * z), 1.01, 3.0);
    const double h = 0.05 * std::min(p.beta * (lc - 1.0), lc - 1.0);
    const std::string where = fmt("Q=%.6g lambda_M=%.6g lambda_c=%.6g", Q, lm, lc);

    // survival: S′ against FD of S, S″ against FD of S′
    const double gmax = pdf_g(1.0 + std::exp(-1.0 / p.a1) / p.a2, p);
    {
      const auto d1 = ridders_derivative([&](double x) { return survival(x, p); }, lc, h);
      const auto d2 = ridders_derivative([&](double x) { return survival_d1(x, p); }, lc, h);
      keep_worst(r, rel(survival_d1(lc, p), d1.value, floor_frac * gmax), "S' at " + where);
      keep_worst(r, rel(survival_d2(lc, p), d2.value, floor_frac * gmax / (lc - 1.0)), "S'' at " + where);
    }
    // W_iso(Ī₁) around Ī₁ = 3λ_c²
    {
      const double c = 1.0 + 10.0 * u01(rng);
      const ChainSurvival s(p);
      const double I = 3.0 * lc * lc, hI = 6.0 * lc * h;
      const Jet w = energy_iso(I, c, s);
      const auto d1 = ridders_derivative([&](double x) { return energy_iso(x, c, s).value; }, I, hI);
      const auto d2 = ridders_derivative([&](double x) { return energy_iso(x, c, s).d1; }, I, hI);
      keep_worst(r, rel(w.d1, d1.value, floor_frac * c), "W_iso' at " + where);
      keep_worst(r, rel(w.d2, d2.value, floor_frac * c), "W_iso'' at " + where);
    }
    // W_vol(J) around J = λ_c³; a third of the points under compression
    {
      const double D = 0.001 + 0.05 * u01(rng);
      const ChainSurvival s(p);
      const bool compress = k % 3 == 0;
      const double J = compress ? 0.8 + 0.19 * u01(rng) : lc * lc * lc;
      const double hJ = compress ? 0.005 : 3.0 * lc * lc * h;
      const Jet w = energy_vol(J, D, s);
      const auto d1 = ridders_derivative([&](double x) { return energy_vol(x, D, s).value; }, J, hJ);
      const auto d2 = ridders_derivative([&](double x) { return energy_vol(x, D, s).d1; }, J, hJ);
      const std::string wj = where + fmt(" J=%.6g", J);
      keep_worst(r, rel(w.d1, d1.value, floor_frac / D), "W_vol' at " + wj);
      keep_worst(r, rel(w.d2, d2.value, floor_frac / D), "W_vol'' at " + wj);
    }
  }
  return r;
}

CheckResult check_stress_energy(std::uint64_t seed, int points, double tolerance) {
  CheckResult r{"stress vs energy finite differences", 0.0, tolerance, 0, ""};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const MaterialParams params = MaterialParams::reference_adhesive();

  for (int k = 0; k < points; ++k) {
    Mat3 F;
    do {
      F = Mat3::Identity();
      for (int i = 0; i < 9; ++i) F(i / 3, i % 3) += 0.3 * u(rng);
      F *= std::cbrt((1.0 + 0.1 * u(rng)) / F.determinant());
    } while (!(F.determinant() > 0.9 && F.determinant() < 1.1));

    // frozen branch states: evolve a bit towards F so they are not identity
    MaxwellState ms = MaxwellState::virgin(params.branches.size());
    const Mat3 Cb = std::pow(F.determinant(), -2.0 / 3.0) * F.transpose() * F;
    ms = evolve(ms, Cb, 2.0, params);

    const MaterialResponse resp = material_response(F, ms, params, false);
    Mat3 H;
    for (int i = 0; i < 9; ++i) H(i / 3, i % 3) = u(rng);
    H /= H.norm();
    const auto d = ridders_derivative([&](double e) { return free_energy(F + e * H, ms, params); }, 0.0, 0.02);
    const double a = (resp.P.array() * H.array()).sum();
    keep_worst(r, rel(a, d.value, 1e-8), fmt("sample %g det F=%.6g", k, F.determinant()));
  }
  return r;
}

namespace {

struct JacobianProblem {
  Model model;
  SystemState state;
};

JacobianProblem two_element_problem(std::uint64_t seed) {
  JacobianProblem p;
  p.model.mesh = box_mesh(2.0, 1.0, 1.0, 2, 1, 1);
  p.model.material = MaterialParams::reference_adhesive();
  p.model.material.branches.clear();
  p.state = SystemState::initial(p.model);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto& v : p.state.u) v = u(rng);
  for (auto& v : p.state.phi) v = 0.7 + u(rng);
  return p;
}

Eigen::MatrixXd fd_jacobian(const JacobianProblem& p) {
  const DofMap dofs(p.model.mesh);
  const Vector x0 = dofs.pack(p.state);
  const int n = dofs.size();
  Eigen::MatrixXd K(n, n);
  for (int j = 0; j < n; ++j) {
    auto col = [&](double e) {
      Vector x = x0;
      x[j] += e;
      SystemState s = p.state;
      dofs.unpack(x, s);
      return assemble(p.model, s, p.state.qp, {0.0, false}).residual;
    };
    // Richardson on the vector: (4 D(h/2) − D(h)) / 3
    const double h = 1e-4;
    const Vector d1 = (col(h) - col(-h)) / (2 * h);
    const Vector d2 = (col(h / 2) - col(-h / 2)) / h;
    K.col(j) = (4.0 * d2 - d1) / 3.0;
  }
  return K;
}

}  // namespace

CheckResult check_fem_jacobian(std::uint64_t seed, double tolerance) {
  CheckResult r{"FE tangent vs finite-difference Jacobian", 0.0, tolerance, 1, ""};
  const auto p = two_element_problem(seed);
  const Eigen::MatrixXd K = Eigen::MatrixXd(assemble(p.model, p.state, p.state.qp, {0.0, true}).stiffness);
  const Eigen::MatrixXd KF = fd_jacobian(p);
  r.error = (K - KF).norm() / KF.norm();
  r.detail = fmt("2 hex8, %g dofs, symmetry defect %.3e", static_cast<double>(K.rows()),
                 (K - K.transpose()).norm() / K.norm());
  return r;
}

std::pair<double, double> phase_block_errors(std::uint64_t seed) {
  const auto p = two_element_problem(seed);
  const DofMap dofs(p.model.mesh);
  const Eigen::MatrixXd K = Eigen::MatrixXd(assemble(p.model, p.state, p.state.qp, {0.0, true}).stiffness);
  SystemState unloaded = p.state;
  unloaded.u.setZero();
  const Eigen::MatrixXd K0 = Eigen::MatrixXd(assemble(p.model, unloaded, p.state.qp, {0.0, true}).stiffness);
  const Eigen::MatrixXd KF = fd_jacobian(p);

  std::vector<int> phi;
  for (int n = 0; n < static_cast<int>(p.model.mesh.num_nodes()); ++n) phi.push_back(dofs.phi(n));
  auto block = [&](const Eigen::MatrixXd& M) { return M(phi, phi).eval(); };
  const Eigen::MatrixXd ref = block(KF);
  // the resistance part does not depend on u, so K0 holds it alone
  const Eigen::MatrixXd halved = 0.5 * (block(K) + block(K0));
  return {(block(K) - ref).norm() / ref.norm(), (halved - ref).norm() / ref.norm()};
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
  return {check_cdf_quadrature(), check_energy_derivatives(seed), check_stress_energy(seed), check_fem_jacobian(seed)};
}

}  // namespace chainfield
