// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/point_driver.hpp"

#include <cmath>

#include "chainfield/errors.hpp"

namespace chainfield {

namespace {

struct PointState {
  MaxwellState maxwell;
  MaterialResponse response;
};

PointState update(const Mat3& F, const MaxwellState& old, double dt, const MaterialParams& params,
                  const EvolveOptions& opts) {
  const DeformationState kin = decompose(F);
  const Mat3 C_bar = std::pow(kin.J, -2.0 / 3.0) * (F.transpose() * F);
  PointState s{evolve(old, C_bar, dt, params, opts), {}};
  s.response = material_response(F, s.maxwell, params, false);
  return s;
}

Mat3 uniaxial(double lambda, double lateral) { return Eigen::Vector3d(lambda, lateral, lateral).asDiagonal(); }

// Lateral stretch with zero lateral Kirchhoff stress; Newton with a finite
// difference slope of the full update (including the evolution law).
PointState solve_uniaxial(double lambda, double& lateral, const MaxwellState& old, double dt,
                          const MaterialParams& params, const PointDriverOptions& opts) {
  PointState s = update(uniaxial(lambda, lateral), old, dt, params, opts.evolve);
  for (int it = 0; it < opts.max_lateral_iterations; ++it) {
    const double f = s.response.T(1, 1);
    if (std::abs(f) < opts.lateral_tolerance) return s;
    const double h = 1e-7 * lateral;
    const double fp = update(uniaxial(lambda, lateral + h), old, dt, params, opts.evolve).response.T(1, 1);
    const double fm = update(uniaxial(lambda, lateral - h), old, dt, params, opts.evolve).response.T(1, 1);
    const double slope = (fp - fm) / (2.0 * h);
    double step = -f / slope;
    // Keep the trial deformation admissible.
    while (lateral + step <= 0.2 * lateral) step *= 0.5;
    lateral += step;
    s = update(uniaxial(lambda, lateral), old, dt, params, opts.evolve);
  }
  if (std::abs(s.response.T(1, 1)) < opts.lateral_tolerance) return s;
  throw ConvergenceError("uniaxial driver: lateral stress did not vanish at stretch " + std::to_string(lambda));
}

}  // namespace

std::vector<DriverSample> point_driver(std::span<const HistoryPoint> history, LoadMode mode,
                                       const MaterialParams& params, const PointDriverOptions& options) {
  params.validate();
  if (history.empty()) throw ValidationError("point driver: empty history");
  if (std::abs(history.front().stretch - 1.0) > 1e-12) {
    throw ValidationError("point driver: history must start at stretch 1");
  }
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (!(history[i].t > history[i - 1].t)) throw ValidationError("point driver: time must be strictly increasing");
    if (!(history[i].stretch > 0.0)) throw ValidationError("point driver: stretch must be positive");
  }

  std::vector<DriverSample> out;
  out.reserve(history.size());
  out.push_back({history.front().t, 1.0, 0.0, 1.0});

  MaxwellState state = MaxwellState::virgin(params.branches.size());
  double lateral = 1.0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const double lambda = history[i].stretch;
    double dt = history[i].t - history[i - 1].t;
    if (mode == LoadMode::relaxation && i == 1) dt = 0.0;

    if (mode == LoadMode::simple_shear) {
      Mat3 F = Mat3::Identity();
      F(0, 1) = lambda - 1.0 / lambda;
      const PointState s = update(F, state, dt, params, options.evolve);
      state = s.maxwell;
      out.push_back({history[i].t, lambda, s.response.T(0, 1), 1.0});
    } else {
      lateral *= std::sqrt(history[i - 1].stretch / lambda);
      const PointState s = solve_uniaxial(lambda, lateral, state, dt, params, options);
      state = s.maxwell;
      out.push_back({history[i].t, lambda, s.response.T(0, 0) / lambda, lateral});
    }
  }
  return out;
}

std::vector<HistoryPoint> ramp_history(double final_stretch, double rate, double stretch_step) {
  if (!(rate > 0.0) || !(stretch_step > 0.0)) throw ValidationError("ramp: rate and step must be positive");
  std::vector<HistoryPoint> h{{0.0, 1.0}};
  const int n = static_cast<int>(std::ceil(std::abs(final_stretch - 1.0) / stretch_step));
  for (int i = 1; i <= n; ++i) {
    const double lambda = 1.0 + (final_stretch - 1.0) * static_cast<double>(i) / n;
    h.push_back({std::abs(lambda - 1.0) / rate, lambda});
  }
  return h;
}

}  // namespace chainfield
