// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Central differences refined by Richardson extrapolation (Ridders). Used as
// the oracle for analytic derivatives, never inside the solver.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace chainfield {

struct FdEstimate {
  double value{};
  double error{};  // extrapolation error estimate
};

// h is the initial (largest) step. It should be a fraction of the length over
// which f changes character; the tableau shrinks it by 1.4 per column.
template <class F>
FdEstimate ridders_derivative(F&& f, double x, double h) {
  constexpr int n = 12;
  constexpr double con = 1.4, con2 = con * con, safe = 2.0;
  std::array<std::array<double, n>, n> a{};
  FdEstimate best{0.0, std::numeric_limits<double>::max()};
  a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
  for (int i = 1; i < n; ++i) {
    h /= con;
    a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
    double fac = con2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= con2;
      const double err = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (err <= best.error) best = {a[j][i], err};
    }
    // higher order got worse: round-off has taken over
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= safe * best.error) break;
  }
  return best;
}

}  // namespace chainfield
