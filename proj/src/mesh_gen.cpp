// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/mesh_gen.hpp"

#include <algorithm>
#include <cmath>

#include "chainfield/errors.hpp"

namespace chainfield {

Mesh box_mesh(double Lx, double Ly, double Lz, int nx, int ny, int nz) {
  if (nx < 1 || ny < 1 || nz < 0) throw ValidationError("box_mesh: element counts must be positive");
  if (!(Lx > 0 && Ly > 0) || (nz > 0 && !(Lz > 0))) throw ValidationError("box_mesh: lengths must be positive");
  Mesh m;
  const bool hex = nz > 0;
  m.kind = hex ? ElementKind::hex8 : ElementKind::quad4;
  const int kz = hex ? nz + 1 : 1;
  auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  for (int k = 0; k < kz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.nodes.emplace_back(Lx * i / nx, Ly * j / ny, hex ? Lz * k / nz : 0.0);
  for (int k = 0; k < std::max(nz, 1); ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int q[4] = {id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k)};
        m.connectivity.insert(m.connectivity.end(), q, q + 4);
        if (hex) {
          const int t[4] = {id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1), id(i, j + 1, k + 1)};
          m.connectivity.insert(m.connectivity.end(), t, t + 4);
        }
      }
  const double eps = 1e-12;
  for (int n = 0; n < static_cast<int>(m.nodes.size()); ++n) {
    const Vec3& x = m.nodes[n];
    m.node_sets["all"].push_back(n);
    if (x.x() < eps * Lx) m.node_sets["xmin"].push_back(n);
    if (x.x() > Lx * (1 - eps)) m.node_sets["xmax"].push_back(n);
    if (x.y() < eps * Ly) m.node_sets["ymin"].push_back(n);
    if (x.y() > Ly * (1 - eps)) m.node_sets["ymax"].push_back(n);
    if (hex && x.z() < eps * Lz) m.node_sets["zmin"].push_back(n);
    if (hex && x.z() > Lz * (1 - eps)) m.node_sets["zmax"].push_back(n);
  }
  m.validate();
  return m;
}

Mesh strip_mesh(double length, int n) { return box_mesh(length, length / n, 0.0, n, 1, 0); }

namespace {

// Column positions on [0, half]: uniform h0 up to `x_fine`, then sizes
// growing linearly towards h1 at the end.
std::vector<double> graded_positions(double half, double x_fine, double h0, double h1) {
  std::vector<double> xs{0.0};
  const int fine = std::max(1, static_cast<int>(std::lround(std::min(x_fine, half) / h0)));
  const double hf = std::min(x_fine, half) / fine;
  for (int i = 1; i <= fine; ++i) xs.push_back(hf * i);
  const double rest = half - xs.back();
  if (rest > 1e-12) {
    // n elements with sizes h0 + (h1−h0)·k/n, k = 1..n, rescaled to fit `rest`.
    int n = std::max(1, static_cast<int>(std::lround(rest / (0.5 * (h0 + h1)))));
    std::vector<double> sz(n);
    double total = 0.0;
    for (int k = 0; k < n; ++k) total += sz[k] = h0 + (h1 - h0) * (k + 1) / n;
    double x = xs.back();
    for (int k = 0; k < n; ++k) xs.push_back(x += sz[k] * rest / total);
    xs.back() = half;
  }
  return xs;
}

}  // namespace

Mesh angle_specimen_mesh(const AngleSpecimenOptions& o) {
  if (!(o.free_length > 0 && o.width > 0 && o.notch_depth > 0 && o.notch_depth < o.width && o.h_notch > 0 &&
        o.h_far >= o.h_notch && o.rows >= 1))
    throw ValidationError("angle_specimen_mesh: invalid options");
  const double half = 0.5 * o.free_length;
  if (o.notch_depth >= half) throw ValidationError("angle_specimen_mesh: notch wider than the free length");

  const std::vector<double> right = graded_positions(half, o.refined_half_width, o.h_notch, o.h_far);
  std::vector<double> cols;
  for (auto it = right.rbegin(); it != right.rend(); ++it)
    if (*it > 0.0) cols.push_back(-*it);
  cols.insert(cols.end(), right.begin(), right.end());

  Mesh m;
  m.kind = ElementKind::quad4;
  const int nc = static_cast<int>(cols.size());
  const int nr = o.rows;
  auto id = [&](int i, int j) { return i * (nr + 1) + j; };
  for (int i = 0; i < nc; ++i) {
    const double x = cols[i];
    const double yb = std::max(0.0, o.notch_depth - std::abs(x));
    for (int j = 0; j <= nr; ++j) m.nodes.emplace_back(x, yb + (o.width - yb) * j / nr, 0.0);
  }
  for (int i = 0; i + 1 < nc; ++i)
    for (int j = 0; j < nr; ++j) {
      const int q[4] = {id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)};
      m.connectivity.insert(m.connectivity.end(), q, q + 4);
    }
  const Vec3 vertex(0.0, o.notch_depth, 0.0);
  const double tol = 1e-9;
  for (int n = 0; n < static_cast<int>(m.nodes.size()); ++n) {
    const Vec3& x = m.nodes[n];
    m.node_sets["all"].push_back(n);
    if (x.x() < -half + tol) m.node_sets["clamp_left"].push_back(n);
    if (x.x() > half - tol) m.node_sets["clamp_right"].push_back(n);
    const double r = (x - vertex).norm();
    if (std::abs(x.x()) < tol) {
      m.node_sets["ligament"].push_back(n);
      if (r <= o.nick_length + tol) m.node_sets["notch"].push_back(n);
    }
    if (r <= o.zone_radius + tol) m.node_sets["notch_zone"].push_back(n);
  }
  m.validate();
  return m;
}

}  // namespace chainfield
