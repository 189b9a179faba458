// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/element.hpp"

#include <cmath>

namespace chainfield {

namespace {

const std::array<Vec3, 8> kHexNodes{Vec3(-1, -1, -1), Vec3(1, -1, -1), Vec3(1, 1, -1), Vec3(-1, 1, -1),
                                    Vec3(-1, -1, 1),  Vec3(1, -1, 1),  Vec3(1, 1, 1),  Vec3(-1, 1, 1)};
const std::array<Vec3, 4> kQuadNodes{Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(1, 1, 0), Vec3(-1, 1, 0)};

template <std::size_t N>
std::array<QuadraturePoint, N> make_rule(int dim) {
  const double g = 1.0 / std::sqrt(3.0);
  std::array<QuadraturePoint, N> rule{};
  std::size_t q = 0;
  const int nz = dim == 3 ? 2 : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        rule[q].xi = Vec3(i == 0 ? -g : g, j == 0 ? -g : g, dim == 3 ? (k == 0 ? -g : g) : 0.0);
        rule[q].weight = 1.0;
        ++q;
      }
  return rule;
}

const std::array<QuadraturePoint, 8> kHexRule = make_rule<8>(3);
const std::array<QuadraturePoint, 4> kQuadRule = make_rule<4>(2);

}  // namespace

const char* to_string(ElementKind k) { return k == ElementKind::hex8 ? "hex8" : "quad4"; }

std::span<const QuadraturePoint> gauss_rule(ElementKind kind) {
  if (kind == ElementKind::hex8) return kHexRule;
  return kQuadRule;
}

std::span<const Vec3> reference_nodes(ElementKind kind) {
  if (kind == ElementKind::hex8) return kHexNodes;
  return kQuadNodes;
}

ShapeFunctions shape_functions(ElementKind kind, const Vec3& xi) {
  ShapeFunctions s;
  if (kind == ElementKind::hex8) {
    s.count = 8;
    for (int a = 0; a < 8; ++a) {
      const Vec3& n = kHexNodes[a];
      const double fx = 1.0 + n.x() * xi.x();
      const double fy = 1.0 + n.y() * xi.y();
      const double fz = 1.0 + n.z() * xi.z();
      s.N[a] = 0.125 * fx * fy * fz;
      s.dN_dxi(a, 0) = 0.125 * n.x() * fy * fz;
      s.dN_dxi(a, 1) = 0.125 * fx * n.y() * fz;
      s.dN_dxi(a, 2) = 0.125 * fx * fy * n.z();
    }
  } else {
    s.count = 4;
    for (int a = 0; a < 4; ++a) {
      const Vec3& n = kQuadNodes[a];
      const double fx = 1.0 + n.x() * xi.x();
      const double fy = 1.0 + n.y() * xi.y();
      s.N[a] = 0.25 * fx * fy;
      s.dN_dxi(a, 0) = 0.25 * n.x() * fy;
      s.dN_dxi(a, 1) = 0.25 * fx * n.y();
    }
  }
  return s;
}

MappedShape map_shape(ElementKind kind, std::span<const Vec3> coords, const Vec3& xi) {
  MappedShape m;
  m.local = shape_functions(kind, xi);
  const int n = m.local.count;
  if (kind == ElementKind::hex8) {
    Mat3 jac = Mat3::Zero();  // ∂X_i/∂ξ_j
    for (int a = 0; a < n; ++a) jac += coords[a] * m.local.dN_dxi.row(a);
    m.detJ = jac.determinant();
    const Mat3 inv = jac.inverse();
    for (int a = 0; a < n; ++a) m.dN_dX.row(a) = m.local.dN_dxi.row(a) * inv;
  } else {
    Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
    for (int a = 0; a < n; ++a) jac += coords[a].head<2>() * m.local.dN_dxi.row(a).head<2>();
    m.detJ = jac.determinant();
    const Eigen::Matrix2d inv = jac.inverse();
    for (int a = 0; a < n; ++a) m.dN_dX.row(a).head<2>() = m.local.dN_dxi.row(a).head<2>() * inv;
  }
  return m;
}

}  // namespace chainfield
