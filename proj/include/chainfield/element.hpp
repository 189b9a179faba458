// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Isoparametric shape functions and full Gauss rules for hex8 and quad4.

#pragma once

#include <array>
#include <span>

#include "chainfield/mesh.hpp"

namespace chainfield {

inline constexpr int kMaxElementNodes = 8;

struct QuadraturePoint {
  Vec3 xi = Vec3::Zero();
  double weight{};
};

/// 2×2×2 Gauss for hex8, 2×2 for quad4.
std::span<const QuadraturePoint> gauss_rule(ElementKind kind);

/// Values and local derivatives at a point of the reference element [−1, 1]^d.
struct ShapeFunctions {
  int count{};
  std::array<double, kMaxElementNodes> N{};
  Eigen::Matrix<double, kMaxElementNodes, 3> dN_dxi = Eigen::Matrix<double, kMaxElementNodes, 3>::Zero();
};

ShapeFunctions shape_functions(ElementKind kind, const Vec3& xi);

/// Shape functions with gradients mapped to the reference configuration.
struct MappedShape {
  ShapeFunctions local;
  Eigen::Matrix<double, kMaxElementNodes, 3> dN_dX = Eigen::Matrix<double, kMaxElementNodes, 3>::Zero();
  double detJ{};
};

/// `coords` holds the element's nodal coordinates in local order. Columns of
/// dN_dX beyond the spatial dimension are zero. detJ may be <= 0; callers decide.
MappedShape map_shape(ElementKind kind, std::span<const Vec3> coords, const Vec3& xi);

/// Corner coordinates of the reference element in local node order.
std::span<const Vec3> reference_nodes(ElementKind kind);

}  // namespace chainfield
