// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "chainfield/tensor.hpp"

namespace chainfield {

/// hex8: trilinear brick, 3D. quad4: bilinear quadrilateral, plane strain.
/// Local node order is counter-clockwise on the ζ = −1 face, then ζ = +1.
enum class ElementKind { hex8, quad4 };

constexpr int nodes_per_element(ElementKind k) { return k == ElementKind::hex8 ? 8 : 4; }
constexpr int spatial_dim(ElementKind k) { return k == ElementKind::hex8 ? 3 : 2; }

const char* to_string(ElementKind k);

struct Mesh {
  std::vector<Vec3> nodes;  ///< [mm]; z ignored for quad4
  ElementKind kind = ElementKind::hex8;
  std::vector<int> connectivity;  ///< flat, nodes_per_element() entries per element
  std::map<std::string, std::vector<int>> node_sets;

  int dim() const { return spatial_dim(kind); }
  int nodes_per_element() const { return chainfield::nodes_per_element(kind); }
  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_elements() const { return connectivity.size() / static_cast<std::size_t>(nodes_per_element()); }

  std::span<const int> element(std::size_t e) const {
    const auto n = static_cast<std::size_t>(nodes_per_element());
    return {connectivity.data() + e * n, n};
  }

  /// Throws ValidationError if the set does not exist.
  const std::vector<int>& node_set(const std::string& name) const;

  /// Index ranges, element Jacobians > 0 at every quadrature point and at the
  /// element corners. Throws ValidationError naming the offending element.
  void validate() const;
};

}  // namespace chainfield
