// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#include "chainfield/mesh.hpp"

#include <array>
#include <set>

#include "chainfield/element.hpp"
#include "chainfield/errors.hpp"

namespace chainfield {

const std::vector<int>& Mesh::node_set(const std::string& name) const {
  const auto it = node_sets.find(name);
  if (it == node_sets.end()) throw ValidationError("unknown node set '" + name + "'");
  return it->second;
}

void Mesh::validate() const {
  if (connectivity.size() % static_cast<std::size_t>(nodes_per_element()) != 0) {
    throw ValidationError("connectivity length is not a multiple of the element size");
  }
  const int nn = static_cast<int>(nodes.size());
  std::array<Vec3, kMaxElementNodes> coords;
  for (std::size_t e = 0; e < num_elements(); ++e) {
    const auto conn = element(e);
    std::set<int> distinct;
    for (std::size_t a = 0; a < conn.size(); ++a) {
      if (conn[a] < 0 || conn[a] >= nn) {
        throw ValidationError("element " + std::to_string(e) + ": node index " + std::to_string(conn[a]) +
                              " out of range");
      }
      distinct.insert(conn[a]);
      coords[a] = nodes[static_cast<std::size_t>(conn[a])];
    }
    if (distinct.size() != conn.size()) {
      throw ValidationError("element " + std::to_string(e) + ": repeated node (degenerate element)");
    }
    const std::span<const Vec3> xs(coords.data(), conn.size());
    auto check = [&](const Vec3& xi, const char* where) {
      if (!(map_shape(kind, xs, xi).detJ > 0.0)) {
        throw ValidationError("element " + std::to_string(e) + ": non-positive Jacobian at " + where +
                              " (inverted or degenerate element)");
      }
    };
    for (const auto& qp : gauss_rule(kind)) check(qp.xi, "a quadrature point");
    for (const auto& xi : reference_nodes(kind)) check(xi, "a corner");
  }
  for (const auto& [name, ids] : node_sets) {
    for (int id : ids) {
      if (id < 0 || id >= nn) throw ValidationError("node set '" + name + "': index out of range");
    }
  }
}

}  // namespace chainfield
