// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

// Structured meshes used by the benchmarks and tests.

#pragma once

#include "chainfield/mesh.hpp"

namespace chainfield {

/// Regular grid on [0,Lx]×[0,Ly](×[0,Lz]); nz = 0 gives quad4. Node sets:
/// xmin, xmax, ymin, ymax (zmin, zmax) and all.
Mesh box_mesh(double Lx, double Ly, double Lz, int nx, int ny, int nz);

/// One-element-wide quad4 strip of length `length` with `n` elements along x.
Mesh strip_mesh(double length, int n);

struct AngleSpecimenOptions {
  double free_length = 56.0;   ///< between the clamps [mm]
  double width = 19.0;         ///< [mm]
  double notch_depth = 9.31;   ///< vertex height of the 90° notch above the loaded edge [mm]
  double h_notch = 0.85;       ///< column spacing around the notch [mm]; slanted notch edges are √2 longer
  double h_far = 3.0;          ///< element size at the clamps [mm]
  double refined_half_width = 12.0;  ///< |x| below which h = h_notch
  int rows = 10;               ///< elements across the ligament
  double nick_length = 1.0;    ///< φ = 0 seed above the vertex [mm]
  double zone_radius = 3.0;    ///< radius of the initiation zone around the vertex [mm]
};

/// Plane-strain quad4 mesh of the angle tear specimen between its clamps.
/// The lower edge carries a 90° V notch with its vertex at (0, notch_depth);
/// columns are graded from h_notch to h_far. Node sets: clamp_left,
/// clamp_right, notch (the nick), notch_zone, ligament (x = 0), all.
Mesh angle_specimen_mesh(const AngleSpecimenOptions& options = {});

}  // namespace chainfield
