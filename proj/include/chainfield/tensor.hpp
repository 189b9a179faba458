// SPDX-FileCopyrightText: 2026 The chainfield developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

namespace chainfield {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Fourth-order tensor stored as a 9×9 matrix, entry (3i+j, 3k+l) ↔ T_ijkl.
using Tensor4 = Eigen::Matrix<double, 9, 9>;

constexpr int pair_index(int i, int j) { return 3 * i + j; }

inline double& at(Tensor4& t, int i, int j, int k, int l) { return t(pair_index(i, j), pair_index(k, l)); }
inline double at(const Tensor4& t, int i, int j, int k, int l) { return t(pair_index(i, j), pair_index(k, l)); }

/// Outer product (a ⊗ b)_ijkl = a_ij b_kl.
inline Tensor4 outer(const Mat3& a, const Mat3& b) {
  Tensor4 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) t(pair_index(i, j), pair_index(k, l)) = a(i, j) * b(k, l);
  return t;
}

/// Double contraction (T : H)_ij = T_ijkl H_kl.
inline Mat3 contract(const Tensor4& t, const Mat3& h) {
  Mat3 r = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) r(i, j) += t(pair_index(i, j), pair_index(k, l)) * h(k, l);
  return r;
}

}  // namespace chainfield
