// Copyright 2026 The qsevo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reference models and seeded random model generators.

#include "qsevo/generator.hpp"
#include "qsevo/rng.hpp"

namespace qsevo {

/// sigma_- = |g><e| with |g> = e_0, |e> = e_1.
inline ComplexMatrix sigma_minus() {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(0, 1) = 1.0;
  return s;
}

inline ComplexMatrix sigma_x() {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  s(0, 1) = 1.0;
  s(1, 0) = 1.0;
  return s;
}

/// Qubit amplitude damping (n = 2, d = r = 1): L = sqrt(rate) sigma_-, L_1 = 0, H = 0, D = 0.
inline ModelSpec amplitude_damping_model(double rate = 1.0) {
  ModelSpec m;
  m.n = 2;
  m.d = 1;
  m.r = 1;
  m.H = ComplexMatrix::Zero(2, 2);
  m.L = {std::sqrt(rate) * sigma_minus()};
  m.Ln = {{ComplexMatrix::Zero(2, 2)}};
  return m;
}

/// All structural operators zero; the germ vanishes identically.
inline ModelSpec zero_model(int n, int d, int r) {
  ModelSpec m;
  m.n = n;
  m.d = d;
  m.r = r;
  m.H = ComplexMatrix::Zero(n, n);
  m.L.assign(r, ComplexMatrix::Zero(n, n));
  m.Ln.assign(d, std::vector<ComplexMatrix>(r, ComplexMatrix::Zero(n, n)));
  return m;
}

/**
 * @brief Isometric model with r = d: L^i_n = S^i_n for an nd x nd unitary S.
 *
 * With the default closures K_n = sum_i L^i+ S^i_n and D = 0 all
 * lambda^mu_nu(I) vanish, so phi_t(I) = I.
 */
inline ModelSpec isometric_model(const std::vector<ComplexMatrix>& L, const ComplexMatrix& S,
                                 const ComplexMatrix& H) {
  const int n = static_cast<int>(H.rows());
  const int d = static_cast<int>(L.size());
  if (S.rows() != n * d || S.cols() != n * d) throw std::invalid_argument("isometric_model: S must be nd x nd");
  ModelSpec m;
  m.n = n;
  m.d = d;
  m.r = d;
  m.H = H;
  m.L = L;
  m.Ln.assign(d, std::vector<ComplexMatrix>(d));
  for (int c = 0; c < d; ++c)
    for (int i = 0; i < d; ++i) m.Ln[c][i] = S.block(i * n, c * n, n, n);
  return m;
}

/// lambda = 0 (gamma = delta): the trivial cocycle phi_t = id.
inline ModelSpec trivial_cocycle_model(int n, int d) {
  return isometric_model(std::vector<ComplexMatrix>(d, ComplexMatrix::Zero(n, n)),
                         ComplexMatrix::Identity(n * d, n * d), ComplexMatrix::Zero(n, n));
}

/// Entries i.i.d. complex Gaussian scaled by `scale`.
inline ComplexMatrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  ComplexMatrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = scale * Complex(rng.normal(), rng.normal());
  return a;
}

inline ComplexMatrix random_hermitian(Rng& rng, Eigen::Index n, double scale = 1.0) {
  const ComplexMatrix a = random_matrix(rng, n, n, scale);
  return 0.5 * (a + a.adjoint());
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
inline ComplexMatrix random_unitary(Rng& rng, Eigen::Index n) {
  const ComplexMatrix z = random_matrix(rng, n, n);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex diag = r(j, j);
    if (std::abs(diag) > 0) q.col(j) *= diag / std::abs(diag);
  }
  return q;
}

/**
 * @brief Seeded random structured model.
 *
 * Entries of H, L^i, L^i_n are Gaussian with the given scale; when
 * `with_dissipation` is set a random D <= 0 is added.
 */
inline ModelSpec random_model(int n, int d, int r, std::uint64_t seed, double scale = 0.5,
                              bool with_dissipation = false) {
  Rng rng(seed);
  ModelSpec m;
  m.n = n;
  m.d = d;
  m.r = r;
  m.H = random_hermitian(rng, n, scale);
  for (int i = 0; i < r; ++i) m.L.push_back(random_matrix(rng, n, n, scale));
  m.Ln.assign(d, {});
  for (int c = 0; c < d; ++c)
    for (int i = 0; i < r; ++i) m.Ln[c].push_back(random_matrix(rng, n, n, scale));
  if (with_dissipation) {
    const ComplexMatrix a = random_matrix(rng, n, n, scale);
    m.D = -(a.adjoint() * a);
  }
  return m;
}

}  // namespace qsevo
