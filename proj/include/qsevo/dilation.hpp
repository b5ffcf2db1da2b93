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

// Dilations of a conditionally completely positive germ through a
// representation on a pseudo-Hilbert space E = H + H0 + H with indefinite
// metric G. Two constructions: explicit from Kraus data, and from a
// factorization of the dissipation Gram matrix.

#include "qsevo/generator.hpp"
#include "qsevo/rng.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace qsevo {

/// Error raised by a dilation construction.
class DilationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * @brief Linear map on M_n with rectangular values, stored by its images of
 * the matrix units E_pq (index p*n + q).
 */
class UnitMap {
 public:
  UnitMap() = default;
  UnitMap(int n, std::vector<ComplexMatrix> images) : n_(n), images_(std::move(images)) {
    if (static_cast<int>(images_.size()) != n * n) throw std::invalid_argument("UnitMap: need n^2 images");
  }

  template <class F>
  static UnitMap from(int n, F&& f) {
    std::vector<ComplexMatrix> im;
    im.reserve(n * n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) im.push_back(f(matrix_unit(n, p, q)));
    return {n, std::move(im)};
  }

  int n() const { return n_; }
  const ComplexMatrix& unit(int p, int q) const { return images_[p * n_ + q]; }
  const std::vector<ComplexMatrix>& images() const { return images_; }

  ComplexMatrix operator()(const ComplexMatrix& b) const {
    if (b.rows() != n_ || b.cols() != n_) throw std::invalid_argument("UnitMap: argument shape");
    ComplexMatrix out = ComplexMatrix::Zero(images_[0].rows(), images_[0].cols());
    for (int p = 0; p < n_; ++p)
      for (int q = 0; q < n_; ++q)
        if (b(p, q) != Complex(0.0)) out += b(p, q) * images_[p * n_ + q];
    return out;
  }

 private:
  int n_ = 0;
  std::vector<ComplexMatrix> images_;
};

/// G = [[0,0,I],[0,I0,0],[I,0,D]] on H + H0 + H.
struct PseudoMetric {
  int n = 0;
  int n_circ = 0;
  ComplexMatrix G;
  ComplexMatrix G_inv;

  PseudoMetric() = default;
  PseudoMetric(const ComplexMatrix& D, int n_circ_) : n(static_cast<int>(D.rows())), n_circ(n_circ_) {
    const int s = 2 * n + n_circ;
    G = ComplexMatrix::Zero(s, s);
    G_inv = ComplexMatrix::Zero(s, s);
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    G.block(0, n + n_circ, n, n) = id;
    G.block(n + n_circ, 0, n, n) = id;
    G.block(n, n, n_circ, n_circ).setIdentity();
    G.block(n + n_circ, n + n_circ, n, n) = D;
    G_inv.block(0, 0, n, n) = -D;
    G_inv.block(0, n + n_circ, n, n) = id;
    G_inv.block(n + n_circ, 0, n, n) = id;
    G_inv.block(n, n, n_circ, n_circ).setIdentity();
  }

  /// (x|y) = x+ G y
  Complex inner(const ComplexVector& x, const ComplexVector& y) const { return (x.adjoint() * G * y)(0); }
  /// flat(A) = G^-1 A+ G
  ComplexMatrix flat(const ComplexMatrix& a) const { return G_inv * a.adjoint() * G; }
};

/**
 * @brief Representation data (j, k, l) with the channel columns L0_n and
 * the H-valued columns L-_n.
 */
struct DilationTriple {
  int n = 0;
  int d = 0;
  int n_circ = 0;
  UnitMap j;  ///< M_n -> n0 x n0
  UnitMap k;  ///< M_n -> n0 x n
  UnitMap l;  ///< M_n -> n x n
  std::vector<ComplexMatrix> L_circ;   ///< d matrices n0 x n
  std::vector<ComplexMatrix> L_minus;  ///< d matrices n x n
  ComplexMatrix D;
  std::optional<ComplexMatrix> H;  ///< explicit construction only
  double extension_residual = 0.0;  ///< least-squares residual of j (Kolmogorov only)

  /// k*(B) = k(B+)+
  ComplexMatrix k_star(const ComplexMatrix& b) const { return k(b.adjoint()).adjoint(); }
};

/**
 * @brief Explicit dilation on H0 = C^r (x) H.
 *
 * j(B) = diag(B, ..., B), L the stacked column of L^i, k(B) = j(B)L - LB,
 * l(B) = (L+k(B) + k*(B)L + [B, D])/2 + i[H, B] with H = (K - K+)/2i,
 * L0_n the stacked column of L^i_n and L-_n = L+L0_n - K_n = gamma_n(I).
 */
inline DilationTriple explicit_dilate(const ModelSpec& model) {
  const ModelSpec m = resolve_model(model);
  if (!m.all_signs_positive()) throw DilationError("not conditionally positive");
  const int n = m.n;
  const int r = m.r;
  const int nc = n * r;
  DilationTriple t;
  t.n = n;
  t.d = m.d;
  t.n_circ = nc;
  t.D = *m.D;
  const ComplexMatrix& K = *m.K;
  t.H = (K - K.adjoint()) / (2.0 * kI);

  ComplexMatrix L(nc, n);
  for (int i = 0; i < r; ++i) L.middleRows(i * n, n) = m.L[i];
  auto jf = [&](const ComplexMatrix& b) {
    ComplexMatrix out = ComplexMatrix::Zero(nc, nc);
    for (int i = 0; i < r; ++i) out.block(i * n, i * n, n, n) = b;
    return out;
  };
  auto kf = [&](const ComplexMatrix& b) -> ComplexMatrix { return jf(b) * L - L * b; };
  t.j = UnitMap::from(n, jf);
  t.k = UnitMap::from(n, kf);
  const ComplexMatrix& D = t.D;
  const ComplexMatrix& H = *t.H;
  t.l = UnitMap::from(n, [&](const ComplexMatrix& b) -> ComplexMatrix {
    const ComplexMatrix ks = kf(b.adjoint()).adjoint();
    return 0.5 * (L.adjoint() * kf(b) + ks * L + commutator(b, D)) + kI * commutator(H, b);
  });
  for (int c = 0; c < m.d; ++c) {
    ComplexMatrix lc(nc, n);
    for (int i = 0; i < r; ++i) lc.middleRows(i * n, n) = m.Ln[c][i];
    t.L_minus.push_back(L.adjoint() * lc - (*m.Kn)[c]);
    t.L_circ.push_back(std::move(lc));
  }
  return t;
}

/**
 * @brief Dilation from the Kolmogorov factorization Delta(X, Z) = k^(X)+ k^(Z).
 *
 * The Gram matrix of Delta over the matrix units is factored keeping
 * eigenvalues above tol * (largest eigenvalue); the columns give
 * k^(Z) = [k(Z), k_1(Z), ..., k_d(Z)]. j(B) solves
 * j(B) k^(Z) = [k(BZ) - k(B)Z, k_.(BZ)] for all Z in the least-squares sense.
 */
inline DilationTriple kolmogorov_dilate(const GermMatrix& g, double tol = 1e-9) {
  const int n = g.n();
  const int d = g.d();
  const int s = n * (d + 1);
  const int nu = n * n;
  ComplexMatrix gram(nu * s, nu * s);
  std::vector<ComplexMatrix> units;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) units.push_back(matrix_unit(n, p, q));
  for (int a = 0; a < nu; ++a)
    for (int b = 0; b < nu; ++b) gram.block(a * s, b * s, s, s) = dissipator(g, units[a], units[b]);
  gram = 0.5 * (gram + gram.adjoint());

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram);
  const RealVector& ev = es.eigenvalues();
  const double top = std::max(ev(ev.size() - 1), 0.0);
  if (ev(0) < -tol * std::max(1.0, top)) throw DilationError("not conditionally positive");
  std::vector<int> keep;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > tol * top && ev(i) > 0.0) keep.push_back(i);
  const int nc = static_cast<int>(keep.size());

  // factor: rows sqrt(lambda_i) u_i+, columns grouped by matrix unit
  ComplexMatrix factor(nc, nu * s);
  for (int r = 0; r < nc; ++r) factor.row(r) = std::sqrt(ev(keep[r])) * es.eigenvectors().col(keep[r]).adjoint();
  auto hat = [&](int unit) { return factor.middleCols(unit * s, s); };

  DilationTriple t;
  t.n = n;
  t.d = d;
  t.n_circ = nc;
  t.D = g.D();
  std::vector<ComplexMatrix> k_im, kc_im;  // k(E) and k_.(E) = [k_1 ... k_d](E)
  for (int u = 0; u < nu; ++u) {
    k_im.push_back(hat(u).leftCols(n));
    kc_im.push_back(hat(u).rightCols(n * d));
  }
  t.k = UnitMap(n, k_im);
  const UnitMap kc(n, kc_im);

  // j on matrix units: E_pq E_rs = delta_qr E_ps
  std::vector<ComplexMatrix> j_im;
  double residual = 0.0;
  const ComplexMatrix rhs_solver = factor.adjoint();
  Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> cod(rhs_solver);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      const ComplexMatrix kb = t.k.unit(p, q);
      ComplexMatrix y(nc, nu * s);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          const int u = r * n + c;
          const ComplexMatrix ez = units[u];
          ComplexMatrix kbz = ComplexMatrix::Zero(nc, n), kcbz = ComplexMatrix::Zero(nc, n * d);
          if (q == r) {
            kbz = t.k.unit(p, c);
            kcbz = kc.unit(p, c);
          }
          y.middleCols(u * s, n) = kbz - kb * ez;
          y.middleCols(u * s + n, n * d) = kcbz;
        }
      }
      // j A = Y  <=>  A+ j+ = Y+
      const ComplexMatrix jb = cod.solve(y.adjoint()).adjoint();
      residual = std::max(residual, max_abs(jb * factor - y));
      j_im.push_back(jb);
    }
  }
  t.j = UnitMap(n, j_im);
  t.extension_residual = residual;
  const double gate = std::max(tol, 1e-9) * std::max(1.0, top);
  if (residual >= gate) throw DilationError("representation ill-defined");

  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix kc_id = kc(id);
  const ComplexMatrix g_id = g.apply(id);
  for (int c = 0; c < d; ++c) {
    t.L_circ.push_back(kc_id.middleCols(c * n, n));
    t.L_minus.push_back(g_id.block(0, (c + 1) * n, n, n));
  }
  const ComplexMatrix D = t.D;
  t.l = UnitMap::from(n, [&](const ComplexMatrix& b) -> ComplexMatrix { return g.gamma().apply(b) - D * b; });
  return t;
}

/// J(B) on E = H + H0 + H and the column operator L from H + H^d into E.
struct BlockRep {
  int n = 0;
  int d = 0;
  int n_circ = 0;
  PseudoMetric metric;
  ComplexMatrix L;  ///< (2n + n0) x n(d+1)
  const DilationTriple* triple = nullptr;

  /// J(B) = [[B, k*(B), l(B)], [0, j(B), k(B)], [0, 0, B]]
  ComplexMatrix J(const ComplexMatrix& b) const {
    const int s = 2 * n + n_circ;
    ComplexMatrix out = ComplexMatrix::Zero(s, s);
    out.block(0, 0, n, n) = b;
    out.block(0, n, n, n_circ) = triple->k_star(b);
    out.block(0, n + n_circ, n, n) = triple->l(b);
    out.block(n, n, n_circ, n_circ) = triple->j(b);
    out.block(n, n + n_circ, n_circ, n) = triple->k(b);
    out.block(n + n_circ, n + n_circ, n, n) = b;
    return out;
  }

  /// flat(L) = L+ G, mapping E back to H + H^d
  ComplexMatrix L_flat() const { return L.adjoint() * metric.G; }
};

/// The triple must outlive the returned representation.
inline BlockRep build_block_rep(const DilationTriple& t) {
  BlockRep rep;
  rep.n = t.n;
  rep.d = t.d;
  rep.n_circ = t.n_circ;
  rep.metric = PseudoMetric(t.D, t.n_circ);
  rep.triple = &t;
  const int n = t.n;
  rep.L = ComplexMatrix::Zero(2 * n + t.n_circ, n * (t.d + 1));
  rep.L.block(n + t.n_circ, 0, n, n).setIdentity();
  for (int c = 0; c < t.d; ++c) {
    rep.L.block(0, (c + 1) * n, n, n) = t.L_minus[c];
    rep.L.block(n, (c + 1) * n, t.n_circ, n) = t.L_circ[c];
  }
  return rep;
}

/// Block matrix [[l + DB, B L- + k* L0], [L0+ k + L-+ B, L0+ j L0]] assembled directly.
inline ComplexMatrix dilation_blocks(const DilationTriple& t, const ComplexMatrix& b) {
  const int n = t.n;
  ComplexMatrix out(n * (t.d + 1), n * (t.d + 1));
  out.block(0, 0, n, n) = t.l(b) + t.D * b;
  const ComplexMatrix ks = t.k_star(b);
  const ComplexMatrix kb = t.k(b);
  const ComplexMatrix jb = t.j(b);
  for (int c = 0; c < t.d; ++c) {
    out.block(0, (c + 1) * n, n, n) = b * t.L_minus[c] + ks * t.L_circ[c];
    out.block((c + 1) * n, 0, n, n) = t.L_circ[c].adjoint() * kb + t.L_minus[c].adjoint() * b;
    for (int e = 0; e < t.d; ++e) out.block((c + 1) * n, (e + 1) * n, n, n) = t.L_circ[c].adjoint() * jb * t.L_circ[e];
  }
  return out;
}

struct DilationReport {
  double max_deviation = 0.0;   ///< flat(L) J(B) L against the germ
  double path_agreement = 0.0;  ///< operator product against the direct block assembly
  bool passed = false;
};

inline DilationReport verify_dilation(const GermMatrix& g, const BlockRep& rep, int samples, double tol,
                                      std::uint64_t seed = 1) {
  if (g.n() != rep.n || g.d() != rep.d) throw std::invalid_argument("verify_dilation: dimension mismatch");
  Rng rng(seed);
  DilationReport out;
  const ComplexMatrix lf = rep.L_flat();
  for (int k = 0; k < samples; ++k) {
    ComplexMatrix b(rep.n, rep.n);
    for (Eigen::Index c = 0; c < b.cols(); ++c)
      for (Eigen::Index r = 0; r < b.rows(); ++r) b(r, c) = Complex(rng.normal(), rng.normal());
    const ComplexMatrix via_ops = lf * rep.J(b) * rep.L;
    out.max_deviation = std::max(out.max_deviation, max_abs(via_ops - g.apply(b)));
    out.path_agreement = std::max(out.path_agreement, max_abs(via_ops - dilation_blocks(*rep.triple, b)));
  }
  out.passed = out.max_deviation < tol && out.path_agreement < tol;
  return out;
}

/// Residuals of the algebraic identities the triple must satisfy.
struct TripleResiduals {
  double j_unital = 0.0;
  double j_multiplicative = 0.0;
  double j_star = 0.0;
  double leibniz = 0.0;          ///< k(XZ) = j(X)k(Z) + k(X)Z
  double coboundary = 0.0;       ///< l(XZ) = X l(Z) + l(X) Z + k*(X) k(Z)
  double l_adjoint = 0.0;        ///< l(B+)+ = l(B) + [D, B]
  double k_star_derivation = 0.0;  ///< k*(XZ) = X k*(Z) + k*(X) j(Z)

  double max() const {
    return std::max({j_unital, j_multiplicative, j_star, leibniz, coboundary, l_adjoint, k_star_derivation});
  }
};

inline TripleResiduals triple_residuals(const DilationTriple& t, int samples, std::uint64_t seed = 2) {
  Rng rng(seed);
  TripleResiduals r;
  const int n = t.n;
  auto draw = [&] {
    ComplexMatrix b(n, n);
    for (int c = 0; c < n; ++c)
      for (int q = 0; q < n; ++q) b(q, c) = Complex(rng.normal(), rng.normal());
    return b;
  };
  r.j_unital = max_abs(t.j(ComplexMatrix::Identity(n, n)) - ComplexMatrix::Identity(t.n_circ, t.n_circ));
  for (int s = 0; s < samples; ++s) {
    const ComplexMatrix x = draw();
    const ComplexMatrix z = draw();
    const ComplexMatrix xz = x * z;
    r.j_multiplicative = std::max(r.j_multiplicative, max_abs(t.j(xz) - t.j(x) * t.j(z)));
    r.j_star = std::max(r.j_star, max_abs(t.j(x.adjoint()) - t.j(x).adjoint()));
    r.leibniz = std::max(r.leibniz, max_abs(t.k(xz) - t.j(x) * t.k(z) - t.k(x) * z));
    r.coboundary = std::max(r.coboundary, max_abs(t.l(xz) - x * t.l(z) - t.l(x) * z - t.k_star(x) * t.k(z)));
    r.l_adjoint = std::max(r.l_adjoint, max_abs(t.l(x.adjoint()).adjoint() - t.l(x) - commutator(t.D, x)));
    r.k_star_derivation =
        std::max(r.k_star_derivation, max_abs(t.k_star(xz) - x * t.k_star(z) - t.k_star(x) * t.j(z)));
  }
  return r;
}

}  // namespace qsevo
