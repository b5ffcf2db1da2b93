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

/**
 * @file generator.hpp
 * @brief Germ matrices of completely positive quantum stochastic cocycles.
 *
 * A model is given by Kraus-type data {H, L^i, L^i_n, K, K_n, D}. Its germ is
 * the (d+1) x (d+1) block map
 *
 *     gamma(B)     = sum_i L^i+ B L^i   - K+ B - B K
 *     gamma_n(B)   = sum_i L^i+ B L^i_n - B K_n
 *     gamma^m(B)   = sum_i L^i_m+ B L^i - K_m+ B
 *     gamma^m_n(B) = sum_i L^i_m+ B L^i_n
 *
 * laid out with block row mu in {-, 1..d} and block column nu in {+, 1..d};
 * block index 0 stands for "-" (rows) and "+" (columns). The coefficient
 * maps of the stochastic equation are lambda = gamma - delta, where delta
 * subtracts B only on the diagonal channel blocks.
 */

#include "qsevo/operator_core.hpp"

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsevo {

/// Validation failure listing every offending field.
class ModelError : public std::invalid_argument {
 public:
  explicit ModelError(std::vector<std::string> issues)
      : std::invalid_argument(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) {
      if (!s.empty()) s += "; ";
      s += x;
    }
    return s;
  }
  std::vector<std::string> issues_;
};

struct ModelSpec {
  int n = 0;  ///< system dimension
  int d = 0;  ///< noise dimension
  int r = 0;  ///< Kraus multiplicity
  ComplexMatrix H;
  std::vector<ComplexMatrix> L;                ///< L^i, size r
  std::vector<std::vector<ComplexMatrix>> Ln;  ///< Ln[n-1][i] = L^i_n, size d x r
  std::optional<ComplexMatrix> K;
  std::optional<std::vector<ComplexMatrix>> Kn;  ///< size d
  std::optional<ComplexMatrix> D;
  /// Optional +-1 weight per Kraus term. Negative entries produce deliberately
  /// non-CP germs for negative tests; empty means all +1.
  std::vector<double> kraus_sign;

  double sign(int i) const { return kraus_sign.empty() ? 1.0 : kraus_sign[i]; }
  bool all_signs_positive() const {
    for (double s : kraus_sign)
      if (s < 0) return false;
    return true;
  }
};

namespace detail {

inline std::string shape_str(const ComplexMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void check_nxn(std::vector<std::string>& issues, const std::string& field,
                      const ComplexMatrix& m, int n) {
  if (m.rows() != n || m.cols() != n) {
    issues.push_back(field + ": expected " + std::to_string(n) + "x" + std::to_string(n) +
                     ", got " + shape_str(m));
  } else if (!all_finite(m)) {
    issues.push_back(field + ": non-finite entries");
  }
}

}  // namespace detail

/// sum_i s_i L^i+ L^i
inline ComplexMatrix kraus_identity_image(const ModelSpec& m) {
  ComplexMatrix phi = ComplexMatrix::Zero(m.n, m.n);
  for (int i = 0; i < m.r; ++i) phi += m.sign(i) * m.L[i].adjoint() * m.L[i];
  return phi;
}

/**
 * @brief Validate and complete a model.
 *
 * Missing K becomes iH + (sum L^i+ L^i - D)/2, missing K_n becomes
 * sum_i L^i+ L^i_n and missing D defaults to zero. When K is given
 * explicitly D is derived as sum L^i+ L^i - K - K+ (and must agree with an
 * explicit D). Throws ModelError listing all problems.
 */
inline ModelSpec resolve_model(ModelSpec m) {
  std::vector<std::string> issues;
  if (m.n < 1) issues.push_back("n: must be >= 1");
  if (m.d < 1) issues.push_back("d: must be >= 1");
  if (m.r < 1) issues.push_back("r: must be >= 1");
  if (!issues.empty()) throw ModelError(issues);

  detail::check_nxn(issues, "H", m.H, m.n);
  if (issues.empty() && hermitian_residual(m.H) > kHermitianTol) {
    std::ostringstream os;
    os << "H: not Hermitian (residual " << hermitian_residual(m.H) << ")";
    issues.push_back(os.str());
  }
  if (static_cast<int>(m.L.size()) != m.r) {
    issues.push_back("L: expected " + std::to_string(m.r) + " matrices, got " +
                     std::to_string(m.L.size()));
  } else {
    for (int i = 0; i < m.r; ++i) detail::check_nxn(issues, "L[" + std::to_string(i) + "]", m.L[i], m.n);
  }
  if (static_cast<int>(m.Ln.size()) != m.d) {
    issues.push_back("Ln: expected " + std::to_string(m.d) + " channel lists, got " +
                     std::to_string(m.Ln.size()));
  } else {
    for (int c = 0; c < m.d; ++c) {
      if (static_cast<int>(m.Ln[c].size()) != m.r) {
        issues.push_back("Ln[" + std::to_string(c) + "]: expected " + std::to_string(m.r) +
                         " matrices, got " + std::to_string(m.Ln[c].size()));
        continue;
      }
      for (int i = 0; i < m.r; ++i) {
        detail::check_nxn(issues, "Ln[" + std::to_string(c) + "][" + std::to_string(i) + "]",
                          m.Ln[c][i], m.n);
      }
    }
  }
  if (m.K) detail::check_nxn(issues, "K", *m.K, m.n);
  if (m.Kn) {
    if (static_cast<int>(m.Kn->size()) != m.d) {
      issues.push_back("Kn: expected " + std::to_string(m.d) + " matrices, got " +
                       std::to_string(m.Kn->size()));
    } else {
      for (int c = 0; c < m.d; ++c) detail::check_nxn(issues, "Kn[" + std::to_string(c) + "]", (*m.Kn)[c], m.n);
    }
  }
  if (m.D) {
    detail::check_nxn(issues, "D", *m.D, m.n);
    if (m.D->rows() == m.n && m.D->cols() == m.n && hermitian_residual(*m.D) > kHermitianTol) {
      issues.push_back("D: not Hermitian");
    }
  }
  if (!m.kraus_sign.empty()) {
    if (static_cast<int>(m.kraus_sign.size()) != m.r) {
      issues.push_back("kraus_sign: expected " + std::to_string(m.r) + " entries");
    }
    for (double s : m.kraus_sign)
      if (s != 1.0 && s != -1.0) issues.push_back("kraus_sign: entries must be +1 or -1");
  }
  if (!issues.empty()) throw ModelError(issues);

  const ComplexMatrix phi_id = kraus_identity_image(m);
  if (m.K) {
    const ComplexMatrix derived = phi_id - *m.K - m.K->adjoint();
    if (m.D && max_abs(*m.D - derived) > kHermitianTol) {
      std::ostringstream os;
      os << "D: inconsistent with explicit K (residual " << max_abs(*m.D - derived) << ")";
      issues.push_back(os.str());
    }
    m.D = derived;
  } else {
    if (!m.D) m.D = ComplexMatrix::Zero(m.n, m.n);
    m.K = kI * m.H + 0.5 * (phi_id - *m.D);
  }
  if (issues.empty()) {
    const double lo = hermitian_eigenvalues(-*m.D)(0);
    if (lo < -kHermitianTol) {
      std::ostringstream os;
      os << "D: not negative semidefinite (max eigenvalue " << -lo << ")";
      issues.push_back(os.str());
    }
  }
  if (!m.Kn) {
    std::vector<ComplexMatrix> kn;
    for (int c = 0; c < m.d; ++c) {
      ComplexMatrix k = ComplexMatrix::Zero(m.n, m.n);
      for (int i = 0; i < m.r; ++i) k += m.sign(i) * m.L[i].adjoint() * m.Ln[c][i];
      kn.push_back(std::move(k));
    }
    m.Kn = std::move(kn);
  }
  if (!issues.empty()) throw ModelError(issues);
  return m;
}

/// The same model with the Kraus term `i` sign-flipped (K re-derived by default closure).
inline ModelSpec negate_kraus(ModelSpec m, int i) {
  if (i < 0 || i >= m.r) throw std::out_of_range("negate_kraus: index out of range");
  if (m.kraus_sign.empty()) m.kraus_sign.assign(m.r, 1.0);
  m.kraus_sign[i] = -m.kraus_sign[i];
  m.K.reset();
  m.Kn.reset();
  return m;
}

/// The same model with every Kraus term sign-flipped, i.e. phi -> -phi.
inline ModelSpec negate_all_kraus(ModelSpec m) {
  for (int i = 0; i < m.r; ++i) m = negate_kraus(std::move(m), i);
  return m;
}

class GermMatrix {
 public:
  GermMatrix() = default;
  GermMatrix(int n, int d) : n_(n), d_(d), D_(ComplexMatrix::Zero(n, n)) {
    blocks_.assign((d + 1) * (d + 1), SuperOperator::zero(n));
  }

  /// gamma identically zero.
  static GermMatrix zero(int n, int d) { return {n, d}; }

  int n() const { return n_; }
  int d() const { return d_; }
  const ComplexMatrix& D() const { return D_; }
  void set_D(ComplexMatrix D) { D_ = std::move(D); }

  /// Block (mu, nu): mu = 0 is "-", nu = 0 is "+", channels are 1..d.
  const SuperOperator& block(int mu, int nu) const { return blocks_[index(mu, nu)]; }
  SuperOperator& block(int mu, int nu) { return blocks_[index(mu, nu)]; }

  const SuperOperator& gamma() const { return block(0, 0); }
  const SuperOperator& gamma_lower(int n) const { return block(0, n); }
  const SuperOperator& gamma_upper(int m) const { return block(m, 0); }
  const SuperOperator& gamma_channel(int m, int n) const { return block(m, n); }

  /// lambda^mu_nu = gamma^mu_nu - delta^mu_nu id
  SuperOperator lambda(int mu, int nu) const {
    SuperOperator l = block(mu, nu);
    if (mu == nu && mu != 0) l -= SuperOperator::identity(n_);
    return l;
  }

  /// Block matrix [gamma^mu_nu(B)] of size n(d+1).
  ComplexMatrix apply(const ComplexMatrix& b) const {
    const int s = n_ * (d_ + 1);
    ComplexMatrix out(s, s);
    for (int mu = 0; mu <= d_; ++mu)
      for (int nu = 0; nu <= d_; ++nu) out.block(mu * n_, nu * n_, n_, n_) = block(mu, nu).apply(b);
    return out;
  }

 private:
  std::size_t index(int mu, int nu) const {
    if (mu < 0 || mu > d_ || nu < 0 || nu > d_) throw std::out_of_range("GermMatrix: block index");
    return static_cast<std::size_t>(mu * (d_ + 1) + nu);
  }

  int n_ = 0;
  int d_ = 0;
  std::vector<SuperOperator> blocks_;
  ComplexMatrix D_;
};

inline ComplexMatrix germ_apply(const GermMatrix& g, const ComplexMatrix& b) { return g.apply(b); }

/// iota(B) = diag(B, 0) on H (+) H^bullet.
inline ComplexMatrix iota(const ComplexMatrix& b, int d) {
  const auto n = b.rows();
  ComplexMatrix out = ComplexMatrix::Zero(n * (d + 1), n * (d + 1));
  out.topLeftCorner(n, n) = b;
  return out;
}

inline GermMatrix build_germ(const ModelSpec& model) {
  const ModelSpec m = resolve_model(model);
  const int n = m.n;
  GermMatrix g(n, m.d);
  // Kraus column for block index mu: 0 -> L^i, c -> L^i_c.
  auto kraus = [&](int idx, int i) -> const ComplexMatrix& { return idx == 0 ? m.L[i] : m.Ln[idx - 1][i]; };
  for (int mu = 0; mu <= m.d; ++mu) {
    for (int nu = 0; nu <= m.d; ++nu) {
      SuperOperator phi = SuperOperator::zero(n);
      for (int i = 0; i < m.r; ++i) {
        phi += Complex(m.sign(i)) * SuperOperator::sandwich(kraus(mu, i).adjoint(), kraus(nu, i));
      }
      g.block(mu, nu) = std::move(phi);
    }
  }
  const ComplexMatrix& K = *m.K;
  g.block(0, 0) -= SuperOperator::left(K.adjoint()) + SuperOperator::right(K);
  for (int c = 1; c <= m.d; ++c) {
    const ComplexMatrix& kc = (*m.Kn)[c - 1];
    g.block(c, 0) -= SuperOperator::left(kc.adjoint());
    g.block(0, c) -= SuperOperator::right(kc);
  }
  g.set_D(*m.D);
  return g;
}

/// Max deviation of gamma(B+) from gamma(B)+ in block form, i.e. of the three
/// relations gamma(B+) = gamma(B)+, gamma_n(B+) = gamma^n(B)+ and
/// gamma^m_n(B+) = gamma^n_m(B)+, over the given operators.
inline double hermitian_symmetry_residual(const GermMatrix& g, const std::vector<ComplexMatrix>& samples) {
  double worst = 0.0;
  for (const auto& b : samples) worst = std::max(worst, max_abs(g.apply(b.adjoint()) - g.apply(b).adjoint()));
  return worst;
}

/// Hermitian symmetry residual over all matrix units.
inline double hermitian_symmetry_residual(const GermMatrix& g) {
  std::vector<ComplexMatrix> units;
  for (int p = 0; p < g.n(); ++p)
    for (int q = 0; q < g.n(); ++q) units.push_back(matrix_unit(g.n(), p, q));
  return hermitian_symmetry_residual(g, units);
}

/**
 * @brief Dissipation form Delta(X, Z) as an n(d+1) block matrix:
 *
 *   Delta(X, Z) = gamma(X+ Z) - iota(X)+ gamma(Z) - gamma(X)+ iota(Z) + iota(X)+ gamma(I) iota(Z)
 *
 * with gamma(I) in the corner equal to D.
 */
inline ComplexMatrix dissipator(const GermMatrix& g, const ComplexMatrix& x, const ComplexMatrix& z) {
  require_same_shape(x, z, "dissipator");
  if (x.rows() != g.n() || x.cols() != g.n()) throw std::invalid_argument("dissipator: shape mismatch");
  const int d = g.d();
  const ComplexMatrix ix = iota(x, d);
  const ComplexMatrix iz = iota(z, d);
  return g.apply(x.adjoint() * z) - ix.adjoint() * g.apply(z) - g.apply(x).adjoint() * iz +
         ix.adjoint() * iota(g.D(), d) * iz;
}

struct CcpReport {
  bool is_ccp = false;
  double min_eig = 0.0;
  std::optional<ComplexVector> witness;  ///< (n^2 * n(d+1)) vector of eta_k when the check fails
};

namespace detail {

/// Hermitian form F[(k, .), (l, .)] = gamma(E_k+ E_l) over matrix units E_k, k = p*n + q.
inline ComplexMatrix matrix_unit_form(const GermMatrix& g) {
  const int n = g.n();
  const int s = n * (g.d() + 1);
  const int nu = n * n;
  // E_pq+ E_rs = delta_pr E_qs
  std::vector<ComplexMatrix> images(nu);
  for (int q = 0; q < n; ++q)
    for (int t = 0; t < n; ++t) images[q * n + t] = g.apply(matrix_unit(n, q, t));
  ComplexMatrix f = ComplexMatrix::Zero(nu * s, nu * s);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int t = 0; t < n; ++t) f.block((p * n + q) * s, (p * n + t) * s, s, s) = images[q * n + t];
  return f;
}

}  // namespace detail

/**
 * @brief Conditional complete positivity of the germ.
 *
 * Over the matrix units E_k with vectors eta_k in C^{n(1+d)}, restricts the
 * form sum <eta_k | gamma(E_k+ E_l) eta_l> to the kernel of
 * eta -> sum_k E_k eta_k^0 and reports its smallest eigenvalue.
 */
inline CcpReport ccp_check(const GermMatrix& g, double tol = 1e-9) {
  const int n = g.n();
  const int s = n * (g.d() + 1);
  const int nu = n * n;
  const ComplexMatrix f = detail::matrix_unit_form(g);

  // Constraint C eta = sum_k E_k eta_k^0, an n x (nu*s) matrix of full row rank.
  ComplexMatrix c = ComplexMatrix::Zero(n, nu * s);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) c(p, (p * n + q) * s + q) = 1.0;
  Eigen::HouseholderQR<ComplexMatrix> qr(c.adjoint());
  const ComplexMatrix q = qr.householderQ();
  const ComplexMatrix kernel = q.rightCols(nu * s - n);

  const ComplexMatrix projected = kernel.adjoint() * f * kernel;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (projected + projected.adjoint()));
  CcpReport rep;
  rep.min_eig = es.eigenvalues()(0);
  rep.is_ccp = rep.min_eig >= -tol;
  if (!rep.is_ccp) rep.witness = kernel * es.eigenvectors().col(0);
  return rep;
}

/// Gram matrix of Delta over the family {E_pq} followed by I.
inline ComplexMatrix dissipation_gram(const GermMatrix& g) {
  const int n = g.n();
  const int s = n * (g.d() + 1);
  std::vector<ComplexMatrix> family;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) family.push_back(matrix_unit(n, p, q));
  family.push_back(ComplexMatrix::Identity(n, n));
  const int m = static_cast<int>(family.size());
  ComplexMatrix gram(m * s, m * s);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) gram.block(k * s, l * s, s, s) = dissipator(g, family[k], family[l]);
  return gram;
}

inline PsdReport dissipation_psd_check(const GermMatrix& g, double tol = 1e-9) {
  const double lo = hermitian_eigenvalues(dissipation_gram(g))(0);
  return {lo >= -tol, lo};
}

struct LindbladGenerator {
  SuperOperator heisenberg;   ///< B -> sum L+ B L - K+ B - B K
  SuperOperator schrodinger;  ///< rho -> sum L rho L+ - K rho - rho K+
};

inline LindbladGenerator lindblad(const ModelSpec& model) {
  const ModelSpec m = resolve_model(model);
  const ComplexMatrix& K = *m.K;
  SuperOperator h = SuperOperator::zero(m.n);
  SuperOperator s = SuperOperator::zero(m.n, Picture::schrodinger);
  for (int i = 0; i < m.r; ++i) {
    h += Complex(m.sign(i)) * SuperOperator::sandwich(m.L[i].adjoint(), m.L[i]);
    s += Complex(m.sign(i)) * SuperOperator::sandwich(m.L[i], m.L[i].adjoint(), Picture::schrodinger);
  }
  h -= SuperOperator::left(K.adjoint()) + SuperOperator::right(K);
  s -= SuperOperator::left(K, Picture::schrodinger) + SuperOperator::right(K.adjoint(), Picture::schrodinger);
  return {std::move(h), std::move(s)};
}

enum class ClassicalTarget { diffusive, jump };

enum class Classification { filtering, sub_filtering, neither };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::filtering:
      return "filtering";
    case Classification::sub_filtering:
      return "sub-filtering";
    case Classification::neither:
      return "neither";
  }
  return "?";
}

inline const char* to_string(ClassicalTarget t) {
  return t == ClassicalTarget::diffusive ? "diffusive" : "jump";
}

/// filtering: K + K+ = L+L; sub-filtering: K + K+ >= L+L.
inline Classification classify_filtering(const ComplexMatrix& K, const ComplexMatrix& L,
                                         double tol = kHermitianTol) {
  const ComplexMatrix gap = K + K.adjoint() - L.adjoint() * L;
  if (max_abs(gap) <= tol) return Classification::filtering;
  if (hermitian_eigenvalues(gap)(0) >= -tol) return Classification::sub_filtering;
  return Classification::neither;
}

/**
 * @brief Coefficients of a classical single-noise filtering equation
 *
 *   dV + K V dt = L V dQ   (diffusive)      dV + K V dt = L V dP   (jump, J = I + L)
 *
 * together with the maps of the induced flow
 *   d phi(B) + phi(drift(B)) dt = phi(noise(B)) dQ (or dP).
 */
struct ClassicalCoefficients {
  ClassicalTarget target = ClassicalTarget::diffusive;
  ComplexMatrix K;
  ComplexMatrix L;
  ComplexMatrix J;
  SuperOperator drift;  ///< B -> K+ B + B K - L+ B L
  SuperOperator noise;  ///< B -> L+ B + B L (diffusive) or J+ B J - B (jump)
  Classification classification = Classification::neither;
};

inline ClassicalCoefficients specialize_classical(const ComplexMatrix& K, const ComplexMatrix& L,
                                                  const ComplexMatrix& J, ClassicalTarget target) {
  require_square(K, "specialize_classical");
  require_same_shape(K, L, "specialize_classical");
  const auto n = K.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  ClassicalCoefficients c;
  c.target = target;
  c.K = K;
  c.L = L;
  if (target == ClassicalTarget::diffusive) {
    require_same_shape(K, J, "specialize_classical");
    if (max_abs(J - id) > kHermitianTol) {
      throw std::invalid_argument("specialize_classical: diffusive equation requires J = I");
    }
    c.J = id;
    c.noise = SuperOperator::left(L.adjoint()) + SuperOperator::right(L);
  } else {
    c.J = id + L;
    c.noise = SuperOperator::sandwich(c.J.adjoint(), c.J) - SuperOperator::identity(n);
  }
  c.drift = SuperOperator::left(K.adjoint()) + SuperOperator::right(K) -
            SuperOperator::sandwich(L.adjoint(), L);
  c.classification = classify_filtering(K, L);
  return c;
}

inline ClassicalCoefficients specialize_classical(const ComplexMatrix& K, const ComplexMatrix& L,
                                                  ClassicalTarget target) {
  return specialize_classical(K, L, ComplexMatrix::Identity(K.rows(), K.cols()), target);
}

/**
 * @brief Single-noise model (d = r = 1) whose germ reproduces a classical equation.
 *
 * Diffusive: L_+ = L, L_1 = J = I, K_1 = -L.  Jump: L_+ = iL, L_1 = J = I + L, K_1 = iL.
 * Requires K + K+ >= L+L so that D = L+L - K - K+ <= 0.
 */
inline ModelSpec classical_model(const ClassicalCoefficients& c) {
  ModelSpec m;
  const int n = static_cast<int>(c.K.rows());
  m.n = n;
  m.d = 1;
  m.r = 1;
  m.H = (c.K - c.K.adjoint()) / (2.0 * kI);
  m.K = c.K;
  if (c.target == ClassicalTarget::diffusive) {
    m.L = {c.L};
    m.Kn = std::vector<ComplexMatrix>{-c.L};
  } else {
    m.L = {kI * c.L};
    m.Kn = std::vector<ComplexMatrix>{kI * c.L};
  }
  m.Ln = {{c.J}};
  return resolve_model(m);
}

}  // namespace qsevo
