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
 * @file ito_algebra.hpp
 * @brief Scalar quantum Ito algebra of d-dimensional Fock-space increments.
 *
 * An increment dLambda(a) = sum a^mu_nu dLambda^nu_mu is represented by its
 * (d+2) x (d+2) coefficient matrix. Rows and columns use the index order
 * (-, 1, ..., d, +), i.e. position 0 is "-", positions 1..d are the noise
 * channels and position d+1 is "+". The "+" row and the "-" column vanish.
 *
 * Placements of the canonical increments:
 *   time            (-, +)
 *   annihilate(n)   (-, n)
 *   create(m)       (m, +)
 *   exchange(m, n)  (m, n)
 *
 * With these placements the product of increments is the ordinary matrix
 * product of coefficient matrices, in the same order. This orientation was
 * chosen so that the Hudson-Parthasarathy table holds literally:
 *   annihilate * create = time, exchange * exchange = exchange,
 *   annihilate * exchange = annihilate, exchange * create = create,
 * and every other product of canonical d = 1 increments is zero. The index
 * formula for the product written in some references reads as the transpose
 * of this convention; the table above is what the code guarantees.
 */

#include "qsevo/operator_core.hpp"
#include "qsevo/rng.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace qsevo {

/// Position of the "-" index.
inline constexpr Eigen::Index kMinus = 0;
/// Position of the "+" index for noise dimension d.
inline constexpr Eigen::Index plus_index(int d) { return d + 1; }

enum class IncrementKind { time, annihilate, create, exchange };

class ItoElement {
 public:
  explicit ItoElement(int d) : d_(d) {
    if (d < 1) throw std::invalid_argument("ItoElement: noise dimension must be >= 1");
    coeff_ = ComplexMatrix::Zero(d + 2, d + 2);
  }

  /// Throws if the "+" row or the "-" column is not identically zero.
  ItoElement(int d, ComplexMatrix coeff) : d_(d), coeff_(std::move(coeff)) {
    if (d < 1) throw std::invalid_argument("ItoElement: noise dimension must be >= 1");
    if (coeff_.rows() != d + 2 || coeff_.cols() != d + 2) {
      throw std::invalid_argument("ItoElement: coefficient matrix must be (d+2) x (d+2)");
    }
    if (coeff_.row(plus_index(d)).cwiseAbs().maxCoeff() != 0.0 ||
        coeff_.col(kMinus).cwiseAbs().maxCoeff() != 0.0) {
      throw std::invalid_argument("ItoElement: '+' row and '-' column must vanish");
    }
  }

  static ItoElement time(int d) { return single(d, kMinus, plus_index(d)); }
  static ItoElement annihilate(int d, int n) {
    check_channel(d, n);
    return single(d, kMinus, n);
  }
  static ItoElement create(int d, int m) {
    check_channel(d, m);
    return single(d, m, plus_index(d));
  }
  static ItoElement exchange(int d, int m, int n) {
    check_channel(d, m);
    check_channel(d, n);
    return single(d, m, n);
  }

  int d() const { return d_; }
  const ComplexMatrix& coeff() const { return coeff_; }
  Complex operator()(Eigen::Index mu, Eigen::Index nu) const { return coeff_(mu, nu); }

  bool operator==(const ItoElement& o) const { return d_ == o.d_ && coeff_ == o.coeff_; }

  ItoElement& operator+=(const ItoElement& o) {
    same_dim(o);
    coeff_ += o.coeff_;
    return *this;
  }
  ItoElement& operator-=(const ItoElement& o) {
    same_dim(o);
    coeff_ -= o.coeff_;
    return *this;
  }
  friend ItoElement operator+(ItoElement a, const ItoElement& b) { return a += b; }
  friend ItoElement operator-(ItoElement a, const ItoElement& b) { return a -= b; }
  friend ItoElement operator*(Complex s, ItoElement a) {
    a.coeff_ *= s;
    return a;
  }

  void same_dim(const ItoElement& o) const {
    if (o.d_ != d_) throw std::invalid_argument("ItoElement: dimension mismatch");
  }

 private:
  static void check_channel(int d, int k) {
    if (k < 1 || k > d) {
      throw std::out_of_range("ItoElement: channel index " + std::to_string(k) +
                              " outside 1.." + std::to_string(d));
    }
  }
  static ItoElement single(int d, Eigen::Index mu, Eigen::Index nu) {
    ItoElement e(d);
    e.coeff_(mu, nu) = 1.0;
    return e;
  }

  int d_;
  ComplexMatrix coeff_;
};

/// Canonical increment by kind; `m` and `n` are 1-based channel indices.
inline ItoElement canonical(int d, IncrementKind kind, int m = 1, int n = 1) {
  switch (kind) {
    case IncrementKind::time:
      return ItoElement::time(d);
    case IncrementKind::annihilate:
      return ItoElement::annihilate(d, n);
    case IncrementKind::create:
      return ItoElement::create(d, m);
    case IncrementKind::exchange:
      return ItoElement::exchange(d, m, n);
  }
  throw std::invalid_argument("canonical: unknown kind");
}

/// Coefficients of dLambda(a) dLambda(b).
inline ItoElement ito_mul(const ItoElement& a, const ItoElement& b) {
  a.same_dim(b);
  return ItoElement(a.d(), a.coeff() * b.coeff());
}

/// Minkowski metric g^{mu nu} = delta^mu_{-nu}: swaps "-" and "+", identity in between.
struct MinkowskiMetric {
  int d;
  ComplexMatrix g;

  explicit MinkowskiMetric(int dim) : d(dim), g(ComplexMatrix::Zero(dim + 2, dim + 2)) {
    g(kMinus, plus_index(dim)) = 1.0;
    g(plus_index(dim), kMinus) = 1.0;
    for (int m = 1; m <= dim; ++m) g(m, m) = 1.0;
  }
};

/// Pseudo-Hermitian conjugation: (a^flat)^mu_nu = conj(a^{-nu}_{-mu}), i.e. g a^dagger g.
inline ItoElement flat(const ItoElement& a) {
  const MinkowskiMetric metric(a.d());
  return ItoElement(a.d(), metric.g * a.coeff().adjoint() * metric.g);
}

/// dt-coefficient a^-_+, the vacuum expectation of dLambda(a) per unit time.
inline Complex vacuum_mean(const ItoElement& a) { return a(kMinus, plus_index(a.d())); }

/// Wiener increment dQ = dLambda^+ + dLambda_- (d = 1).
inline ItoElement wiener_q() { return ItoElement::create(1, 1) + ItoElement::annihilate(1, 1); }

/// Compensated Poisson increment dP = dLambda + i (dLambda^+ - dLambda_-) (d = 1).
inline ItoElement poisson_p() {
  return ItoElement::exchange(1, 1, 1) + kI * ItoElement::create(1, 1) -
         kI * ItoElement::annihilate(1, 1);
}

inline const char* kind_name(IncrementKind k) {
  switch (k) {
    case IncrementKind::time:
      return "dt";
    case IncrementKind::annihilate:
      return "dA";
    case IncrementKind::create:
      return "dA+";
    case IncrementKind::exchange:
      return "dN";
  }
  return "?";
}

/// A canonical increment together with its printable label.
struct LabelledIncrement {
  std::string label;
  ItoElement element;
};

/// dt, dA_n, dA+_m, dN_mn for all channels, in that order.
inline std::vector<LabelledIncrement> canonical_increments(int d) {
  std::vector<LabelledIncrement> out;
  out.push_back({"dt", ItoElement::time(d)});
  for (int n = 1; n <= d; ++n) out.push_back({"dA_" + std::to_string(n), ItoElement::annihilate(d, n)});
  for (int m = 1; m <= d; ++m) out.push_back({"dA+_" + std::to_string(m), ItoElement::create(d, m)});
  for (int m = 1; m <= d; ++m)
    for (int n = 1; n <= d; ++n)
      out.push_back({"dN_" + std::to_string(m) + std::to_string(n), ItoElement::exchange(d, m, n)});
  return out;
}

/// Label of a coefficient position: (-,+) dt, (-,n) dA_n, (m,+) dA+_m, (m,n) dN_mn.
inline std::string position_label(int d, Eigen::Index mu, Eigen::Index nu) {
  if (mu == kMinus && nu == plus_index(d)) return "dt";
  if (mu == kMinus) return "dA_" + std::to_string(nu);
  if (nu == plus_index(d)) return "dA+_" + std::to_string(mu);
  return "dN_" + std::to_string(mu) + std::to_string(nu);
}

/// Human-readable sum of labelled increments; "0" when empty.
inline std::string describe(const ItoElement& a) {
  std::string out;
  const int d = a.d();
  for (Eigen::Index mu = 0; mu < d + 2; ++mu) {
    for (Eigen::Index nu = 0; nu < d + 2; ++nu) {
      const Complex c = a(mu, nu);
      if (c == Complex(0.0)) continue;
      if (!out.empty()) out += " + ";
      if (c != Complex(1.0)) {
        out += "(" + std::to_string(c.real()) + (c.imag() < 0 ? "-" : "+") + std::to_string(std::abs(c.imag())) + "i) ";
      }
      out += position_label(d, mu, nu);
    }
  }
  return out.empty() ? "0" : out;
}

/**
 * @brief Max coefficient deviation of dLambda(a)+ dLambda(a) from dLambda(flat(a) a)
 * over seeded random elements. The adjoint is taken label by label
 * (dt+ = dt, dA_n+ = dA+_n, dN_mn+ = dN_nm) with conjugated coefficients.
 */
inline double flat_identity_residual(int d, int samples, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  const Eigen::Index top = plus_index(d);
  auto mirror = [&](Eigen::Index i) { return i == kMinus ? top : (i == top ? kMinus : i); };
  for (int s = 0; s < samples; ++s) {
    ComplexMatrix c = ComplexMatrix::Zero(d + 2, d + 2);
    for (Eigen::Index mu = 0; mu <= d; ++mu)
      for (Eigen::Index nu = 1; nu <= top; ++nu) c(mu, nu) = Complex(rng.normal(), rng.normal());
    const ItoElement a(d, c);
    ComplexMatrix adj = ComplexMatrix::Zero(d + 2, d + 2);
    for (Eigen::Index mu = 0; mu < d + 2; ++mu)
      for (Eigen::Index nu = 0; nu < d + 2; ++nu)
        if (c(mu, nu) != Complex(0.0)) adj(mirror(nu), mirror(mu)) = std::conj(c(mu, nu));
    const ComplexMatrix lhs = adj * c;
    const ComplexMatrix rhs = ito_mul(flat(a), a).coeff();
    worst = std::max(worst, max_abs(lhs - rhs));
  }
  return worst;
}

}  // namespace qsevo
