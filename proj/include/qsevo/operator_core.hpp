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
 * @file operator_core.hpp
 * @brief Dense complex linear algebra used by every other qsevo module.
 *
 * Operators on the system space C^n are plain Eigen::MatrixXcd values.
 * Linear maps on operators ("superoperators") are stored as n^2 x n^2
 * matrices acting on column-stacked operators: vec(A B C) = (C^T kron A) vec(B).
 */

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace qsevo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr Complex kI{0.0, 1.0};

inline void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
  }
}

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

inline bool all_finite(const ComplexMatrix& a) {
  return a.real().allFinite() && a.imag().allFinite();
}

/// Max entrywise |A - A^dagger|; +inf for non-square input.
inline double hermitian_residual(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& a, double tol = kHermitianTol) {
  return hermitian_residual(a) <= tol;
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& a) {
  const ComplexMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

struct PsdReport {
  bool is_psd = false;
  double min_eigenvalue = 0.0;
};

/// PSD test for a Hermitian matrix. Throws std::invalid_argument("not Hermitian")
/// for non-square or non-Hermitian input.
inline PsdReport is_psd(const ComplexMatrix& a, double tol = kHermitianTol) {
  if (a.rows() != a.cols() || a.size() == 0 || hermitian_residual(a) > tol) {
    throw std::invalid_argument("not Hermitian");
  }
  const double lo = hermitian_eigenvalues(a)(0);
  return {lo >= -tol, lo};
}

/// exp(A) by Pade scaling-and-squaring (Eigen MatrixFunctions).
inline ComplexMatrix matrix_exp(const ComplexMatrix& a) {
  require_square(a, "matrix_exp");
  return a.exp();
}

/// Column-stacking vectorization.
inline ComplexVector vec(const ComplexMatrix& b) {
  return Eigen::Map<const ComplexVector>(b.data(), b.size());
}

inline ComplexMatrix unvec(const ComplexVector& v, Eigen::Index n) {
  if (v.size() != n * n) throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const ComplexMatrix>(v.data(), n, n);
}

/// Matrix unit E_pq (1 at row p, column q).
inline ComplexMatrix matrix_unit(Eigen::Index n, Eigen::Index p, Eigen::Index q) {
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  e(p, q) = 1.0;
  return e;
}

enum class Picture { heisenberg, schrodinger };

/**
 * @brief Linear map on n x n operators, stored as an n^2 x n^2 matrix in the
 * column-stacking convention.
 *
 * The picture tag records whether the map acts on observables (Heisenberg)
 * or on states (Schrodinger). trace_dual() switches between the two with
 * tr(dual(rho) B) = tr(rho map(B)).
 */
class SuperOperator {
 public:
  SuperOperator() = default;
  SuperOperator(Eigen::Index dim, ComplexMatrix matrix, Picture picture = Picture::heisenberg)
      : dim_(dim), matrix_(std::move(matrix)), picture_(picture) {
    if (matrix_.rows() != dim_ * dim_ || matrix_.cols() != dim_ * dim_) {
      throw std::invalid_argument("SuperOperator: matrix must be n^2 x n^2");
    }
  }

  static SuperOperator zero(Eigen::Index n, Picture p = Picture::heisenberg) {
    return {n, ComplexMatrix::Zero(n * n, n * n), p};
  }
  static SuperOperator identity(Eigen::Index n, Picture p = Picture::heisenberg) {
    return {n, ComplexMatrix::Identity(n * n, n * n), p};
  }
  /// B -> A B C
  static SuperOperator sandwich(const ComplexMatrix& a, const ComplexMatrix& c,
                                Picture p = Picture::heisenberg) {
    return {a.rows(), Eigen::kroneckerProduct(c.transpose(), a).eval(), p};
  }
  /// B -> A B
  static SuperOperator left(const ComplexMatrix& a, Picture p = Picture::heisenberg) {
    const auto n = a.rows();
    return {n, Eigen::kroneckerProduct(ComplexMatrix::Identity(n, n), a).eval(), p};
  }
  /// B -> B C
  static SuperOperator right(const ComplexMatrix& c, Picture p = Picture::heisenberg) {
    const auto n = c.rows();
    return {n, Eigen::kroneckerProduct(c.transpose(), ComplexMatrix::Identity(n, n)).eval(), p};
  }

  Eigen::Index dim() const { return dim_; }
  const ComplexMatrix& matrix() const { return matrix_; }
  Picture picture() const { return picture_; }

  ComplexMatrix apply(const ComplexMatrix& b) const {
    if (b.rows() != dim_ || b.cols() != dim_) {
      throw std::invalid_argument("SuperOperator::apply: operand shape mismatch");
    }
    return unvec(matrix_ * vec(b), dim_);
  }
  ComplexMatrix operator()(const ComplexMatrix& b) const { return apply(b); }

  /// (this o other)(B) = this(other(B))
  SuperOperator compose(const SuperOperator& other) const {
    return {dim_, matrix_ * other.matrix_, picture_};
  }

  /// Trace-pairing adjoint; flips the picture tag.
  SuperOperator trace_dual() const {
    const Eigen::Index n = dim_;
    // vec(X^T) = T vec(X); dual matrix = T M^T T.
    ComplexMatrix dual(n * n, n * n);
    for (Eigen::Index r = 0; r < n * n; ++r) {
      for (Eigen::Index c = 0; c < n * n; ++c) {
        const Eigen::Index rt = (r % n) * n + r / n;
        const Eigen::Index ct = (c % n) * n + c / n;
        dual(r, c) = matrix_(ct, rt);
      }
    }
    return {n, std::move(dual),
            picture_ == Picture::heisenberg ? Picture::schrodinger : Picture::heisenberg};
  }

  SuperOperator& operator+=(const SuperOperator& o) {
    matrix_ += o.matrix_;
    return *this;
  }
  SuperOperator& operator-=(const SuperOperator& o) {
    matrix_ -= o.matrix_;
    return *this;
  }
  SuperOperator& operator*=(Complex s) {
    matrix_ *= s;
    return *this;
  }
  friend SuperOperator operator+(SuperOperator a, const SuperOperator& b) { return a += b; }
  friend SuperOperator operator-(SuperOperator a, const SuperOperator& b) { return a -= b; }
  friend SuperOperator operator*(Complex s, SuperOperator a) { return a *= s; }

 private:
  Eigen::Index dim_ = 0;
  ComplexMatrix matrix_;
  Picture picture_ = Picture::heisenberg;
};

/// Hermitian n^2 x n^2 Choi matrix C = sum_pq E_pq kron map(E_pq).
struct ChoiMatrix {
  Eigen::Index dim = 0;
  ComplexMatrix matrix;
};

inline ChoiMatrix choi_of(const SuperOperator& map) {
  const auto n = map.dim();
  ChoiMatrix c{n, ComplexMatrix::Zero(n * n, n * n)};
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = 0; q < n; ++q) {
      c.matrix.block(p * n, q * n, n, n) = map.apply(matrix_unit(n, p, q));
    }
  }
  return c;
}

/// Complete positivity via the Choi matrix.
inline PsdReport is_completely_positive(const SuperOperator& map, double tol = kHermitianTol) {
  return is_psd(choi_of(map).matrix, tol);
}

/// 1/2 sum |eig(rho - sigma)|
inline double trace_distance(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  require_same_shape(rho, sigma, "trace_distance");
  require_square(rho, "trace_distance");
  return 0.5 * hermitian_eigenvalues(rho - sigma).cwiseAbs().sum();
}

/// Max absolute entry, 0 for empty.
inline double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

}  // namespace qsevo
