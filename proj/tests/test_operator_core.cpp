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

#include <catch2/catch_amalgamated.hpp>

#include "qsevo/operator_core.hpp"
#include "support.hpp"

using namespace qsevo;
using Catch::Matchers::WithinAbs;

TEST_CASE("is_psd on explicit spectra", "[operator_core]") {
  const auto id = is_psd(ComplexMatrix::Identity(2, 2), 1e-10);
  CHECK(id.is_psd);
  CHECK_THAT(id.min_eigenvalue, WithinAbs(1.0, 1e-14));

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -0.5;
  const auto neg = is_psd(d, 1e-10);
  CHECK_FALSE(neg.is_psd);
  CHECK_THAT(neg.min_eigenvalue, WithinAbs(-0.5, 1e-14));

  // L+L = diag(0, 1) for L = sigma_-
  const ComplexMatrix l = sigma_minus();
  const auto ll = is_psd(l.adjoint() * l, 1e-10);
  CHECK(ll.is_psd);
  CHECK_THAT(ll.min_eigenvalue, WithinAbs(0.0, 1e-14));
}

TEST_CASE("is_psd rejects non-Hermitian and non-square input", "[operator_core]") {
  CHECK_THROWS_WITH(is_psd(sigma_minus()), "not Hermitian");
  CHECK_THROWS_WITH(is_psd(ComplexMatrix::Zero(2, 3)), "not Hermitian");
}

TEST_CASE("matrix_exp special cases", "[operator_core]") {
  CHECK(test::dist(matrix_exp(ComplexMatrix::Zero(3, 3)), ComplexMatrix::Identity(3, 3)) == 0.0);

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = Complex(0.3, -1.0);
  d(1, 1) = -2.5;
  const ComplexMatrix e = matrix_exp(d);
  CHECK(std::abs(e(0, 0) - std::exp(d(0, 0))) < 1e-14);
  CHECK(std::abs(e(1, 1) - std::exp(-2.5)) < 1e-15);
  CHECK(std::abs(e(0, 1)) == 0.0);
}

TEST_CASE("matrix_exp inverse identity on seeded matrices", "[operator_core]") {
  Rng rng(7);
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 5;
    ComplexMatrix a = random_matrix(rng, n, n);
    a *= 2.0 * rng.uniform() / a.operatorNorm();
    const ComplexMatrix prod = matrix_exp(a) * matrix_exp(-a);
    CHECK(test::dist(prod, ComplexMatrix::Identity(n, n)) < 1e-12);
  }
}

TEST_CASE("matrix_exp agrees with spectral oracle up to norm 10", "[operator_core]") {
  Rng rng(11);
  for (int k = 0; k < 30; ++k) {
    const int n = 2 + k % 6;
    ComplexMatrix h = random_hermitian(rng, n);
    h *= 10.0 * rng.uniform() / h.operatorNorm();
    const ComplexMatrix a = kI * 0.3 * h + 0.7 * h;  // normal matrix, diagonalised by h's eigenbasis
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const Eigen::VectorXcd ev = es.eigenvalues().cast<Complex>();
    const Eigen::VectorXcd f = ((0.7 + 0.3 * kI) * ev).array().exp();
    const ComplexMatrix oracle = es.eigenvectors() * f.asDiagonal() * es.eigenvectors().adjoint();
    const ComplexMatrix got = matrix_exp(a);
    CHECK(test::dist(got, oracle) <= 1e-12 * oracle.operatorNorm() * n);
  }
}

TEST_CASE("matrix_exp is additive on commuting pairs", "[operator_core]") {
  Rng rng(13);
  for (int k = 0; k < 30; ++k) {
    const int n = 2 + k % 4;
    ComplexMatrix a = random_matrix(rng, n, n);
    a /= a.operatorNorm();
    const ComplexMatrix b = 0.3 * a * a - 0.5 * a + Complex(0.2, 0.1) * ComplexMatrix::Identity(n, n);
    CHECK(test::dist(matrix_exp(a + b), matrix_exp(a) * matrix_exp(b)) < 1e-10);
  }
}

TEST_CASE("superoperator conventions", "[operator_core]") {
  Rng rng(3);
  const int n = 3;
  const ComplexMatrix a = random_matrix(rng, n, n);
  const ComplexMatrix c = random_matrix(rng, n, n);
  const ComplexMatrix b = random_matrix(rng, n, n);
  CHECK(test::dist(SuperOperator::identity(n).apply(b), b) == 0.0);
  CHECK(test::dist(SuperOperator::sandwich(a, c).apply(b), a * b * c) < 1e-13);
  CHECK(test::dist(SuperOperator::left(a).apply(b), a * b) < 1e-13);
  CHECK(test::dist(SuperOperator::right(c).apply(b), b * c) < 1e-13);
  // vec is column stacking
  CHECK(vec(b)(1) == b(1, 0));
  CHECK(vec(b)(n) == b(0, 1));
}

TEST_CASE("trace dual satisfies the trace pairing", "[operator_core]") {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const int n = 2 + k % 3;
    const SuperOperator map(n, random_matrix(rng, n * n, n * n));
    const SuperOperator dual = map.trace_dual();
    CHECK(dual.picture() == Picture::schrodinger);
    const ComplexMatrix rho = test::random_density(rng, n);
    const ComplexMatrix b = random_matrix(rng, n, n);
    CHECK(std::abs((dual.apply(rho) * b).trace() - (rho * map.apply(b)).trace()) < 1e-12);
    CHECK(test::dist(dual.trace_dual().matrix(), map.matrix()) == 0.0);
  }
}

TEST_CASE("Choi matrix of reference maps", "[operator_core]") {
  // identity map: maximally entangled projector scaled by n
  const auto cid = choi_of(SuperOperator::identity(2));
  const RealVector ev = hermitian_eigenvalues(cid.matrix);
  CHECK_THAT(ev(0), WithinAbs(0.0, 1e-14));
  CHECK_THAT(ev(1), WithinAbs(0.0, 1e-14));
  CHECK_THAT(ev(2), WithinAbs(0.0, 1e-14));
  CHECK_THAT(ev(3), WithinAbs(2.0, 1e-14));

  // single Kraus operator: rank one
  const ComplexMatrix l = sigma_minus();
  const auto ck = choi_of(SuperOperator::sandwich(l.adjoint(), l));
  CHECK(is_psd(ck.matrix).is_psd);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(ck.matrix);
  int rank = 0;
  for (int i = 0; i < 4; ++i) rank += es.eigenvalues()(i) > 1e-12;
  CHECK(rank == 1);

  // negation is not CP
  const auto cneg = choi_of(Complex(-1.0) * SuperOperator::identity(2));
  CHECK(hermitian_eigenvalues(cneg.matrix)(0) < 0.0);
  CHECK_FALSE(is_completely_positive(Complex(-1.0) * SuperOperator::identity(2)).is_psd);
}

TEST_CASE("Kraus-form maps have PSD Choi matrices", "[operator_core]") {
  Rng rng(17);
  for (int k = 0; k < 40; ++k) {
    const int n = 2 + k % 3;
    const int r = 1 + k % 4;
    SuperOperator map = SuperOperator::zero(n);
    for (int i = 0; i < r; ++i) {
      const ComplexMatrix l = random_matrix(rng, n, n);
      map += SuperOperator::sandwich(l.adjoint(), l);
    }
    const auto c = choi_of(map);
    CHECK(hermitian_residual(c.matrix) < 1e-12);
    CHECK(is_psd(c.matrix, 1e-10).min_eigenvalue >= -1e-10);
  }
}

TEST_CASE("trace distance examples", "[operator_core]") {
  Rng rng(19);
  const ComplexMatrix rho = test::random_density(rng, 3);
  CHECK_THAT(trace_distance(rho, rho), WithinAbs(0.0, 1e-15));

  ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  CHECK_THAT(trace_distance(p0, p1), WithinAbs(1.0, 1e-15));

  ComplexMatrix a = ComplexMatrix::Zero(2, 2), b = ComplexMatrix::Zero(2, 2);
  a(0, 0) = 0.5;
  a(1, 1) = 0.5;
  b(0, 0) = 0.75;
  b(1, 1) = 0.25;
  CHECK_THAT(trace_distance(a, b), WithinAbs(0.25, 1e-15));

  CHECK_THROWS_AS(trace_distance(a, ComplexMatrix::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("trace distance is a metric on seeded triples", "[operator_core]") {
  Rng rng(23);
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 4;
    const ComplexMatrix x = test::random_density(rng, n);
    const ComplexMatrix y = test::random_density(rng, n);
    const ComplexMatrix z = test::random_density(rng, n);
    CHECK(std::abs(trace_distance(x, y) - trace_distance(y, x)) < 1e-12);
    CHECK(trace_distance(x, z) <= trace_distance(x, y) + trace_distance(y, z) + 1e-12);
  }
}
