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

#include "qsevo/models.hpp"
#include "qsevo/operator_core.hpp"

#include <vector>

namespace qsevo::test {

/// Max |a - b| entrywise.
inline double dist(const ComplexMatrix& a, const ComplexMatrix& b) { return max_abs(a - b); }

inline std::vector<ComplexMatrix> random_operators(std::uint64_t seed, int n, int count, double scale = 1.0) {
  Rng rng(seed);
  std::vector<ComplexMatrix> out;
  for (int k = 0; k < count; ++k) out.push_back(random_matrix(rng, n, n, scale));
  return out;
}

/// Density matrix from a random pure state.
inline ComplexMatrix random_density(Rng& rng, int n) {
  const ComplexMatrix a = random_matrix(rng, n, n);
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

}  // namespace qsevo::test
