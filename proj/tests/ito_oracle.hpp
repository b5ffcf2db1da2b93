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

#include "qsevo/ito_algebra.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace qsevo::test {

// Symbolic oracle: increments as labelled basis elements with the
// Hudson-Parthasarathy rules written out case by case, independent of the
// coefficient-matrix representation.
struct Label {
  IncrementKind kind;
  int m = 0;
  int n = 0;
};

inline std::optional<Label> label_product(const Label& x, const Label& y) {
  using K = IncrementKind;
  if (x.kind == K::annihilate && y.kind == K::create && x.n == y.m) return Label{K::time};
  if (x.kind == K::annihilate && y.kind == K::exchange && x.n == y.m) return Label{K::annihilate, 0, y.n};
  if (x.kind == K::exchange && y.kind == K::create && x.n == y.m) return Label{K::create, x.m};
  if (x.kind == K::exchange && y.kind == K::exchange && x.n == y.m) return Label{K::exchange, x.m, y.n};
  return std::nullopt;
}

inline Label label_adjoint(const Label& x) {
  using K = IncrementKind;
  switch (x.kind) {
    case K::time:
      return x;
    case K::annihilate:
      return {K::create, x.n};
    case K::create:
      return {K::annihilate, 0, x.m};
    case K::exchange:
      return {K::exchange, x.n, x.m};
  }
  return x;
}

inline ItoElement element_of(int d, const Label& l) { return canonical(d, l.kind, l.m, l.n); }

inline std::vector<std::pair<Label, Complex>> expand(const ItoElement& a) {
  const int d = a.d();
  std::vector<std::pair<Label, Complex>> terms;
  auto push = [&](Label l, Complex c) {
    if (c != Complex(0.0)) terms.emplace_back(l, c);
  };
  push({IncrementKind::time}, a(kMinus, plus_index(d)));
  for (int n = 1; n <= d; ++n) push({IncrementKind::annihilate, 0, n}, a(kMinus, n));
  for (int m = 1; m <= d; ++m) push({IncrementKind::create, m}, a(m, plus_index(d)));
  for (int m = 1; m <= d; ++m)
    for (int n = 1; n <= d; ++n) push({IncrementKind::exchange, m, n}, a(m, n));
  return terms;
}

/// dLambda(a)+ dLambda(b) through labels only.
inline ItoElement oracle_adjoint_product(const ItoElement& a, const ItoElement& b) {
  ItoElement out(a.d());
  for (const auto& [la, ca] : expand(a)) {
    for (const auto& [lb, cb] : expand(b)) {
      if (auto p = label_product(label_adjoint(la), lb)) out += (std::conj(ca) * cb) * element_of(a.d(), *p);
    }
  }
  return out;
}

}  // namespace qsevo::test
