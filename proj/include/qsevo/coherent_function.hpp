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

// Piecewise-constant test functions and a breakpoint-aware RK4 stepper.

#include "qsevo/operator_core.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace qsevo {

/**
 * @brief Piecewise-constant C^d valued function on [0, inf).
 *
 * starts[i] is the left end of piece i (starts[0] = 0); the last piece
 * extends to infinity.
 */
class CoherentFunction {
 public:
  CoherentFunction() = default;
  CoherentFunction(int d, std::vector<double> starts, std::vector<ComplexVector> values)
      : d_(d), starts_(std::move(starts)), values_(std::move(values)) {
    if (d_ < 1) throw std::invalid_argument("CoherentFunction: d must be >= 1");
    if (starts_.empty() || starts_.size() != values_.size())
      throw std::invalid_argument("CoherentFunction: need one start time per value");
    if (starts_[0] != 0.0) throw std::invalid_argument("CoherentFunction: first piece must start at 0");
    for (std::size_t i = 1; i < starts_.size(); ++i)
      if (!(starts_[i] > starts_[i - 1])) throw std::invalid_argument("CoherentFunction: starts must increase");
    for (const auto& v : values_)
      if (v.size() != d_) throw std::invalid_argument("CoherentFunction: value has wrong dimension");
  }

  static CoherentFunction constant(const ComplexVector& v) {
    return {static_cast<int>(v.size()), {0.0}, {v}};
  }
  static CoherentFunction zero(int d) { return constant(ComplexVector::Zero(d)); }

  int d() const { return d_; }
  const std::vector<double>& starts() const { return starts_; }
  const std::vector<ComplexVector>& values() const { return values_; }

  const ComplexVector& operator()(double t) const {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const auto i = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
    return values_[i];
  }

  /// t -> f(t + s)
  CoherentFunction shifted(double s) const {
    std::vector<double> st{0.0};
    std::vector<ComplexVector> vals{(*this)(s)};
    for (std::size_t i = 0; i < starts_.size(); ++i) {
      if (starts_[i] > s) {
        st.push_back(starts_[i] - s);
        vals.push_back(values_[i]);
      }
    }
    return {d_, std::move(st), std::move(vals)};
  }

 private:
  int d_ = 0;
  std::vector<double> starts_;
  std::vector<ComplexVector> values_;
};

/// Breakpoints of the given functions strictly inside (a, b).
inline std::vector<double> breakpoints_between(const std::vector<const CoherentFunction*>& fs, double a, double b) {
  std::vector<double> cuts;
  for (const auto* f : fs)
    for (double s : f->starts())
      if (s > a && s < b) cuts.push_back(s);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

/// int_a^b f(t)+ h(t) dt, exact for piecewise-constant functions.
inline Complex overlap_integral(const CoherentFunction& f, const CoherentFunction& h, double a, double b) {
  std::vector<double> pts{a};
  for (double c : breakpoints_between({&f, &h}, a, b)) pts.push_back(c);
  pts.push_back(b);
  Complex acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    acc += f(mid).dot(h(mid)) * (pts[i + 1] - pts[i]);
  }
  return acc;
}

/// One classical RK4 step for y' = rhs(y) with rhs autonomous on the step.
template <class State, class Rhs>
State rk4_step(const State& y, double h, Rhs&& rhs) {
  const State k1 = rhs(y);
  const State k2 = rhs(State(y + (0.5 * h) * k1));
  const State k3 = rhs(State(y + (0.5 * h) * k2));
  const State k4 = rhs(State(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/**
 * @brief Advance y from a to b with RK4, splitting at the breakpoints of
 * `fs` so that each substep sees constant coefficients. rhs(t_mid, y).
 */
template <class State, class Rhs>
State rk4_advance(const State& y, double a, double b, const std::vector<const CoherentFunction*>& fs, Rhs&& rhs) {
  std::vector<double> pts{a};
  for (double c : breakpoints_between(fs, a, b)) pts.push_back(c);
  pts.push_back(b);
  State cur = y;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    cur = rk4_step(cur, pts[i + 1] - pts[i], [&](const State& s) { return rhs(mid, s); });
  }
  return cur;
}

/// Uniform grid k * dt, k = 0..steps, with steps = round(T / dt).
inline std::vector<double> uniform_grid(double T, double dt) {
  if (!(dt > 0.0) || !(T >= dt)) throw std::invalid_argument("uniform_grid: need dt > 0 and T >= dt");
  const auto steps = static_cast<long>(std::llround(T / dt));
  std::vector<double> grid(steps + 1);
  for (long k = 0; k <= steps; ++k) grid[k] = static_cast<double>(k) * dt;
  return grid;
}

}  // namespace qsevo
