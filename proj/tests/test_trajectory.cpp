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

#include "qsevo/models.hpp"
#include "qsevo/trajectory.hpp"
#include "support.hpp"

using namespace qsevo;
using Catch::Matchers::WithinAbs;

namespace {

ComplexVector excited() {
  ComplexVector e = ComplexVector::Zero(2);
  e(1) = 1.0;
  return e;
}

ComplexMatrix ll() { return sigma_minus().adjoint() * sigma_minus(); }

}  // namespace

TEST_CASE("Wiener increments have the right moments", "[trajectory]") {
  const int steps = 100000;
  const double dt = 1e-3;
  const NoisePath p = wiener_path(dt, steps, 5);
  double s = 0.0, s2 = 0.0;
  for (double x : p.increments) {
    s += x;
    s2 += x * x;
  }
  const double mean = s / steps;
  const double var = s2 / steps - mean * mean;
  CHECK(std::abs(mean) < 4.0 * std::sqrt(dt / steps));
  // Var of the sample variance is 2 dt^2 / steps
  CHECK(std::abs(var - dt) < 4.0 * dt * std::sqrt(2.0 / steps));
}

TEST_CASE("Poisson jump times are increasing and inside the horizon", "[trajectory]") {
  long total = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const NoisePath p = poisson_path(1e-2, 500, seed);
    for (std::size_t i = 0; i < p.jump_times.size(); ++i) {
      CHECK(p.jump_times[i] < p.horizon());
      if (i > 0) CHECK(p.jump_times[i] > p.jump_times[i - 1]);
    }
    total += static_cast<long>(p.jump_times.size());
  }
  // 200 paths of length 5: count ~ Poisson(1000)
  CHECK(std::abs(total - 1000.0) < 4.0 * std::sqrt(1000.0));
}

TEST_CASE("noise-free diffusive equation is the Schroedinger evolution", "[trajectory]") {
  Rng rng(1);
  const ComplexMatrix h = random_hermitian(rng, 3);
  ComplexVector psi0 = random_matrix(rng, 3, 1);
  psi0.normalize();
  const double dt = 1e-3;
  const NoisePath p = wiener_path(dt, 1000, 2);
  const auto res = solve_diffusive(kI * h, ComplexMatrix::Zero(3, 3), psi0, p);
  const ComplexVector exact = matrix_exp(-kI * h) * psi0;
  const double scale = h.operatorNorm();
  CHECK((res.states.back() - exact).norm() < 2.0 * dt * scale * scale);
  CHECK(std::abs(res.norm2.back() - 1.0) < 2.0 * dt * scale * scale);
  CHECK(res.norm2.front() == psi0.squaredNorm());
}

TEST_CASE("trajectories are deterministic given the seed", "[trajectory]") {
  const NoisePath p1 = wiener_path(1e-3, 1000, 42);
  const NoisePath p2 = wiener_path(1e-3, 1000, 42);
  const auto a = solve_diffusive(0.5 * ll(), sigma_minus(), excited(), p1);
  const auto b = solve_diffusive(0.5 * ll(), sigma_minus(), excited(), p2);
  CHECK(a.norm2 == b.norm2);
  const auto c = solve_jump(0.5 * ll(), sigma_minus(), excited(), poisson_path(1e-3, 1000, 42));
  const auto d = solve_jump(0.5 * ll(), sigma_minus(), excited(), poisson_path(1e-3, 1000, 42));
  CHECK(c.norm2 == d.norm2);
}

TEST_CASE("solver errors", "[trajectory]") {
  const NoisePath w = wiener_path(1e-3, 10, 1);
  CHECK_THROWS_AS(solve_jump(ll(), sigma_minus(), excited(), w), std::invalid_argument);
  CHECK_THROWS_AS(solve_diffusive(ll(), sigma_minus(), ComplexVector::Zero(2), w), std::invalid_argument);
  CHECK_THROWS_WITH(solve_diffusive(1e200 * ComplexMatrix::Identity(2, 2), sigma_minus(), excited(), w),
                    Catch::Matchers::ContainsSubstring("step"));
}

TEST_CASE("jump solver without jump operator is a pure exponential", "[trajectory]") {
  Rng rng(3);
  const ComplexMatrix k = random_matrix(rng, 2, 2, 0.5);
  const NoisePath p = poisson_path(1e-2, 100, 7);
  const auto res = solve_jump(k, ComplexMatrix::Zero(2, 2), ComplexMatrix::Identity(2, 2), p);
  CHECK(test::dist(res.states.back(), matrix_exp(-k)) < 1e-12);
}

TEST_CASE("jump rows are inserted at the jump times", "[trajectory]") {
  const NoisePath p = poisson_path(1e-2, 300, 11);
  REQUIRE(!p.jump_times.empty());
  const auto res = solve_jump(0.5 * ll(), sigma_minus(), excited(), p);
  CHECK(res.states.size() == 301 + p.jump_times.size());
  std::vector<double> jt;
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    if (res.jump[i]) jt.push_back(res.times[i]);
    if (i > 0) CHECK(res.times[i] >= res.times[i - 1]);
  }
  CHECK(jt == p.jump_times);
}

TEST_CASE("mean-square normalization under the filtering condition", "[trajectory]") {
  for (Scheme s : {Scheme::diffusive, Scheme::jump}) {
    EnsembleSpec spec{s, 0.5 * ll(), sigma_minus(), excited(), 1.0, 1e-3};
    const auto st = ensemble_average(spec, 4000, 2024);
    for (std::size_t r = 0; r < st.times.size(); r += 100) {
      CHECK(std::abs(st.mean_norm2[r] - 1.0) <= 3.0 * st.se_norm2[r] + 1e-12);
    }
  }
}

TEST_CASE("strict sub-filtering gives nonincreasing mean norm", "[trajectory]") {
  for (Scheme s : {Scheme::diffusive, Scheme::jump}) {
    EnsembleSpec spec{s, ll(), sigma_minus(), excited(), 1.0, 1e-3};
    const auto st = ensemble_average(spec, 4000, 77);
    for (std::size_t r = 100; r < st.times.size(); r += 100) {
      const double se = std::hypot(st.se_norm2[r], st.se_norm2[r - 100]);
      CHECK(st.mean_norm2[r] <= st.mean_norm2[r - 100] + 3.0 * se);
    }
    CHECK(st.mean_norm2.back() < 0.9);
  }
}

TEST_CASE("ensemble of two paths is their exact average", "[trajectory]") {
  EnsembleSpec spec{Scheme::diffusive, 0.5 * ll(), sigma_minus(), excited(), 0.1, 1e-2};
  const auto st = ensemble_average(spec, 2, 9, 1);
  std::vector<TrajectoryResult> paths;
  for (int i = 0; i < 2; ++i) paths.push_back(solve_diffusive(spec.K, spec.L, spec.psi0, wiener_path(1e-2, 10, path_seed(9, i))));
  for (std::size_t r = 0; r < st.times.size(); ++r) {
    const ComplexMatrix avg = 0.5 * (paths[0].states[r] * paths[0].states[r].adjoint() +
                                     paths[1].states[r] * paths[1].states[r].adjoint());
    CHECK(test::dist(st.rho_bar[r], avg) < 1e-15);
    CHECK_THAT(st.mean_norm2[r], WithinAbs(0.5 * (paths[0].norm2[r] + paths[1].norm2[r]), 1e-15));
  }
}

TEST_CASE("ensemble results do not depend on thread count", "[trajectory]") {
  for (Scheme s : {Scheme::diffusive, Scheme::jump}) {
    EnsembleSpec spec{s, 0.5 * ll(), sigma_minus(), excited(), 0.5, 1e-2};
    const auto a = ensemble_average(spec, 500, 123, 1, 3);
    const auto b = ensemble_average(spec, 500, 123, 4, 3);
    CHECK(a.mean_norm2 == b.mean_norm2);
    for (std::size_t r = 0; r < a.times.size(); ++r) CHECK(test::dist(a.rho_bar[r], b.rho_bar[r]) == 0.0);
    REQUIRE(a.kept_paths.size() == 3);
    CHECK(a.kept_paths[2].norm2 == b.kept_paths[2].norm2);
  }
}

TEST_CASE("unravelings reproduce the master equation", "[trajectory]") {
  const ModelSpec m = amplitude_damping_model();
  const auto oracle = master_solve(m, excited() * excited().adjoint(), 1.0, 1e-3);
  CHECK_THAT(oracle.back()(1, 1).real(), WithinAbs(std::exp(-1.0), 1e-12));
  CHECK_THAT(oracle[500](1, 1).real(), WithinAbs(std::exp(-0.5), 1e-12));
  for (Scheme s : {Scheme::diffusive, Scheme::jump}) {
    EnsembleSpec spec{s, *resolve_model(m).K, sigma_minus(), excited(), 1.0, 1e-3};
    const auto st = ensemble_average(spec, 2000, 31);
    for (int r : {500, 1000}) CHECK(trace_distance(st.rho_bar[r], oracle[r]) <= 0.03);
  }
}

TEST_CASE("excited population of the unravelings", "[trajectory]") {
  // Both schemes keep the excited amplitude deterministic: exact decay for the
  // jump scheme, (1 - dt/2)^(2k) for Euler-Maruyama.
  EnsembleSpec spec{Scheme::jump, 0.5 * ll(), sigma_minus(), excited(), 1.0, 1e-3};
  const auto j = ensemble_average(spec, 200, 1);
  CHECK_THAT(j.rho_bar.back()(1, 1).real(), WithinAbs(std::exp(-1.0), 1e-12));
  spec.scheme = Scheme::diffusive;
  const auto d = ensemble_average(spec, 200, 1);
  CHECK_THAT(d.rho_bar.back()(1, 1).real(), WithinAbs(std::pow(1.0 - 0.5e-3, 2000), 1e-12));
  CHECK(d.rho_se.back()(1, 1) < 1e-12);
}

TEST_CASE("Heisenberg flow with identity is the norm process", "[trajectory]") {
  const auto c = specialize_classical(0.5 * ll(), sigma_minus(), ClassicalTarget::diffusive);
  ComplexMatrix mean = ComplexMatrix::Zero(2, 2);
  const int paths = 2000;
  for (int i = 0; i < paths; ++i) {
    const auto y = heisenberg_flow(c, ComplexMatrix::Identity(2, 2), wiener_path(1e-2, 100, i));
    mean += y.back() / static_cast<double>(paths);
  }
  CHECK(test::dist(mean, ComplexMatrix::Identity(2, 2)) < 0.1);
}

TEST_CASE("noise-free flow is conjugation by the propagator", "[trajectory]") {
  Rng rng(4);
  const ComplexMatrix k = random_matrix(rng, 2, 2, 0.5);
  const ComplexMatrix b = random_matrix(rng, 2, 2);
  const auto c = specialize_classical(k, ComplexMatrix::Zero(2, 2), ClassicalTarget::diffusive);
  const double dt = 1e-3;
  const auto y = heisenberg_flow(c, b, wiener_path(dt, 1000, 1));
  const ComplexMatrix v = matrix_exp(-k);
  CHECK(test::dist(y.back(), v.adjoint() * b * v) < 20.0 * dt);
  CHECK_THROWS_AS(heisenberg_flow(c, b, poisson_path(dt, 10, 1)), std::invalid_argument);
}

TEST_CASE("flow and conjugated state converge under refinement", "[trajectory]") {
  const auto c = specialize_classical(0.5 * ll(), sigma_minus(), ClassicalTarget::diffusive);
  const NoisePath fine = wiener_path(1e-4, 8000, 3);
  const ComplexMatrix b = sigma_x();
  double prev = 0.0;
  for (int factor : {8, 1}) {
    const NoisePath p = coarsened(fine, factor);
    const auto y = heisenberg_flow(c, b, p);
    const ComplexMatrix v = solve_diffusive(c.K, c.L, ComplexMatrix::Identity(2, 2), p).states.back();
    const double err = max_abs(y.back() - v.adjoint() * b * v);
    if (factor == 1) CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("Ito product rule per step", "[trajectory]") {
  const double dt = 1e-3;
  const NoisePath w = wiener_path(dt, 1000, 8);
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  const auto d = solve_diffusive(0.5 * ll(), sigma_minus(), id, w);
  CHECK(ito_step_check(d, sigma_minus(), w) < 10.0 * std::pow(dt, 1.5));

  const NoisePath p = poisson_path(dt, 3000, 12);
  REQUIRE(!p.jump_times.empty());
  const auto j = solve_jump(0.5 * ll(), sigma_minus(), id, p);
  CHECK(ito_step_check(j, sigma_minus(), p) < 1e-12);

  Rng rng(5);
  const ComplexMatrix k = random_matrix(rng, 2, 2, 0.5);
  const auto z = solve_diffusive(k, ComplexMatrix::Zero(2, 2), id, w);
  double vmax = 0.0;
  for (const auto& s : z.states) vmax = std::max(vmax, s.operatorNorm());
  CHECK(ito_step_check(z, ComplexMatrix::Zero(2, 2), w) < dt * dt * std::pow(k.operatorNorm() * vmax, 2) * std::exp(1.0));
}

TEST_CASE("discrete cocycle property", "[trajectory]") {
  const double dt = 1e-3;
  CHECK(cocycle_compose_check(Scheme::diffusive, 0.5 * ll(), sigma_minus(), wiener_path(dt, 1000, 1), 500) < 1e-13);

  // pick a Poisson path with a jump in each half
  std::uint64_t seed = 0;
  for (;; ++seed) {
    const NoisePath p = poisson_path(dt, 1000, seed);
    const bool first = std::any_of(p.jump_times.begin(), p.jump_times.end(), [](double t) { return t < 0.5; });
    const bool second = std::any_of(p.jump_times.begin(), p.jump_times.end(), [](double t) { return t >= 0.5; });
    if (first && second) break;
  }
  CHECK(cocycle_compose_check(Scheme::jump, 0.5 * ll(), sigma_minus(), poisson_path(dt, 1000, seed), 500) < 1e-13);

  Rng rng(6);
  const ComplexMatrix k = random_matrix(rng, 2, 2, 0.5);
  CHECK(cocycle_compose_check(Scheme::jump, k, ComplexMatrix::Zero(2, 2), poisson_path(dt, 1000, 3), 500) < 1e-12);
  CHECK_THROWS_AS(cocycle_compose_check(Scheme::diffusive, k, k, wiener_path(dt, 10, 1), 10), std::invalid_argument);
}

TEST_CASE("vector cocycle ODE", "[trajectory]") {
  Rng rng(7);
  const ModelSpec m = resolve_model(random_model(2, 1, 1, 3));
  const auto v0 = vector_cocycle_ode(m, CoherentFunction::zero(1), 1.0, 1e-2);
  CHECK(test::dist(v0.back(), matrix_exp(-*m.K)) < 1e-10);

  // commuting K, K_1 with a piecewise-constant h
  ModelSpec c = zero_model(2, 1, 1);
  ComplexMatrix k = ComplexMatrix::Zero(2, 2), k1 = ComplexMatrix::Zero(2, 2);
  k(0, 0) = Complex(1.0, 0.3);
  k(1, 1) = Complex(0.5, -0.2);
  k1(0, 0) = Complex(0.2, 0.4);
  k1(1, 1) = Complex(-0.3, 0.1);
  c.K = k;
  c.Kn = std::vector<ComplexMatrix>{k1};
  ComplexVector h0(1), h1(1);
  h0(0) = Complex(1.0, -0.5);
  h1(0) = Complex(-0.7, 0.2);
  const CoherentFunction h(1, {0.0, 0.37}, {h0, h1});
  const auto v = vector_cocycle_ode(c, h, 1.0, 1e-2);
  const ComplexMatrix expected = matrix_exp(-(k + h1(0) * k1) * 0.63) * matrix_exp(-(k + h0(0) * k1) * 0.37);
  CHECK(test::dist(v.back(), expected) < 1e-10);
}

TEST_CASE("vector cocycle ODE has fourth-order convergence", "[trajectory]") {
  const ModelSpec m = resolve_model(random_model(3, 2, 2, 4, 0.6));
  ComplexVector hv(2);
  hv << Complex(0.8, -0.3), Complex(-0.4, 0.5);
  const ComplexMatrix exact = matrix_exp(-(*m.K + hv(0) * (*m.Kn)[0] + hv(1) * (*m.Kn)[1]));
  const double e1 = max_abs(vector_cocycle_ode(m, CoherentFunction::constant(hv), 1.0, 0.1).back() - exact);
  const double e2 = max_abs(vector_cocycle_ode(m, CoherentFunction::constant(hv), 1.0, 0.05).back() - exact);
  CHECK(e1 / e2 > 16.0 * 0.8);
  CHECK(e1 / e2 < 16.0 * 1.2);
}
