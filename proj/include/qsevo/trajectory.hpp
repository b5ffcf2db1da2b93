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

// Linear stochastic filtering equations driven by classical noise:
//   dV + K V dt = L V dQ   (Wiener)        dV + K V dt = L V dP   (compensated Poisson)
// plus the induced Heisenberg flows, ensemble statistics and the
// deterministic cocycle ODE on coherent vectors.

#include "qsevo/coherent_function.hpp"
#include "qsevo/generator.hpp"
#include "qsevo/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qsevo {

enum class NoiseKind { wiener, poisson };

/**
 * @brief One realization of the driving noise on a uniform grid.
 *
 * Wiener paths store the increments dQ_k ~ N(0, dt); Poisson paths store
 * the jump times of a unit-rate process on [0, steps * dt).
 */
struct NoisePath {
  NoiseKind kind = NoiseKind::wiener;
  double dt = 0.0;
  int steps = 0;
  std::uint64_t seed = 0;
  std::vector<double> increments;
  std::vector<double> jump_times;

  double horizon() const { return static_cast<double>(steps) * dt; }
  double time(int k) const { return static_cast<double>(k) * dt; }

  /// dP_k = (number of jumps in [t_k, t_k+1)) - dt for Poisson, dQ_k for Wiener.
  std::vector<double> grid_increments() const {
    if (kind == NoiseKind::wiener) return increments;
    std::vector<double> inc(steps, -dt);
    for (double t : jump_times) {
      const int k = std::min(steps - 1, static_cast<int>(std::floor(t / dt)));
      inc[k] += 1.0;
    }
    return inc;
  }
};

inline void check_grid(double dt, int steps) {
  if (!(dt > 0.0)) throw std::invalid_argument("noise path: dt must be positive");
  if (steps < 1) throw std::invalid_argument("noise path: need at least one step");
}

inline NoisePath wiener_path(double dt, int steps, std::uint64_t seed) {
  check_grid(dt, steps);
  NoisePath p{NoiseKind::wiener, dt, steps, seed, {}, {}};
  Rng rng(seed);
  const double sd = std::sqrt(dt);
  p.increments.resize(steps);
  for (int k = 0; k < steps; ++k) p.increments[k] = sd * rng.normal();
  return p;
}

inline NoisePath poisson_path(double dt, int steps, std::uint64_t seed) {
  check_grid(dt, steps);
  NoisePath p{NoiseKind::poisson, dt, steps, seed, {}, {}};
  Rng rng(seed);
  const double T = p.horizon();
  for (double t = rng.exponential(); t < T; t += rng.exponential()) p.jump_times.push_back(t);
  return p;
}

/// Tail of the path after `offset` steps, re-based at time 0.
inline NoisePath shifted(const NoisePath& p, int offset) {
  if (offset < 0 || offset >= p.steps) throw std::invalid_argument("shifted: split must lie on the step grid");
  NoisePath q = p;
  q.steps = p.steps - offset;
  const double s = p.time(offset);
  if (p.kind == NoiseKind::wiener) {
    q.increments.assign(p.increments.begin() + offset, p.increments.end());
  } else {
    q.jump_times.clear();
    for (double t : p.jump_times)
      if (t >= s) q.jump_times.push_back(t - s);
  }
  return q;
}

/// Head of the path, first `steps` steps.
inline NoisePath truncated(const NoisePath& p, int steps) {
  if (steps < 1 || steps > p.steps) throw std::invalid_argument("truncated: bad step count");
  NoisePath q = p;
  q.steps = steps;
  if (p.kind == NoiseKind::wiener) {
    q.increments.resize(steps);
  } else {
    q.jump_times.clear();
    for (double t : p.jump_times)
      if (t < q.horizon()) q.jump_times.push_back(t);
  }
  return q;
}

/// Same realization on a grid `factor` times coarser (Wiener increments summed).
inline NoisePath coarsened(const NoisePath& p, int factor) {
  if (factor < 1 || p.steps % factor != 0) throw std::invalid_argument("coarsened: factor must divide steps");
  NoisePath q = p;
  q.dt = p.dt * factor;
  q.steps = p.steps / factor;
  if (p.kind == NoiseKind::wiener) {
    q.increments.assign(q.steps, 0.0);
    for (int k = 0; k < p.steps; ++k) q.increments[k / factor] += p.increments[k];
  }
  return q;
}

/// Rows on the uniform grid plus, for jump paths, one extra row per jump.
struct TrajectoryResult {
  std::vector<double> times;
  std::vector<ComplexMatrix> states;  ///< V_t X0 (a column for state vectors)
  std::vector<double> norm2;          ///< squared Frobenius norm of the state
  std::vector<int> jump;              ///< 1 on jump rows
  std::vector<ComplexMatrix> pre_jump;  ///< state just before each jump, in order

  void push(double t, const ComplexMatrix& x, int is_jump) {
    times.push_back(t);
    states.push_back(x);
    norm2.push_back(x.squaredNorm());
    jump.push_back(is_jump);
  }

  /// States on the uniform grid only.
  std::vector<ComplexMatrix> grid_states() const {
    std::vector<ComplexMatrix> out;
    for (std::size_t i = 0; i < states.size(); ++i)
      if (!jump[i]) out.push_back(states[i]);
    return out;
  }
};

namespace detail {

inline void check_coefficients(const ComplexMatrix& K, const ComplexMatrix& L, const ComplexMatrix& x0) {
  require_square(K, "trajectory");
  require_same_shape(K, L, "trajectory");
  if (x0.rows() != K.rows()) throw std::invalid_argument("trajectory: initial state has wrong dimension");
  if (x0.squaredNorm() == 0.0) throw std::invalid_argument("trajectory: initial state is zero");
}

inline void check_finite(const ComplexMatrix& x, int step) {
  if (!all_finite(x)) throw std::runtime_error("trajectory: non-finite state at step " + std::to_string(step));
}

}  // namespace detail

/// Euler-Maruyama: X_k+1 = X_k - K X_k dt + L X_k dQ_k.
inline TrajectoryResult solve_diffusive(const ComplexMatrix& K, const ComplexMatrix& L, const ComplexMatrix& x0,
                                        const NoisePath& path) {
  detail::check_coefficients(K, L, x0);
  if (path.kind != NoiseKind::wiener) throw std::invalid_argument("solve_diffusive: needs a Wiener path");
  TrajectoryResult res;
  ComplexMatrix x = x0;
  res.push(0.0, x, 0);
  for (int k = 0; k < path.steps; ++k) {
    x = x - path.dt * (K * x) + path.increments[k] * (L * x);
    detail::check_finite(x, k + 1);
    res.push(path.time(k + 1), x, 0);
  }
  return res;
}

/**
 * @brief Piecewise-exact jump scheme: exp(-(K + L) tau) between jumps (where
 * dP = -dt) and X -> (I + L) X at each jump.
 */
inline TrajectoryResult solve_jump(const ComplexMatrix& K, const ComplexMatrix& L, const ComplexMatrix& x0,
                                   const NoisePath& path) {
  detail::check_coefficients(K, L, x0);
  if (path.kind != NoiseKind::poisson) throw std::invalid_argument("solve_jump: needs a Poisson path");
  const auto n = K.rows();
  const ComplexMatrix a = K + L;
  const ComplexMatrix jump = ComplexMatrix::Identity(n, n) + L;
  const ComplexMatrix step = matrix_exp(-path.dt * a);
  TrajectoryResult res;
  ComplexMatrix x = x0;
  res.push(0.0, x, 0);
  std::size_t next = 0;
  for (int k = 0; k < path.steps; ++k) {
    const double t0 = path.time(k);
    const double t1 = path.time(k + 1);
    double cur = t0;
    bool jumped = false;
    while (next < path.jump_times.size() && path.jump_times[next] < t1) {
      const double tau = path.jump_times[next++];
      x = matrix_exp(-(tau - cur) * a) * x;
      res.pre_jump.push_back(x);
      x = jump * x;
      detail::check_finite(x, k + 1);
      res.push(tau, x, 1);
      cur = tau;
      jumped = true;
    }
    x = jumped ? ComplexMatrix(matrix_exp(-(t1 - cur) * a) * x) : ComplexMatrix(step * x);
    detail::check_finite(x, k + 1);
    res.push(t1, x, 0);
  }
  return res;
}

enum class Scheme { diffusive, jump };

inline const char* to_string(Scheme s) { return s == Scheme::diffusive ? "diffusive" : "jump"; }

inline NoisePath make_path(Scheme s, double dt, int steps, std::uint64_t seed) {
  return s == Scheme::diffusive ? wiener_path(dt, steps, seed) : poisson_path(dt, steps, seed);
}

inline TrajectoryResult solve(Scheme s, const ComplexMatrix& K, const ComplexMatrix& L, const ComplexMatrix& x0,
                              const NoisePath& path) {
  return s == Scheme::diffusive ? solve_diffusive(K, L, x0, path) : solve_jump(K, L, x0, path);
}

/**
 * @brief Euler iteration of the flow phi_t(B) driven by the same increments:
 * phi_k+1 = phi_k o (id - drift dt + noise dN_k). Returns phi_t(B) on the grid.
 */
inline std::vector<ComplexMatrix> heisenberg_flow(const ClassicalCoefficients& c, const ComplexMatrix& b,
                                                  const NoisePath& path) {
  const bool diffusive = c.target == ClassicalTarget::diffusive;
  if (diffusive != (path.kind == NoiseKind::wiener))
    throw std::invalid_argument("heisenberg_flow: noise kind does not match the equation");
  const auto n = c.K.rows();
  if (b.rows() != n || b.cols() != n) throw std::invalid_argument("heisenberg_flow: operator shape");
  const std::vector<double> inc = path.grid_increments();
  const ComplexMatrix id = ComplexMatrix::Identity(n * n, n * n);
  ComplexMatrix phi = id;
  std::vector<ComplexMatrix> out{b};
  const ComplexVector vb = vec(b);
  for (int k = 0; k < path.steps; ++k) {
    phi = phi * (id - path.dt * c.drift.matrix() + inc[k] * c.noise.matrix());
    out.push_back(unvec(phi * vb, n));
  }
  return out;
}

/**
 * @brief Per-step residual of the product rule for V+V.
 *
 * Diffusive rows: d(V+V) - dV+ V - V+ dV - V+ L+ L V dQ^2, which leaves only
 * the O(dt dQ) and O(dt^2) cross terms of the Euler step. Jump rows: the same
 * identity at each jump with dV = L V and (dP)^2 = dP = 1.
 */
inline double ito_step_check(const TrajectoryResult& res, const ComplexMatrix& L, const NoisePath& path) {
  double worst = 0.0;
  if (path.kind == NoiseKind::wiener) {
    for (int k = 0; k < path.steps; ++k) {
      const ComplexMatrix& v = res.states[k];
      const ComplexMatrix dv = res.states[k + 1] - v;
      const double dq = path.increments[k];
      const ComplexMatrix lhs = res.states[k + 1].adjoint() * res.states[k + 1] - v.adjoint() * v;
      const ComplexMatrix rhs = dv.adjoint() * v + v.adjoint() * dv + (dq * dq) * (L * v).adjoint() * (L * v);
      worst = std::max(worst, max_abs(lhs - rhs));
    }
  } else {
    std::size_t j = 0;
    for (std::size_t i = 0; i < res.states.size(); ++i) {
      if (!res.jump[i]) continue;
      const ComplexMatrix& v = res.pre_jump[j++];
      const ComplexMatrix& w = res.states[i];
      const ComplexMatrix dv = L * v;
      const ComplexMatrix lhs = w.adjoint() * w - v.adjoint() * v;
      const ComplexMatrix rhs = dv.adjoint() * v + v.adjoint() * dv + dv.adjoint() * dv;
      worst = std::max(worst, max_abs(lhs - rhs));
    }
  }
  return worst;
}

/// Largest difference between one pass over [0, s + r] and the composition of [0, s] with the shifted tail.
inline double cocycle_compose_check(Scheme scheme, const ComplexMatrix& K, const ComplexMatrix& L,
                                    const NoisePath& path, int split_steps) {
  if (split_steps <= 0 || split_steps >= path.steps)
    throw std::invalid_argument("cocycle_compose_check: split must lie strictly inside the step grid");
  const auto n = K.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix whole = solve(scheme, K, L, id, path).states.back();
  const ComplexMatrix head = solve(scheme, K, L, id, truncated(path, split_steps)).states.back();
  const ComplexMatrix tail = solve(scheme, K, L, id, shifted(path, split_steps)).states.back();
  return max_abs(whole - tail * head);
}

/// Compensated running sum.
template <class T>
struct Kahan {
  T sum;
  T comp;

  explicit Kahan(const T& zero) : sum(zero), comp(zero) {}
  void add(const T& x) {
    const T y = x - comp;
    const T t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

struct EnsembleSpec {
  Scheme scheme = Scheme::diffusive;
  ComplexMatrix K;
  ComplexMatrix L;
  ComplexVector psi0;
  double t_final = 1.0;
  double dt = 1e-3;
};

struct EnsembleStats {
  std::vector<double> times;
  std::vector<ComplexMatrix> rho_bar;        ///< E[psi psi+]
  std::vector<Eigen::MatrixXd> rho_se;       ///< standard error of each entry
  std::vector<double> mean_norm2;
  std::vector<double> se_norm2;
  long n_traj = 0;
  std::vector<TrajectoryResult> kept_paths;  ///< first `keep` paths, by index
};

namespace detail {

struct Partial {
  std::vector<Kahan<ComplexMatrix>> rho;
  std::vector<Kahan<Eigen::MatrixXd>> rho2;
  std::vector<Kahan<double>> norm;
  std::vector<Kahan<double>> norm2;

  Partial(std::size_t rows, Eigen::Index n)
      : rho(rows, Kahan<ComplexMatrix>(ComplexMatrix::Zero(n, n))),
        rho2(rows, Kahan<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(n, n))),
        norm(rows, Kahan<double>(0.0)),
        norm2(rows, Kahan<double>(0.0)) {}
};

}  // namespace detail

/**
 * @brief Monte Carlo ensemble with per-path seeds master_seed ^ index.
 *
 * Paths are processed in fixed chunks; chunk partial sums are merged in chunk
 * order, so the result does not depend on the number of threads.
 */
inline EnsembleStats ensemble_average(const EnsembleSpec& spec, long n_traj, std::uint64_t master_seed,
                                      unsigned threads = 0, long keep = 0) {
  if (n_traj < 1) throw std::invalid_argument("ensemble_average: need at least one trajectory");
  const auto n = spec.K.rows();
  const std::vector<double> grid = uniform_grid(spec.t_final, spec.dt);
  const int steps = static_cast<int>(grid.size()) - 1;
  const std::size_t rows = grid.size();
  constexpr long kChunk = 64;
  const long chunks = (n_traj + kChunk - 1) / kChunk;
  std::vector<detail::Partial> partials(chunks, detail::Partial(rows, n));
  EnsembleStats stats;
  stats.kept_paths.resize(std::min(keep, n_traj));

  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (long c = next++; c < chunks && !failed; c = next++) {
      try {
        auto& part = partials[c];
        for (long i = c * kChunk; i < std::min(n_traj, (c + 1) * kChunk); ++i) {
          const NoisePath path = make_path(spec.scheme, spec.dt, steps, path_seed(master_seed, i));
          TrajectoryResult res = solve(spec.scheme, spec.K, spec.L, spec.psi0, path);
          std::size_t row = 0;
          for (std::size_t r = 0; r < res.states.size(); ++r) {
            if (res.jump[r]) continue;
            const ComplexMatrix& psi = res.states[r];
            const ComplexMatrix outer = psi * psi.adjoint();
            part.rho[row].add(outer);
            part.rho2[row].add(outer.cwiseAbs2());
            part.norm[row].add(res.norm2[r]);
            part.norm2[row].add(res.norm2[r] * res.norm2[r]);
            ++row;
          }
          if (i < static_cast<long>(stats.kept_paths.size())) stats.kept_paths[i] = std::move(res);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failed) failure = e.what();
        failed = true;
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<long>(threads, chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed) throw std::runtime_error(failure);

  detail::Partial total(rows, n);
  for (const auto& part : partials) {
    for (std::size_t r = 0; r < rows; ++r) {
      total.rho[r].add(part.rho[r].sum);
      total.rho2[r].add(part.rho2[r].sum);
      total.norm[r].add(part.norm[r].sum);
      total.norm2[r].add(part.norm2[r].sum);
    }
  }
  const double N = static_cast<double>(n_traj);
  stats.n_traj = n_traj;
  stats.times = grid;
  for (std::size_t r = 0; r < rows; ++r) {
    const ComplexMatrix mean = total.rho[r].sum / N;
    Eigen::MatrixXd se = Eigen::MatrixXd::Zero(n, n);
    double norm_se = 0.0;
    const double mn = total.norm[r].sum / N;
    if (n_traj > 1) {
      const Eigen::MatrixXd var = ((total.rho2[r].sum / N - mean.cwiseAbs2()) * (N / (N - 1))).cwiseMax(0.0);
      se = (var / N).cwiseSqrt();
      norm_se = std::sqrt(std::max(0.0, (total.norm2[r].sum / N - mn * mn) * (N / (N - 1))) / N);
    }
    stats.rho_bar.push_back(mean);
    stats.rho_se.push_back(se);
    stats.mean_norm2.push_back(mn);
    stats.se_norm2.push_back(norm_se);
  }
  return stats;
}

/// Density-matrix RK4 for d rho/dt = sum L rho L+ - K rho - rho K+.
inline std::vector<ComplexMatrix> master_solve(const ModelSpec& model, const ComplexMatrix& rho0, double t_final,
                                               double dt) {
  const LindbladGenerator gen = lindblad(model);
  if (rho0.rows() != model.n || rho0.cols() != model.n) throw std::invalid_argument("master_solve: rho0 shape");
  const std::vector<double> grid = uniform_grid(t_final, dt);
  const ComplexMatrix& m = gen.schrodinger.matrix();
  std::vector<ComplexMatrix> out{rho0};
  ComplexVector v = vec(rho0);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    v = rk4_step(v, grid[k] - grid[k - 1], [&](const ComplexVector& y) -> ComplexVector { return m * y; });
    out.push_back(unvec(v, model.n));
  }
  return out;
}

/**
 * @brief Cocycle equation on a coherent vector: dV/dt = -(K + sum_m K_m h^m(t)) V,
 * V_0 = I, RK4 with substeps at the breakpoints of h. Returns V on the grid.
 */
inline std::vector<ComplexMatrix> vector_cocycle_ode(const ModelSpec& model, const CoherentFunction& h, double T,
                                                     double dt) {
  const ModelSpec m = resolve_model(model);
  if (h.d() != m.d) throw std::invalid_argument("vector_cocycle_ode: function dimension differs from d");
  const std::vector<double> grid = uniform_grid(T, dt);
  ComplexMatrix v = ComplexMatrix::Identity(m.n, m.n);
  std::vector<ComplexMatrix> out{v};
  auto generator_at = [&](double t) {
    ComplexMatrix a = *m.K;
    const ComplexVector& hv = h(t);
    for (int c = 0; c < m.d; ++c) a += hv(c) * (*m.Kn)[c];
    return a;
  };
  for (std::size_t k = 1; k < grid.size(); ++k) {
    v = rk4_advance(v, grid[k - 1], grid[k], {&h},
                    [&](double t, const ComplexMatrix& y) -> ComplexMatrix { return -(generator_at(t) * y); });
    out.push_back(v);
  }
  return out;
}

}  // namespace qsevo
