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

// Matrix elements of a quantum stochastic cocycle between coherent vectors.
// For test functions f, h the map Phi_t(f, h): B -> <f| phi_t(B) |h> (on
// [0, t]) solves the linear ODE
//
//   d Phi / dt = (f+ h) Phi + Phi o Lambda_t,
//   Lambda_t = lambda^-_+ + sum conj(f^m) lambda^m_+ + sum h^n lambda^-_n + sum conj(f^m) h^n lambda^m_n,
//
// with Phi_0 = id. Superoperators act on column-stacked vectors, so
// composition Phi o Lambda is the matrix product.

#include "qsevo/coherent_function.hpp"
#include "qsevo/generator.hpp"
#include "qsevo/rng.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsevo {

struct KernelPair {
  int f = 0;
  int h = 0;
};

/// All ordered pairs (k, l) over `count` functions.
inline std::vector<KernelPair> all_pairs(int count) {
  std::vector<KernelPair> out;
  for (int k = 0; k < count; ++k)
    for (int l = 0; l < count; ++l) out.push_back({k, l});
  return out;
}

/// Phi_t(f, h) for a family of pairs on a uniform grid.
struct KernelState {
  int n = 0;
  std::vector<double> times;
  std::vector<KernelPair> pairs;
  std::vector<std::vector<ComplexMatrix>> phi;  ///< phi[time][pair], n^2 x n^2

  std::optional<std::size_t> find(int f, int h) const {
    for (std::size_t p = 0; p < pairs.size(); ++p)
      if (pairs[p].f == f && pairs[p].h == h) return p;
    return std::nullopt;
  }

  const ComplexMatrix& at(std::size_t t, int f, int h) const {
    const auto p = find(f, h);
    if (!p) throw std::out_of_range("kernel: missing pair");
    return phi[t][*p];
  }

  ComplexMatrix apply(std::size_t t, int f, int h, const ComplexMatrix& b) const {
    return unvec(at(t, f, h) * vec(b), n);
  }
};

/// Lambda_t as an n^2 x n^2 matrix for values a = f(t), c = h(t).
inline ComplexMatrix kernel_generator(const GermMatrix& g, const ComplexVector& a, const ComplexVector& c) {
  ComplexMatrix m = g.lambda(0, 0).matrix();
  for (int k = 1; k <= g.d(); ++k) {
    m += std::conj(a(k - 1)) * g.lambda(k, 0).matrix();
    m += c(k - 1) * g.lambda(0, k).matrix();
    for (int l = 1; l <= g.d(); ++l) m += (std::conj(a(k - 1)) * c(l - 1)) * g.lambda(k, l).matrix();
  }
  return m;
}

/// Right-hand side of the kernel ODE at Phi.
inline ComplexMatrix kernel_rhs(const GermMatrix& g, const ComplexVector& a, const ComplexVector& c,
                                const ComplexMatrix& phi) {
  return a.dot(c) * phi + phi * kernel_generator(g, a, c);
}

inline KernelState kernel_ode_solve(const GermMatrix& g, const std::vector<CoherentFunction>& fs,
                                    const std::vector<KernelPair>& pairs, double T, double dt) {
  for (const auto& f : fs)
    if (f.d() != g.d()) throw std::invalid_argument("kernel_ode_solve: function dimension differs from d");
  for (const auto& p : pairs)
    if (p.f < 0 || p.h < 0 || p.f >= static_cast<int>(fs.size()) || p.h >= static_cast<int>(fs.size()))
      throw std::out_of_range("kernel_ode_solve: pair index");
  KernelState st;
  st.n = g.n();
  st.times = uniform_grid(T, dt);
  st.pairs = pairs;
  const auto nn = g.n() * g.n();
  std::vector<ComplexMatrix> cur(pairs.size(), ComplexMatrix::Identity(nn, nn));
  st.phi.push_back(cur);
  for (std::size_t k = 1; k < st.times.size(); ++k) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const CoherentFunction& f = fs[pairs[p].f];
      const CoherentFunction& h = fs[pairs[p].h];
      cur[p] = rk4_advance(cur[p], st.times[k - 1], st.times[k], {&f, &h},
                           [&](double t, const ComplexMatrix& y) -> ComplexMatrix { return kernel_rhs(g, f(t), h(t), y); });
      if (!all_finite(cur[p])) throw std::runtime_error("kernel_ode_solve: non-finite state at step " + std::to_string(k));
    }
    st.phi.push_back(cur);
  }
  return st;
}

/**
 * @brief Kernel positivity at grid index t.
 *
 * Family element k carries a function index and an operator X_k. Without
 * vectors the check covers all xi at once: the block matrix
 * [Phi_t(f_k, f_l)(X_k+ X_l)] must be PSD. With vectors it assembles the
 * scalar matrix <xi_k | Phi_t(f_k, f_l)(X_k+ X_l) xi_l>.
 */
inline PsdReport kernel_psd_check(const KernelState& st, std::size_t t, const std::vector<int>& functions,
                                  const std::vector<ComplexMatrix>& ops, double tol,
                                  const std::vector<ComplexVector>* vectors = nullptr) {
  if (functions.size() != ops.size()) throw std::invalid_argument("kernel_psd_check: family size mismatch");
  if (vectors && vectors->size() != ops.size()) throw std::invalid_argument("kernel_psd_check: vector count");
  const int n = st.n;
  const auto m = static_cast<int>(ops.size());
  const int blk = vectors ? 1 : n;
  ComplexMatrix big(m * blk, m * blk);
  for (int k = 0; k < m; ++k) {
    for (int l = 0; l < m; ++l) {
      const ComplexMatrix v = st.apply(t, functions[k], functions[l], ops[k].adjoint() * ops[l]);
      if (vectors) {
        big(k, l) = (*vectors)[k].dot(v * (*vectors)[l]);
      } else {
        big.block(k * n, l * n, n, n) = v;
      }
    }
  }
  const double lo = hermitian_eigenvalues(0.5 * (big + big.adjoint()))(0);
  return {lo >= -tol, lo};
}

/**
 * @brief sum conj(a^m) gamma^m_n(B) c^n + sum conj(a^m) gamma^m(B) + sum gamma_n(B) c^n + gamma(B).
 *
 * Equals d/dt Phi_t(f, h)(B) at t = 0 for f(0) = a, h(0) = c.
 */
inline ComplexMatrix germ_form_eval(const GermMatrix& g, const ComplexVector& a, const ComplexVector& c,
                                    const ComplexMatrix& b) {
  if (a.size() != g.d() || c.size() != g.d()) throw std::invalid_argument("germ_form_eval: vector dimension");
  ComplexMatrix out = g.gamma().apply(b);
  for (int k = 1; k <= g.d(); ++k) {
    out += std::conj(a(k - 1)) * g.gamma_upper(k).apply(b);
    out += c(k - 1) * g.gamma_lower(k).apply(b);
    for (int l = 1; l <= g.d(); ++l) out += (std::conj(a(k - 1)) * c(l - 1)) * g.gamma_channel(k, l).apply(b);
  }
  return out;
}

/// |germ_form_eval - d/dt Phi at 0|, the derivative taken from the ODE right-hand side.
inline double germ_form_derivative_residual(const GermMatrix& g, const ComplexVector& a, const ComplexVector& c,
                                            const ComplexMatrix& b) {
  const auto nn = g.n() * g.n();
  const ComplexMatrix deriv = kernel_rhs(g, a, c, ComplexMatrix::Identity(nn, nn));
  return max_abs(germ_form_eval(g, a, c, b) - unvec(deriv * vec(b), g.n()));
}

/// Iterates of the Duhamel recursion for one pair, on a uniform grid.
struct PicardResult {
  std::vector<double> times;
  std::vector<std::vector<ComplexMatrix>> iterates;  ///< iterates[k][time], n^2 x n^2
};

namespace detail {

/// Superoperator B -> A+ B C on column-stacked vectors.
inline ComplexMatrix conjugation(const ComplexMatrix& a, const ComplexMatrix& c) {
  return Eigen::kroneckerProduct(c.transpose(), a.adjoint()).eval();
}

/// Step propagators of dV/dt = -(K + sum K_n g^n(t)) V over each grid cell.
inline std::vector<ComplexMatrix> step_propagators(const ModelSpec& m, const CoherentFunction& g,
                                                   const std::vector<double>& grid) {
  std::vector<ComplexMatrix> out;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    out.push_back(rk4_advance(ComplexMatrix(ComplexMatrix::Identity(m.n, m.n)), grid[k - 1], grid[k], {&g},
                              [&](double t, const ComplexMatrix& y) -> ComplexMatrix {
                                ComplexMatrix a = *m.K;
                                const ComplexVector& v = g(t);
                                for (int c = 0; c < m.d; ++c) a += v(c) * (*m.Kn)[c];
                                return -(a * y);
                              }));
  }
  return out;
}

}  // namespace detail

/**
 * @brief Picard iteration of
 *
 *   Phi_t(B) = V_t(f)+ B V_t(h) + int_0^t Phi_s( F_s( V(t,s;f)+ B V(t,s;h) ) ) ds,
 *   F_s(X) = sum conj(f^mu(s)) phi^mu_nu(X) h^nu(s),  f^0 = h^0 = 1,
 *
 * where phi^mu_nu are the Kraus blocks and V(t,s;g) propagates
 * dV/dt = -(K + sum K_n g^n) V from s to t. Iterate 0 is V+ B V; the
 * integral uses the trapezoidal rule on the grid refined by the breakpoints.
 */
inline PicardResult picard_iterate(const ModelSpec& model, const CoherentFunction& f, const CoherentFunction& h,
                                   double T, double dt, int iterations) {
  if (iterations < 1) throw std::invalid_argument("picard_iterate: need at least one iteration");
  const ModelSpec m = resolve_model(model);
  if (f.d() != m.d || h.d() != m.d) throw std::invalid_argument("picard_iterate: function dimension differs from d");
  const std::vector<double> grid = uniform_grid(T, dt);
  // Quadrature nodes: the grid refined by the breakpoints, so every cell sees constant values.
  std::vector<double> nodes = grid;
  for (double c : breakpoints_between({&f, &h}, 0.0, grid.back())) nodes.push_back(c);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
              nodes.end());
  const std::size_t M = nodes.size();
  const int n = m.n;
  const int nn = n * n;

  const auto pf = detail::step_propagators(m, f, nodes);
  const auto ph = detail::step_propagators(m, h, nodes);
  // Visit W(t_i, t_j): B -> V(t_j,t_i;f)+ B V(t_j,t_i;h) for i = j down to 0.
  auto sweep = [&](std::size_t j, auto&& visit) {
    ComplexMatrix vf = ComplexMatrix::Identity(n, n), vh = ComplexMatrix::Identity(n, n);
    for (std::size_t i = j + 1; i-- > 0;) {
      visit(i, detail::conjugation(vf, vh));
      if (i > 0) {
        vf = vf * pf[i - 1];
        vh = vh * ph[i - 1];
      }
    }
  };

  // F on cell c, evaluated at its midpoint. Kraus column 0 = L, c = L_c.
  auto kraus = [&](int idx, int i) -> const ComplexMatrix& { return idx == 0 ? m.L[i] : m.Ln[idx - 1][i]; };
  std::vector<ComplexMatrix> F(M - 1);
  for (std::size_t c = 0; c + 1 < M; ++c) {
    const double mid = 0.5 * (nodes[c] + nodes[c + 1]);
    ComplexVector fh(m.d + 1), hh(m.d + 1);
    fh(0) = 1.0;
    hh(0) = 1.0;
    fh.tail(m.d) = f(mid);
    hh.tail(m.d) = h(mid);
    F[c] = ComplexMatrix::Zero(nn, nn);
    for (int mu = 0; mu <= m.d; ++mu)
      for (int nu = 0; nu <= m.d; ++nu)
        for (int r = 0; r < m.r; ++r)
          F[c] += (m.sign(r) * std::conj(fh(mu)) * hh(nu)) * detail::conjugation(kraus(mu, r), kraus(nu, r));
  }

  std::vector<std::vector<ComplexMatrix>> iterates;
  std::vector<ComplexMatrix> it0(M);
  for (std::size_t j = 0; j < M; ++j) sweep(j, [&](std::size_t i, const ComplexMatrix& w) { if (i == 0) it0[j] = w; });
  iterates.push_back(std::move(it0));
  for (int k = 1; k < iterations; ++k) {
    const auto& prev = iterates.back();
    std::vector<ComplexMatrix> next(M);
    for (std::size_t j = 0; j < M; ++j) {
      // trapezoid per cell: cell c contributes at both of its end nodes with F_c
      ComplexMatrix integral = ComplexMatrix::Zero(nn, nn);
      ComplexMatrix w0;
      sweep(j, [&](std::size_t i, const ComplexMatrix& w) {
        if (i < j) integral += (0.5 * (nodes[i + 1] - nodes[i])) * (prev[i] * F[i] * w);
        if (i > 0) integral += (0.5 * (nodes[i] - nodes[i - 1])) * (prev[i] * F[i - 1] * w);
        if (i == 0) w0 = w;
      });
      next[j] = w0 + integral;
    }
    iterates.push_back(std::move(next));
  }

  PicardResult res;
  res.times = grid;
  for (const auto& it : iterates) {
    std::vector<ComplexMatrix> on_grid;
    std::size_t c = 0;
    for (double t : grid) {
      while (std::abs(nodes[c] - t) >= 1e-12) ++c;
      on_grid.push_back(it[c]);
    }
    res.iterates.push_back(std::move(on_grid));
  }
  return res;
}

struct SubmartingaleReport {
  double max_deviation = 0.0;  ///< |Phi_t(I) - I - int_0^t Phi_s(D) ds| over the grid
  bool monotone = true;        ///< <eta|Phi_t(I) eta> nonincreasing for the probe vectors
  bool passed = false;
};

/**
 * @brief At the vacuum Phi_t = exp(t gamma), so Phi_t(I) = I + int_0^t Phi_s(D) ds.
 *
 * The integral uses composite Simpson (3/8 rule on the last panel for an odd
 * number of cells, a three-node quadratic for a single cell).
 */
inline SubmartingaleReport submartingale_vacuum_check(const GermMatrix& g, double T, double dt, double tol = 1e-8,
                                                      std::uint64_t seed = 1) {
  const int n = g.n();
  const KernelState st = kernel_ode_solve(g, {CoherentFunction::zero(g.d())}, {{0, 0}}, T, dt);
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  std::vector<ComplexMatrix> m_t, phi_d;
  for (std::size_t k = 0; k < st.times.size(); ++k) {
    m_t.push_back(st.apply(k, 0, 0, id));
    phi_d.push_back(st.apply(k, 0, 0, g.D()));
  }
  auto integral = [&](std::size_t cells) -> ComplexMatrix {
    const double h = dt;
    ComplexMatrix acc = ComplexMatrix::Zero(n, n);
    if (cells == 0) return acc;
    if (cells == 1) {
      // quadratic through the first three nodes when available
      if (phi_d.size() > 2) return (h / 12.0) * (5.0 * phi_d[0] + 8.0 * phi_d[1] - phi_d[2]);
      return 0.5 * h * (phi_d[0] + phi_d[1]);
    }
    std::size_t simpson_cells = cells % 2 == 0 ? cells : cells - 3;
    for (std::size_t i = 0; i + 2 <= simpson_cells; i += 2)
      acc += (h / 3.0) * (phi_d[i] + 4.0 * phi_d[i + 1] + phi_d[i + 2]);
    if (cells % 2 == 1) {
      const std::size_t i = simpson_cells;
      acc += (3.0 * h / 8.0) * (phi_d[i] + 3.0 * phi_d[i + 1] + 3.0 * phi_d[i + 2] + phi_d[i + 3]);
    }
    return acc;
  };
  SubmartingaleReport rep;
  Rng rng(seed);
  std::vector<ComplexVector> probes;
  for (int k = 0; k < 4; ++k) {
    ComplexVector v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(rng.normal(), rng.normal());
    probes.push_back(v);
  }
  for (std::size_t k = 0; k < st.times.size(); ++k) {
    rep.max_deviation = std::max(rep.max_deviation, max_abs(m_t[k] - id - integral(k)));
    if (k > 0) {
      for (const auto& v : probes)
        if (v.dot(m_t[k] * v).real() > v.dot(m_t[k - 1] * v).real() + 1e-12) rep.monotone = false;
    }
  }
  rep.passed = rep.max_deviation < tol;
  return rep;
}

}  // namespace qsevo
