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

// Command-line front end. Exit codes: 0 success, 1 a verification gate
// failed, 2 invalid input (one "E_*: reason" line on stderr).

#include "qsevo/coherent_kernel.hpp"
#include "qsevo/dilation.hpp"
#include "qsevo/io.hpp"
#include "qsevo/ito_algebra.hpp"
#include "qsevo/trajectory.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

namespace qsevo {

enum class OutputFormat { text, json };

struct RunConfig {
  OutputFormat format = OutputFormat::text;
  std::string model;
  std::string out;
  std::string summary;
  std::string coherent;
  std::string rho0;
  std::string psi0;
  std::vector<std::string> observables;
  std::string method = "explicit";
  std::string scheme = "diffusive";
  int d = 1;
  double t_final = 1.0;
  double dt = 1e-3;
  double tol = 1e-9;
  long ntraj = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  long csv_paths = 10;
  bool psd_check = false;
  int picard = 0;
};

namespace cli_detail {

inline Json header(const char* command) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["version"] = kVersion;
  j["command"] = command;
  return j;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw InputError(ErrorKind::flag, msg);
}

inline void check_time_grid(const RunConfig& c) {
  require(c.dt > 0.0, "--dt must be positive");
  require(c.t_final >= c.dt, "--t-final must be at least --dt");
}

/// Flat "key: value" rendering of a JSON report for the text format.
inline void print_text(std::ostream& out, const Json& j, const std::string& prefix = "") {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      print_text(out, *it, key);
    } else if (it->is_number_float()) {
      out << key << ": " << format_double(it->get<double>()) << "\n";
    } else {
      out << key << ": " << it->dump() << "\n";
    }
  }
}

inline void emit(std::ostream& out, const RunConfig& c, const Json& report) {
  if (c.format == OutputFormat::json) {
    out << dump_json(report);
  } else {
    print_text(out, report);
  }
}

/// Filtering class from D = phi(I) - K - K+: D = 0 filtering, D <= 0 sub-filtering.
inline Classification classify_model(const ModelSpec& m, double tol) {
  const ComplexMatrix& D = *m.D;
  if (max_abs(D) <= tol) return Classification::filtering;
  if (hermitian_eigenvalues(-D)(0) >= -tol) return Classification::sub_filtering;
  return Classification::neither;
}

// ---------------------------------------------------------------- table

inline int cmd_table(const RunConfig& c, std::ostream& out) {
  require(c.d >= 1 && c.d <= 9, "--d must be between 1 and 9");
  const auto incs = canonical_increments(c.d);
  Json report = header("table");
  report["d"] = c.d;
  Json entries = Json::array();
  std::size_t width = 0;
  for (const auto& a : incs) width = std::max(width, a.label.size());
  std::vector<std::string> lines;
  for (const auto& a : incs) {
    for (const auto& b : incs) {
      const std::string prod = describe(ito_mul(a.element, b.element));
      entries.push_back({{"left", a.label}, {"right", b.label}, {"product", prod}});
      std::ostringstream os;
      os << std::left << std::setw(static_cast<int>(width)) << a.label << " * " << std::setw(static_cast<int>(width))
         << b.label << " = " << prod;
      lines.push_back(os.str());
    }
  }
  const double residual = flat_identity_residual(c.d, 100, c.seed);
  const bool passed = residual <= 1e-12;
  report["entries"] = entries;
  report["flat_identity"] = {{"samples", 100}, {"max_residual", residual}, {"passed", passed}};
  if (c.format == OutputFormat::json) {
    out << dump_json(report);
  } else {
    for (const auto& l : lines) out << l << "\n";
    out << "flat identity: max residual " << format_double(residual) << " over 100 samples ("
        << (passed ? "pass" : "FAIL") << ")\n";
  }
  return passed ? 0 : 1;
}

// ---------------------------------------------------------------- check

inline int cmd_check(const RunConfig& c, std::ostream& out) {
  require(c.tol > 0.0, "--tol must be positive");
  const ModelSpec m = load_model(c.model);
  const GermMatrix g = build_germ(m);
  const CcpReport ccp = ccp_check(g, c.tol);
  const PsdReport dis = dissipation_psd_check(g, c.tol);
  Json report = header("check");
  report["is_ccp"] = ccp.is_ccp;
  report["min_eig"] = ccp.min_eig;
  report["dissipation_psd"] = dis.is_psd;
  report["dissipation_min_eig"] = dis.min_eigenvalue;
  report["classification"] = to_string(classify_model(m, c.tol));
  report["hermitian_symmetry_residual"] = hermitian_symmetry_residual(g);
  report["model"] = model_to_json(m);
  emit(out, c, report);
  return ccp.is_ccp && dis.is_psd ? 0 : 1;
}

// ---------------------------------------------------------------- dilate

inline Json unit_images(const UnitMap& map, int n) {
  Json arr = Json::array();
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) arr.push_back(encode_matrix(map(matrix_unit(n, p, q))));
  return arr;
}

inline int cmd_dilate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require(c.method == "explicit" || c.method == "kolmogorov", "--method must be explicit or kolmogorov");
  const ModelSpec m = load_model(c.model);
  const GermMatrix g = build_germ(m);
  const double tol = c.method == "explicit" ? 1e-10 : 1e-8;
  DilationTriple t;
  try {
    t = c.method == "explicit" ? explicit_dilate(m) : kolmogorov_dilate(g);
  } catch (const DilationError& e) {
    err << "dilation failed: " << e.what() << "\n";
    Json report = header("dilate");
    report["method"] = c.method;
    report["error"] = e.what();
    report["passed"] = false;
    emit(out, c, report);
    return 1;
  }
  const BlockRep rep = build_block_rep(t);
  const DilationReport v = verify_dilation(g, rep, 50, tol, c.seed);
  const TripleResiduals res = triple_residuals(t, 20, c.seed + 1);

  Json doc = header("dilate");
  doc["method"] = c.method;
  doc["n"] = t.n;
  doc["d"] = t.d;
  doc["n_circ"] = t.n_circ;
  doc["j_units"] = unit_images(t.j, t.n);
  doc["k_units"] = unit_images(t.k, t.n);
  doc["l_units"] = unit_images(t.l, t.n);
  doc["L_circ"] = Json::array();
  for (const auto& a : t.L_circ) doc["L_circ"].push_back(encode_matrix(a));
  doc["L_minus"] = Json::array();
  for (const auto& a : t.L_minus) doc["L_minus"].push_back(encode_matrix(a));
  doc["D"] = encode_matrix(t.D);
  doc["G"] = encode_matrix(rep.metric.G);
  doc["L"] = encode_matrix(rep.L);
  const Json verify = {{"samples", 50},
                       {"tolerance", tol},
                       {"max_deviation", v.max_deviation},
                       {"path_agreement", v.path_agreement},
                       {"identity_residual", res.max()},
                       {"passed", v.passed && res.max() < tol}};
  doc["verify"] = verify;
  if (!c.out.empty()) write_text(c.out, dump_json(doc));

  Json report = header("dilate");
  report["method"] = c.method;
  report["n_circ"] = t.n_circ;
  report["verify"] = verify;
  if (c.out.empty()) {
    out << dump_json(doc);
  } else {
    emit(out, c, report);
  }
  return verify["passed"].get<bool>() ? 0 : 1;
}

// ---------------------------------------------------------------- run

inline int cmd_run(const RunConfig& c, std::ostream& out) {
  check_time_grid(c);
  require(c.ntraj >= 1, "--ntraj must be at least 1");
  require(c.csv_paths >= 0, "--csv-paths must be non-negative");
  require(c.scheme == "diffusive" || c.scheme == "jump", "--scheme must be diffusive or jump");
  const ModelSpec m = load_model(c.model);
  if (m.r != 1) throw InputError(ErrorKind::model, "r: run needs a single Kraus term (r = 1), got " + std::to_string(m.r));
  const int n = m.n;
  ComplexVector psi0 = ComplexVector::Zero(n);
  if (c.psi0.empty()) {
    psi0(n - 1) = 1.0;
  } else {
    psi0 = load_vector(c.psi0, n);
  }
  std::vector<ComplexMatrix> obs;
  for (const auto& path : c.observables) obs.push_back(load_matrix(path, n));

  EnsembleSpec spec;
  spec.scheme = c.scheme == "diffusive" ? Scheme::diffusive : Scheme::jump;
  spec.K = *m.K;
  spec.L = m.L[0];
  spec.psi0 = psi0;
  spec.t_final = c.t_final;
  spec.dt = c.dt;
  const EnsembleStats st = ensemble_average(spec, c.ntraj, c.seed, c.threads, c.csv_paths);

  if (!c.out.empty()) {
    std::vector<std::string> head{"time", "path_id", "norm2", "jump"};
    if (obs.empty()) {
      for (int i = 0; i < n; ++i) {
        head.push_back("psi" + std::to_string(i) + "_re");
        head.push_back("psi" + std::to_string(i) + "_im");
      }
    } else {
      for (std::size_t k = 0; k < obs.size(); ++k) {
        head.push_back("obs" + std::to_string(k) + "_re");
        head.push_back("obs" + std::to_string(k) + "_im");
      }
    }
    CsvWriter csv(head);
    for (std::size_t p = 0; p < st.kept_paths.size(); ++p) {
      const TrajectoryResult& r = st.kept_paths[p];
      for (std::size_t k = 0; k < r.states.size(); ++k) {
        std::vector<double> tail{r.norm2[k]};
        const double nrm = std::sqrt(r.norm2[k]);
        const ComplexVector psi = nrm > 0 ? ComplexVector(r.states[k].col(0) / nrm) : ComplexVector(r.states[k].col(0));
        if (obs.empty()) {
          for (int i = 0; i < n; ++i) {
            tail.push_back(psi(i).real());
            tail.push_back(psi(i).imag());
          }
        } else {
          for (const auto& o : obs) {
            const Complex e = psi.dot(o * psi);
            tail.push_back(e.real());
            tail.push_back(e.imag());
          }
        }
        std::vector<std::string> cells{format_double(r.times[k]), std::to_string(p)};
        cells.push_back(format_double(r.norm2[k]));
        cells.push_back(std::to_string(r.jump[k]));
        for (std::size_t i = 1; i < tail.size(); ++i) cells.push_back(format_double(tail[i]));
        csv.row_strings(cells);
      }
    }
    write_text(c.out, csv.str());
  }

  const Classification cls = classify_filtering(spec.K, spec.L);
  Json summary = header("run");
  summary["scheme"] = c.scheme;
  summary["ntraj"] = c.ntraj;
  summary["seed"] = c.seed;
  summary["t_final"] = c.t_final;
  summary["dt"] = c.dt;
  summary["times"] = st.times;
  summary["mean_norm2"] = st.mean_norm2;
  summary["se"] = st.se_norm2;
  Json rho = Json::array();
  for (const auto& r : st.rho_bar) rho.push_back(encode_matrix(r));
  summary["rho_bar"] = rho;
  summary["classification"] = to_string(cls);
  if (!c.summary.empty()) write_text(c.summary, dump_json(summary));

  Json report = header("run");
  report["scheme"] = c.scheme;
  report["ntraj"] = c.ntraj;
  report["classification"] = to_string(cls);
  report["final_mean_norm2"] = st.mean_norm2.back();
  report["final_se"] = st.se_norm2.back();
  const ComplexMatrix& last = st.rho_bar.back();
  report["final_trace"] = last.trace().real();
  emit(out, c, report);
  return 0;
}

// ---------------------------------------------------------------- master

inline int cmd_master(const RunConfig& c, std::ostream& out) {
  check_time_grid(c);
  const ModelSpec m = load_model(c.model);
  const int n = m.n;
  const ComplexMatrix rho0 = load_matrix(c.rho0, n);
  const std::vector<ComplexMatrix> rho = master_solve(m, rho0, c.t_final, c.dt);
  const std::vector<double> grid = uniform_grid(c.t_final, c.dt);
  if (!c.out.empty()) {
    std::vector<std::string> head{"time"};
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        head.push_back("rho" + std::to_string(p) + std::to_string(q) + "_re");
        head.push_back("rho" + std::to_string(p) + std::to_string(q) + "_im");
      }
    CsvWriter csv(head);
    for (std::size_t k = 0; k < rho.size(); ++k) {
      std::vector<double> row{grid[k]};
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          row.push_back(rho[k](p, q).real());
          row.push_back(rho[k](p, q).imag());
        }
      csv.row(row);
    }
    write_text(c.out, csv.str());
  }
  Json report = header("master");
  report["steps"] = rho.size() - 1;
  report["final_trace"] = rho.back().trace().real();
  report["final_rho"] = encode_matrix(rho.back());
  emit(out, c, report);
  return 0;
}

// ---------------------------------------------------------------- kernel

inline int cmd_kernel(const RunConfig& c, std::ostream& out) {
  check_time_grid(c);
  require(c.picard >= 0, "--picard must be non-negative");
  const ModelSpec m = load_model(c.model);
  const GermMatrix g = build_germ(m);
  const auto fs = load_coherent(c.coherent, m.d);
  const auto pairs = all_pairs(static_cast<int>(fs.size()));
  const KernelState st = kernel_ode_solve(g, fs, pairs, c.t_final, c.dt);
  const int n = m.n;
  const int nn = n * n;

  if (!c.out.empty()) {
    // column (a, b) of the superoperator is vec(Phi(E_pq)) with a = row + n col
    std::vector<std::string> head{"time", "f", "h"};
    for (int col = 0; col < nn; ++col)
      for (int row = 0; row < nn; ++row) {
        head.push_back("phi_" + std::to_string(row) + "_" + std::to_string(col) + "_re");
        head.push_back("phi_" + std::to_string(row) + "_" + std::to_string(col) + "_im");
      }
    CsvWriter csv(head);
    for (std::size_t k = 0; k < st.times.size(); ++k) {
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        std::vector<double> vals;
        const ComplexMatrix& phi = st.phi[k][p];
        for (int col = 0; col < nn; ++col)
          for (int row = 0; row < nn; ++row) {
            vals.push_back(phi(row, col).real());
            vals.push_back(phi(row, col).imag());
          }
        std::vector<std::string> cells{format_double(st.times[k]), std::to_string(pairs[p].f),
                                       std::to_string(pairs[p].h)};
        for (double v : vals) cells.push_back(format_double(v));
        csv.row_strings(cells);
      }
    }
    write_text(c.out, csv.str());
  }

  Json report = header("kernel");
  report["functions"] = fs.size();
  report["pairs"] = pairs.size();
  report["steps"] = st.times.size() - 1;
  bool ok = true;
  if (c.psd_check) {
    // family: every function paired with I and every matrix unit
    std::vector<int> fam_f;
    std::vector<ComplexMatrix> fam_x;
    for (int k = 0; k < static_cast<int>(fs.size()); ++k) {
      fam_f.push_back(k);
      fam_x.push_back(ComplexMatrix::Identity(n, n));
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          fam_f.push_back(k);
          fam_x.push_back(matrix_unit(n, p, q));
        }
    }
    double worst = std::numeric_limits<double>::infinity();
    double worst_t = 0.0;
    for (std::size_t k = 0; k < st.times.size(); ++k) {
      const PsdReport r = kernel_psd_check(st, k, fam_f, fam_x, 1e-8);
      if (r.min_eigenvalue < worst) {
        worst = r.min_eigenvalue;
        worst_t = st.times[k];
      }
    }
    const bool psd = worst >= -1e-8;
    ok = ok && psd;
    report["psd"] = {{"min_eig", worst}, {"at_time", worst_t}, {"passed", psd}};
  }
  if (c.picard > 0) {
    Json per_pair = Json::array();
    double worst = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const PicardResult pr = picard_iterate(m, fs[pairs[p].f], fs[pairs[p].h], c.t_final, c.dt, c.picard);
      Json dists = Json::array();
      for (const auto& it : pr.iterates) {
        double d = 0.0;
        for (std::size_t k = 0; k < it.size(); ++k) d = std::max(d, max_abs(it[k] - st.phi[k][p]));
        dists.push_back(d);
      }
      worst = std::max(worst, dists.back().get<double>());
      per_pair.push_back({{"f", pairs[p].f}, {"h", pairs[p].h}, {"distance_to_ode", dists}});
    }
    report["picard"] = {{"iterations", c.picard}, {"final_distance", worst}, {"pairs", per_pair}};
  }
  emit(out, c, report);
  return ok ? 0 : 1;
}

}  // namespace cli_detail

/**
 * @brief Parse argv and run one subcommand. Output goes to `out`, diagnostics
 * to `err`; the return value is the process exit code.
 */
inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Quantum stochastic evolution toolkit", "qsevo"};
  app.require_subcommand(1);
  std::string format = "text";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
  bool version = false;
  app.add_flag("--version", version, "Print version and schema and exit");
  app.fallthrough();

  auto* table = app.add_subcommand("table", "Print the product table of the canonical increments");
  table->add_option("--d", c.d, "Noise dimension");
  table->add_option("--seed", c.seed, "Seed for the identity check");

  auto* check = app.add_subcommand("check", "Check conditional complete positivity of a model");
  check->add_option("--model", c.model, "Model JSON")->required();
  check->add_option("--tol", c.tol, "Eigenvalue tolerance");

  auto* dilate = app.add_subcommand("dilate", "Construct and verify a dilation");
  dilate->add_option("--model", c.model, "Model JSON")->required();
  dilate->add_option("--method", c.method, "explicit or kolmogorov");
  dilate->add_option("--out", c.out, "Output JSON");
  dilate->add_option("--seed", c.seed, "Seed for the sampled checks");

  auto* run = app.add_subcommand("run", "Monte Carlo trajectories of the filtering equation");
  run->add_option("--model", c.model, "Model JSON (r = 1)")->required();
  run->add_option("--scheme", c.scheme, "diffusive or jump");
  run->add_option("--t-final", c.t_final, "Final time");
  run->add_option("--dt", c.dt, "Time step");
  run->add_option("--ntraj", c.ntraj, "Number of trajectories");
  run->add_option("--seed", c.seed, "Master seed");
  run->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  run->add_option("--out", c.out, "Trajectory CSV");
  run->add_option("--summary", c.summary, "Summary JSON");
  run->add_option("--csv-paths", c.csv_paths, "Number of paths written to the CSV");
  run->add_option("--psi0", c.psi0, "Initial vector JSON (default: last basis vector)");
  run->add_option("--observable", c.observables, "Observable matrix JSON (repeatable)");

  auto* master = app.add_subcommand("master", "Integrate the master equation");
  master->add_option("--model", c.model, "Model JSON")->required();
  master->add_option("--rho0", c.rho0, "Initial density matrix JSON")->required();
  master->add_option("--t-final", c.t_final, "Final time");
  master->add_option("--dt", c.dt, "Time step");
  master->add_option("--out", c.out, "Output CSV");

  auto* kernel = app.add_subcommand("kernel", "Coherent-vector matrix elements of the cocycle");
  kernel->add_option("--model", c.model, "Model JSON")->required();
  kernel->add_option("--coherent", c.coherent, "Coherent functions JSON")->required();
  kernel->add_option("--t-final", c.t_final, "Final time");
  kernel->add_option("--dt", c.dt, "Time step");
  kernel->add_option("--out", c.out, "Output CSV");
  kernel->add_flag("--psd-check", c.psd_check, "Check kernel positivity on the grid");
  kernel->add_option("--picard", c.picard, "Number of Picard iterates to compare");

  // --version short-circuits the subcommand requirement
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--version") {
      out << "qsevo " << kVersion << " schema " << kSchemaVersion << "\n";
      return 0;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "E_FLAG: " << e.what() << "\n";
    return 2;
  }
  c.format = format == "json" ? OutputFormat::json : OutputFormat::text;

  try {
    if (*table) return cli_detail::cmd_table(c, out);
    if (*check) return cli_detail::cmd_check(c, out);
    if (*dilate) return cli_detail::cmd_dilate(c, out, err);
    if (*run) return cli_detail::cmd_run(c, out);
    if (*master) return cli_detail::cmd_master(c, out);
    if (*kernel) return cli_detail::cmd_kernel(c, out);
  } catch (const InputError& e) {
    err << e.line() << "\n";
    return 2;
  } catch (const ModelError& e) {
    err << "E_MODEL: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "E_FLAG: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace qsevo
