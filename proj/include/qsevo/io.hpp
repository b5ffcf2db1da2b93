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

// File formats: complex matrices as JSON rows of [re, im] pairs, model and
// coherent-function documents, and CSV with fixed 17-significant-digit
// numbers independent of the C locale.

#include "qsevo/coherent_function.hpp"
#include "qsevo/generator.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace qsevo {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSchemaVersion = "qsevo/1";

using Json = nlohmann::json;

enum class ErrorKind { flag, file, json, model };

inline const char* error_prefix(ErrorKind k) {
  switch (k) {
    case ErrorKind::flag:
      return "E_FLAG";
    case ErrorKind::file:
      return "E_FILE";
    case ErrorKind::json:
      return "E_JSON";
    case ErrorKind::model:
      return "E_MODEL";
  }
  return "E_UNKNOWN";
}

/// Input error carrying its message prefix class.
class InputError : public std::runtime_error {
 public:
  InputError(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  std::string line() const { return std::string(error_prefix(kind_)) + ": " + what(); }

 private:
  ErrorKind kind_;
};

// ---------------------------------------------------------------- numbers

/// Shortest form is not used on purpose: every double prints with 17 significant digits.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------- matrices

inline Json encode_matrix(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json encode_vector(const ComplexVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(Json::array({v(i).real(), v(i).imag()}));
  return out;
}

namespace detail {

inline std::string join_issues(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) {
    if (!s.empty()) s += "; ";
    s += x;
  }
  return s;
}

inline bool decode_complex(const Json& j, Complex& out) {
  if (j.is_number()) {
    out = Complex(j.get<double>(), 0.0);
    return true;
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    out = Complex(j[0].get<double>(), j[1].get<double>());
    return true;
  }
  return false;
}

}  // namespace detail

/**
 * @brief Decode a matrix; problems are appended to `issues` prefixed by `field`.
 *
 * The scalar 0 stands for the zero matrix of size `n` (when n > 0).
 */
inline std::optional<ComplexMatrix> decode_matrix(const Json& j, const std::string& field,
                                                  std::vector<std::string>& issues, int n = 0) {
  if (j.is_number()) {
    if (j.get<double>() == 0.0 && n > 0) return ComplexMatrix(ComplexMatrix::Zero(n, n));
    issues.push_back(field + ": scalar shorthand only allows 0");
    return std::nullopt;
  }
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    issues.push_back(field + ": expected an array of rows of [re, im] pairs");
    return std::nullopt;
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
      issues.push_back(field + ": row " + std::to_string(r) + " has the wrong length");
      return std::nullopt;
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!detail::decode_complex(j[r][c], m(r, c))) {
        issues.push_back(field + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                         ") is not a number or [re, im] pair");
        return std::nullopt;
      }
    }
  }
  if (n > 0 && (rows != n || cols != n)) {
    issues.push_back(field + ": expected " + std::to_string(n) + "x" + std::to_string(n) + ", got " +
                     std::to_string(rows) + "x" + std::to_string(cols));
    return std::nullopt;
  }
  return m;
}

inline std::optional<ComplexVector> decode_vector(const Json& j, const std::string& field,
                                                  std::vector<std::string>& issues, int n = 0) {
  if (!j.is_array() || j.empty()) {
    issues.push_back(field + ": expected an array of [re, im] pairs");
    return std::nullopt;
  }
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!detail::decode_complex(j[i], v(static_cast<Eigen::Index>(i)))) {
      issues.push_back(field + ": entry " + std::to_string(i) + " is not a number or [re, im] pair");
      return std::nullopt;
    }
  }
  if (n > 0 && v.size() != n) {
    issues.push_back(field + ": expected length " + std::to_string(n) + ", got " + std::to_string(v.size()));
    return std::nullopt;
  }
  return v;
}

// ---------------------------------------------------------------- files

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(ErrorKind::file, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline Json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(ErrorKind::json, path + ": " + e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(ErrorKind::file, "cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError(ErrorKind::file, "write failed for '" + path + "'");
}

/// Pretty JSON with a trailing newline.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- models

/**
 * @brief Parse a model document. Every problem is collected before
 * throwing, and semantic checks (Hermiticity, closures) run through
 * resolve_model. Returns the resolved model.
 */
inline ModelSpec model_from_json(const Json& j) {
  if (!j.is_object()) throw InputError(ErrorKind::model, "model: top level must be an object");
  std::vector<std::string> issues;
  ModelSpec m;
  auto get_int = [&](const char* key, int& out) {
    if (!j.contains(key)) {
      issues.push_back(std::string(key) + ": missing");
    } else if (!j[key].is_number_integer() || j[key].get<long>() < 1) {
      issues.push_back(std::string(key) + ": expected a positive integer");
    } else {
      out = j[key].get<int>();
    }
  };
  get_int("n", m.n);
  get_int("d", m.d);
  get_int("r", m.r);
  const bool dims = m.n > 0 && m.d > 0 && m.r > 0;

  if (!j.contains("H")) {
    issues.push_back("H: missing");
  } else if (dims) {
    if (auto h = decode_matrix(j["H"], "H", issues, m.n)) {
      m.H = *h;
      if (hermitian_residual(m.H) > kHermitianTol) {
        std::ostringstream os;
        os << "H: not Hermitian (residual " << hermitian_residual(m.H) << ")";
        issues.push_back(os.str());
      }
    }
  }

  if (!j.contains("L")) {
    issues.push_back("L: missing");
  } else if (!j["L"].is_array()) {
    issues.push_back("L: expected an array of r matrices");
  } else if (dims) {
    if (static_cast<int>(j["L"].size()) != m.r) {
      issues.push_back("L: expected " + std::to_string(m.r) + " matrices, got " + std::to_string(j["L"].size()));
    }
    for (std::size_t i = 0; i < j["L"].size(); ++i)
      if (auto a = decode_matrix(j["L"][i], "L[" + std::to_string(i) + "]", issues, m.n)) m.L.push_back(*a);
  }

  if (!j.contains("Ln")) {
    issues.push_back("Ln: missing");
  } else if (!j["Ln"].is_array()) {
    issues.push_back("Ln: expected d lists of r matrices");
  } else if (dims) {
    if (static_cast<int>(j["Ln"].size()) != m.d) {
      issues.push_back("Ln: expected " + std::to_string(m.d) + " channel lists, got " +
                       std::to_string(j["Ln"].size()));
    }
    for (std::size_t c = 0; c < j["Ln"].size(); ++c) {
      const Json& lst = j["Ln"][c];
      const std::string name = "Ln[" + std::to_string(c) + "]";
      if (!lst.is_array() || static_cast<int>(lst.size()) != m.r) {
        issues.push_back(name + ": expected " + std::to_string(m.r) + " matrices");
        continue;
      }
      std::vector<ComplexMatrix> row;
      for (std::size_t i = 0; i < lst.size(); ++i)
        if (auto a = decode_matrix(lst[i], name + "[" + std::to_string(i) + "]", issues, m.n)) row.push_back(*a);
      m.Ln.push_back(std::move(row));
    }
  }

  if (dims && j.contains("K") && !j["K"].is_null()) {
    if (auto k = decode_matrix(j["K"], "K", issues, m.n)) m.K = *k;
  }
  if (dims && j.contains("Kn") && !j["Kn"].is_null()) {
    if (!j["Kn"].is_array() || static_cast<int>(j["Kn"].size()) != m.d) {
      issues.push_back("Kn: expected " + std::to_string(m.d) + " matrices");
    } else {
      std::vector<ComplexMatrix> kn;
      for (std::size_t c = 0; c < j["Kn"].size(); ++c)
        if (auto a = decode_matrix(j["Kn"][c], "Kn[" + std::to_string(c) + "]", issues, m.n)) kn.push_back(*a);
      m.Kn = std::move(kn);
    }
  }
  if (dims && j.contains("D") && !j["D"].is_null()) {
    if (auto dm = decode_matrix(j["D"], "D", issues, m.n)) m.D = *dm;
  }
  if (j.contains("kraus_sign")) {
    const Json& s = j["kraus_sign"];
    if (!s.is_array()) {
      issues.push_back("kraus_sign: expected an array of +1/-1");
    } else {
      for (const auto& x : s) {
        if (!x.is_number()) {
          issues.push_back("kraus_sign: entries must be numbers");
          break;
        }
        m.kraus_sign.push_back(x.get<double>());
      }
    }
  }
  if (!issues.empty()) throw InputError(ErrorKind::model, detail::join_issues(issues));
  try {
    return resolve_model(std::move(m));
  } catch (const ModelError& e) {
    throw InputError(ErrorKind::model, e.what());
  }
}

inline ModelSpec load_model(const std::string& path) { return model_from_json(read_json(path)); }

/// Resolved model with the derived closures K, Kn and D written out.
inline Json model_to_json(const ModelSpec& model) {
  const ModelSpec m = resolve_model(model);
  Json j;
  j["n"] = m.n;
  j["d"] = m.d;
  j["r"] = m.r;
  j["H"] = encode_matrix(m.H);
  j["L"] = Json::array();
  for (const auto& a : m.L) j["L"].push_back(encode_matrix(a));
  j["Ln"] = Json::array();
  for (const auto& row : m.Ln) {
    Json r = Json::array();
    for (const auto& a : row) r.push_back(encode_matrix(a));
    j["Ln"].push_back(std::move(r));
  }
  j["K"] = encode_matrix(*m.K);
  j["Kn"] = Json::array();
  for (const auto& a : *m.Kn) j["Kn"].push_back(encode_matrix(a));
  j["D"] = encode_matrix(*m.D);
  if (!m.kraus_sign.empty()) j["kraus_sign"] = m.kraus_sign;
  return j;
}

inline ComplexMatrix load_matrix(const std::string& path, int n = 0) {
  std::vector<std::string> issues;
  auto m = decode_matrix(read_json(path), path, issues, n);
  if (!m) throw InputError(ErrorKind::json, detail::join_issues(issues));
  return *m;
}

inline ComplexVector load_vector(const std::string& path, int n = 0) {
  std::vector<std::string> issues;
  auto v = decode_vector(read_json(path), path, issues, n);
  if (!v) throw InputError(ErrorKind::json, detail::join_issues(issues));
  return *v;
}

// ---------------------------------------------------------------- coherent functions

/**
 * @brief {"functions": [{"breakpoints": [...], "values": [[...], ...]}, ...]}.
 *
 * breakpoints[i] is where piece i starts (the first must be 0) and
 * values[i] its constant C^d value; the last piece extends indefinitely.
 */
inline std::vector<CoherentFunction> coherent_from_json(const Json& j, int d) {
  std::vector<std::string> issues;
  if (!j.is_object() || !j.contains("functions") || !j["functions"].is_array() || j["functions"].empty()) {
    throw InputError(ErrorKind::json, "coherent: expected {\"functions\": [...]} with at least one entry");
  }
  std::vector<CoherentFunction> out;
  for (std::size_t k = 0; k < j["functions"].size(); ++k) {
    const Json& f = j["functions"][k];
    const std::string name = "functions[" + std::to_string(k) + "]";
    if (!f.is_object() || !f.contains("breakpoints") || !f.contains("values") || !f["breakpoints"].is_array() ||
        !f["values"].is_array()) {
      issues.push_back(name + ": needs arrays 'breakpoints' and 'values'");
      continue;
    }
    std::vector<double> starts;
    for (const auto& b : f["breakpoints"]) {
      if (!b.is_number()) {
        issues.push_back(name + ".breakpoints: entries must be numbers");
        break;
      }
      starts.push_back(b.get<double>());
    }
    std::vector<ComplexVector> values;
    for (std::size_t i = 0; i < f["values"].size(); ++i) {
      if (auto v = decode_vector(f["values"][i], name + ".values[" + std::to_string(i) + "]", issues, d))
        values.push_back(*v);
    }
    try {
      out.emplace_back(d, std::move(starts), std::move(values));
    } catch (const std::invalid_argument& e) {
      issues.push_back(name + ": " + e.what());
    }
  }
  if (!issues.empty()) throw InputError(ErrorKind::json, detail::join_issues(issues));
  return out;
}

inline std::vector<CoherentFunction> load_coherent(const std::string& path, int d) {
  return coherent_from_json(read_json(path), d);
}

// ---------------------------------------------------------------- CSV

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row_strings(cells);
  }

  /// Leading integer columns followed by numbers.
  void row(const std::vector<long>& ints, const std::vector<double>& values) {
    std::vector<std::string> cells;
    for (long i : ints) cells.push_back(std::to_string(i));
    for (double v : values) cells.push_back(format_double(v));
    row_strings(cells);
  }

  void row_strings(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  const std::string& str() const { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

}  // namespace qsevo
