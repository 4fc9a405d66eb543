// Copyright 2026 The qsde-elim Authors
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

// Model and run-configuration files (JSON, schema_version 1).
// Complex entries are [re, im] pairs, matrices are arrays of rows.

#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qsde_elim/catalog.hpp"
#include "qsde_elim/eliminate.hpp"
#include "qsde_elim/model.hpp"
#include "qsde_elim/semigroup.hpp"

namespace qsde::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent input file. The message names the field
/// (as a JSON pointer) or the line/column of a syntax error.
class ParseError : public Error {
 public:
  using Error::Error;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw ParseError((path.empty() ? std::string("/") : path) + ": " + msg);
}

inline void require_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!ok.count(item.key())) fail(path + "/" + item.key(), "unknown field");
  }
}

inline double read_real(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "non-finite value");
  return v;
}

inline long long read_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long long>();
}

/// A complex number: [re, im] or a bare real.
inline cplx read_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {read_real(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) fail(path, "expected [re, im]");
  return {read_real(j[0], path + "/0"), read_real(j[1], path + "/1")};
}

inline Operator read_matrix(const json& j, const std::string& path,
                            std::optional<Eigen::Index> dim = std::nullopt) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (dim && rows != *dim) {
    std::ostringstream os;
    os << "matrix has " << rows << " rows, dim is " << *dim;
    fail(path, os.str());
  }
  Operator m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    const std::string rp = path + "/" + std::to_string(r);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      std::ostringstream os;
      os << "row must have " << rows << " entries";
      fail(rp, os.str());
    }
    for (Eigen::Index c = 0; c < rows; ++c) {
      const json& e = row[static_cast<std::size_t>(c)];
      const std::string ep = rp + "/" + std::to_string(c);
      if (!e.is_array() || e.size() != 2) fail(ep, "expected [re, im]");
      m(r, c) = read_complex(e, ep);
    }
  }
  return m;
}

inline std::vector<Operator> read_matrix_list(const json& j, const std::string& path,
                                              std::size_t n, Eigen::Index dim) {
  if (!j.is_array() || j.size() != n) {
    fail(path, "expected " + std::to_string(n) + " matrices (one per channel)");
  }
  std::vector<Operator> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(read_matrix(j[i], path + "/" + std::to_string(i), dim));
  return out;
}

inline const json& need(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) fail(path + "/" + key, "missing field");
  return obj.at(key);
}

}  // namespace detail

inline json write_complex(cplx z) { return json::array({z.real(), z.imag()}); }

inline json write_matrix(const Operator& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(write_complex(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Model files

struct ModelFile {
  int schema_version = kSchemaVersion;
  std::optional<catalog::ExampleSpec> builtin;
  std::optional<ScaledModel> explicit_model;
  std::optional<Operator> y1inv;

  ScaledModel model() const { return builtin ? catalog::build(*builtin) : *explicit_model; }
  std::string label() const { return builtin ? catalog::name_of(*builtin) : "explicit"; }
};

namespace detail {

inline catalog::ExampleSpec read_builtin(const json& b) {
  require_keys(b, "/builtin", {"name", "parameters"});
  const json& name_j = need(b, "name", "/builtin");
  if (!name_j.is_string()) fail("/builtin/name", "expected a string");
  const std::string name = name_j.get<std::string>();
  const json params = b.contains("parameters") ? b.at("parameters") : json::object();
  const std::string pp = "/builtin/parameters";
  auto real_or = [&](const char* key, double fallback) {
    return params.contains(key) ? read_real(params.at(key), pp + "/" + key) : fallback;
  };
  auto cplx_or = [&](const char* key, cplx fallback) {
    return params.contains(key) ? read_complex(params.at(key), pp + "/" + key) : fallback;
  };
  auto levels_or = [&](const char* key, Eigen::Index fallback) {
    if (!params.contains(key)) return fallback;
    const long long n = read_int(params.at(key), pp + "/" + key);
    if (n < 2) fail(pp + "/" + key, "need at least 2 levels");
    return static_cast<Eigen::Index>(n);
  };

  if (name == "two_level") {
    require_keys(params, pp, {"delta", "gamma", "alpha"});
    catalog::TwoLevelParams p;
    p.delta = real_or("delta", p.delta);
    p.gamma = real_or("gamma", p.gamma);
    p.alpha = cplx_or("alpha", p.alpha);
    return p;
  }
  if (name == "alkali") {
    require_keys(params, pp, {"delta", "gamma", "B"});
    catalog::AlkaliParams p;
    p.delta = real_or("delta", p.delta);
    p.gamma = real_or("gamma", p.gamma);
    if (params.contains("B")) {
      const json& bj = params.at("B");
      if (!bj.is_array() || bj.size() != 3) fail(pp + "/B", "expected [Bx, By, Bz]");
      p.bx = read_real(bj[0], pp + "/B/0");
      p.by = read_real(bj[1], pp + "/B/1");
      p.bz = read_real(bj[2], pp + "/B/2");
    }
    return p;
  }
  if (name == "cavity_system") {
    require_keys(params, pp, {"gamma", "N", "E00", "E01", "E10", "E11"});
    catalog::CavityParams p = catalog::CavityParams::default_instance();
    p.gamma = real_or("gamma", p.gamma);
    p.N = levels_or("N", p.N);
    if (params.contains("E00")) p.e00 = read_matrix(params.at("E00"), pp + "/E00");
    if (params.contains("E01")) p.e01 = read_matrix(params.at("E01"), pp + "/E01");
    if (params.contains("E10")) p.e10 = read_matrix(params.at("E10"), pp + "/E10");
    if (params.contains("E11")) p.e11 = read_matrix(params.at("E11"), pp + "/E11");
    return p;
  }
  if (name == "lambda_system") {
    require_keys(params, pp, {"gamma", "g", "alpha", "N"});
    catalog::LambdaParams p;
    p.gamma = real_or("gamma", p.gamma);
    p.g = real_or("g", p.g);
    p.alpha = cplx_or("alpha", p.alpha);
    p.N = levels_or("N", p.N);
    return p;
  }
  fail("/builtin/name", "unknown model '" + name +
                            "' (two_level, alkali, cavity_system, lambda_system)");
}

inline ScaledModel read_explicit(const json& e) {
  const std::string p = "/explicit";
  require_keys(e, p, {"dim", "channels", "Y", "A", "B", "F", "G", "W"});
  ScaledModel m;
  const long long dim = read_int(need(e, "dim", p), p + "/dim");
  const long long channels = read_int(need(e, "channels", p), p + "/channels");
  if (dim < 1) fail(p + "/dim", "must be >= 1");
  if (channels < 0) fail(p + "/channels", "must be >= 0");
  m.dim = static_cast<Eigen::Index>(dim);
  m.channels = static_cast<std::size_t>(channels);
  m.Y = read_matrix(need(e, "Y", p), p + "/Y", m.dim);
  m.A = read_matrix(need(e, "A", p), p + "/A", m.dim);
  m.B = read_matrix(need(e, "B", p), p + "/B", m.dim);
  m.F = read_matrix_list(need(e, "F", p), p + "/F", m.channels, m.dim);
  m.G = read_matrix_list(need(e, "G", p), p + "/G", m.channels, m.dim);
  const json& w = need(e, "W", p);
  if (!w.is_array() || w.size() != m.channels) {
    fail(p + "/W", "expected " + std::to_string(m.channels) + " rows of matrices");
  }
  m.W = OperatorGrid(m.channels, m.dim);
  for (std::size_t i = 0; i < m.channels; ++i) {
    const std::vector<Operator> row =
        read_matrix_list(w[i], p + "/W/" + std::to_string(i), m.channels, m.dim);
    for (std::size_t j = 0; j < m.channels; ++j) m.W(i, j) = row[j];
  }
  m.validate();
  return m;
}

inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("syntax error: ") + err.what());
  }
}

}  // namespace detail

/// Parses a model file. "derived" is a reserved top-level key (written by
/// the eliminate command) and is ignored on input.
inline ModelFile parse_model(const std::string& text) {
  const json root = detail::parse_text(text);
  detail::require_keys(root, "", {"schema_version", "builtin", "explicit", "Y1inv", "derived"});
  ModelFile mf;
  const long long ver = detail::read_int(detail::need(root, "schema_version", ""), "/schema_version");
  if (ver != kSchemaVersion) detail::fail("/schema_version", "unsupported version " + std::to_string(ver));
  const bool has_b = root.contains("builtin");
  const bool has_e = root.contains("explicit");
  if (has_b == has_e) detail::fail("", "exactly one of 'builtin' and 'explicit' is required");
  try {
    if (has_b) {
      mf.builtin = detail::read_builtin(root.at("builtin"));
      (void)catalog::build(*mf.builtin);  // parameter validation
    } else {
      mf.explicit_model = detail::read_explicit(root.at("explicit"));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& err) {
    throw ParseError(std::string(has_b ? "/builtin" : "/explicit") + ": " + err.what());
  }
  if (root.contains("Y1inv")) {
    const Eigen::Index d = mf.model().dim;
    mf.y1inv = detail::read_matrix(root.at("Y1inv"), "/Y1inv", d);
  }
  return mf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline ModelFile load_model(const std::string& path) { return parse_model(read_file(path)); }

/// The explicit encoding of a scaled model.
inline json model_to_json(const ScaledModel& m) {
  json e = json::object();
  e["dim"] = m.dim;
  e["channels"] = m.channels;
  e["Y"] = write_matrix(m.Y);
  e["A"] = write_matrix(m.A);
  e["B"] = write_matrix(m.B);
  json f = json::array(), g = json::array(), w = json::array();
  for (std::size_t i = 0; i < m.channels; ++i) {
    f.push_back(write_matrix(m.F[i]));
    g.push_back(write_matrix(m.G[i]));
    json row = json::array();
    for (std::size_t j = 0; j < m.channels; ++j) row.push_back(write_matrix(m.W(i, j)));
    w.push_back(std::move(row));
  }
  e["F"] = std::move(f);
  e["G"] = std::move(g);
  e["W"] = std::move(w);
  return e;
}

/// A coefficient set written as a k-independent model: Y = A = F = 0,
/// B = K, G_i = L_i, W_ij = S_ij.
inline ScaledModel as_constant_model(const CoefficientSet& c) {
  ScaledModel m;
  m.dim = c.dim;
  m.channels = c.channels;
  m.Y = m.A = zero(c.dim);
  m.B = c.K;
  m.F.assign(c.channels, zero(c.dim));
  m.G = c.L;
  m.W = c.S;
  return m;
}

// ---------------------------------------------------------------------------
// Run configuration

enum class Format { csv, json };

struct RunConfig {
  double rank_tol = kDefaultRankTol;
  double check_tol = kDefaultCheckTol;
  std::optional<std::vector<double>> ks;
  double horizon = 1.0;
  int steps = 101;
  std::optional<StepDrive> drive;
  long long seed = 0;
  std::optional<std::string> output;
  Format format = Format::json;

  void validate() const {
    if (!(rank_tol > 0)) throw ParseError("/rank_tol: must be > 0");
    if (!(check_tol > 0)) throw ParseError("/check_tol: must be > 0");
    if (!(horizon > 0) || !std::isfinite(horizon)) throw ParseError("/horizon: must be > 0");
    if (steps < 2) throw ParseError("/steps: need at least 2 time points");
    if (ks) {
      if (ks->empty()) throw ParseError("/ks: must be non-empty");
      for (std::size_t i = 0; i < ks->size(); ++i) {
        if (!((*ks)[i] >= 0) || !std::isfinite((*ks)[i])) throw ParseError("/ks: entries must be >= 0");
        if (i > 0 && !((*ks)[i] > (*ks)[i - 1])) throw ParseError("/ks: must be increasing");
      }
    }
  }
};

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ParseError("/format: expected csv or json, got '" + s + "'");
}

inline RunConfig parse_config(const std::string& text) {
  using detail::fail;
  const json root = detail::parse_text(text);
  detail::require_keys(root, "", {"rank_tol", "check_tol", "ks", "horizon", "steps", "drive",
                                  "seed", "output", "format"});
  RunConfig c;
  if (root.contains("rank_tol")) c.rank_tol = detail::read_real(root["rank_tol"], "/rank_tol");
  if (root.contains("check_tol")) c.check_tol = detail::read_real(root["check_tol"], "/check_tol");
  if (root.contains("horizon")) c.horizon = detail::read_real(root["horizon"], "/horizon");
  if (root.contains("steps")) c.steps = static_cast<int>(detail::read_int(root["steps"], "/steps"));
  if (root.contains("seed")) c.seed = detail::read_int(root["seed"], "/seed");
  if (root.contains("ks")) {
    const json& ks = root["ks"];
    if (!ks.is_array()) fail("/ks", "expected an array");
    c.ks.emplace();
    for (std::size_t i = 0; i < ks.size(); ++i) c.ks->push_back(detail::read_real(ks[i], "/ks/" + std::to_string(i)));
  }
  if (root.contains("output")) {
    if (!root["output"].is_string()) fail("/output", "expected a string");
    c.output = root["output"].get<std::string>();
  }
  if (root.contains("format")) {
    if (!root["format"].is_string()) fail("/format", "expected a string");
    c.format = parse_format(root["format"].get<std::string>());
  }
  if (root.contains("drive")) {
    const json& d = root["drive"];
    detail::require_keys(d, "/drive", {"breakpoints", "amplitudes"});
    const json& bp = detail::need(d, "breakpoints", "/drive");
    const json& am = detail::need(d, "amplitudes", "/drive");
    if (!bp.is_array()) fail("/drive/breakpoints", "expected an array");
    if (!am.is_array()) fail("/drive/amplitudes", "expected an array of per-segment amplitudes");
    StepDrive drive;
    for (std::size_t i = 0; i < bp.size(); ++i) {
      drive.breakpoints.push_back(detail::read_real(bp[i], "/drive/breakpoints/" + std::to_string(i)));
    }
    for (std::size_t s = 0; s < am.size(); ++s) {
      const std::string sp = "/drive/amplitudes/" + std::to_string(s);
      if (!am[s].is_array()) fail(sp, "expected one complex value per channel");
      std::vector<cplx> vals;
      for (std::size_t i = 0; i < am[s].size(); ++i) vals.push_back(detail::read_complex(am[s][i], sp + "/" + std::to_string(i)));
      drive.amplitudes.emplace_back(std::move(vals));
    }
    c.drive = std::move(drive);
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

/// "1,2,5" -> {1, 2, 5}
inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ParseError("--ks: cannot parse '" + item + "'");
    }
    if (used != item.size()) throw ParseError("--ks: cannot parse '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace qsde::io
