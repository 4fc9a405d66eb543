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

// The four qsde-elim subcommands. Each returns the exit code, the report
// body and diagnostics for stderr; the caller owns all file I/O.
//
// exit 0: success (check/eliminate: every identity holds)
// exit 1: malformed input or a computation that could not be carried out
// exit 2: an assumption identity fails, or Y cannot be inverted on range(P1)

#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "qsde_elim/io.hpp"

namespace qsde::cli {

using io::Format;
using io::json;
using io::ModelFile;
using io::RunConfig;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitAssumption = 2;

struct CommandOutput {
  int exit_code = kExitOk;
  std::string body;
  std::vector<std::string> messages;
};

inline const std::vector<double>& default_converge_ks() {
  static const std::vector<double> ks{1, 2, 5, 10, 20, 50, 100};
  return ks;
}

inline const std::vector<double>& default_kurtz_ks() {
  static const std::vector<double> ks{10, 30, 100, 300};
  return ks;
}

namespace detail {

/// 17 significant digits, enough to round-trip a double.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string singular_message(const SingularRestriction& err) {
  return std::string("error: ") + err.what() +
         "\nY is not invertible on range(P1); supply an explicit inverse in the model file's "
         "top-level \"Y1inv\" field (it is then verified against every required identity)";
}

struct Section {
  std::string name;
  CheckReport report;
};

inline json section_json(const Section& s) {
  json residuals = json::array();
  for (const auto& r : s.report.residuals) {
    residuals.push_back({{"identity", r.name},
                         {"residual", r.value},
                         {"passed", r.value <= s.report.tolerance}});
  }
  return {{"name", s.name},
          {"passed", s.report.passed},
          {"tolerance", s.report.tolerance},
          {"residuals", std::move(residuals)},
          {"notes", s.report.notes}};
}

inline std::string sections_csv(const std::vector<Section>& sections) {
  std::string out = "section,identity,residual,tolerance,passed\n";
  for (const auto& s : sections) {
    for (const auto& r : s.report.residuals) {
      out += s.name + ",\"" + r.name + "\"," + num(r.value) + "," + num(s.report.tolerance) + "," +
             (r.value <= s.report.tolerance ? "true" : "false") + "\n";
    }
  }
  return out;
}

struct Checked {
  ScaledModel model;
  EliminationResult elim;
  std::vector<Section> sections;
  bool passed = true;
};

inline Checked run_checks(const ModelFile& mf, const RunConfig& cfg) {
  ScaledModel m = mf.model();
  EliminationResult e = eliminate(m, cfg.rank_tol, cfg.check_tol, mf.y1inv);
  Checked c{std::move(m), std::move(e), {}, true};
  c.sections.push_back({"assumption1.scaling", check_scaling_consistency(c.model, cfg.check_tol)});
  c.sections.push_back({"assumption1.channels", check_channel_unitarity(c.model, cfg.check_tol)});
  c.sections.push_back({"assumption3", c.elim.assumption3});
  c.sections.push_back({"assumption4", c.elim.assumption4});
  c.sections.push_back({"lemma", c.elim.lemma});
  for (const auto& s : c.sections) c.passed = c.passed && s.report.passed;
  return c;
}

inline void fail_messages(const Checked& c, CommandOutput& out) {
  for (const auto& s : c.sections) {
    for (const auto& r : s.report.residuals) {
      if (!(r.value <= s.report.tolerance)) {
        out.messages.push_back("fail: [" + s.name + "] " + r.name + " residual " + num(r.value) +
                               " > " + num(s.report.tolerance));
      }
    }
  }
  for (const auto& n : c.elim.notes) out.messages.push_back("note: " + n);
}

/// Runs `body`, mapping library errors onto the exit-code contract.
template <class F>
CommandOutput guarded(F&& body) {
  try {
    return body();
  } catch (const SingularRestriction& err) {
    return {kExitAssumption, "", {singular_message(err)}};
  } catch (const io::ParseError& err) {
    return {kExitInput, "", {std::string("error: ") + err.what()}};
  } catch (const Error& err) {
    return {kExitInput, "", {std::string("error: ") + err.what()}};
  }
}

}  // namespace detail

inline CommandOutput cmd_check(const ModelFile& mf, const RunConfig& cfg) {
  return detail::guarded([&] {
    const detail::Checked c = detail::run_checks(mf, cfg);
    CommandOutput out;
    out.exit_code = c.passed ? kExitOk : kExitAssumption;
    detail::fail_messages(c, out);
    if (cfg.format == Format::csv) {
      out.body = detail::sections_csv(c.sections);
    } else {
      json secs = json::array();
      for (const auto& s : c.sections) secs.push_back(detail::section_json(s));
      json root = {{"command", "check"},
                   {"model", mf.label()},
                   {"passed", c.passed},
                   {"sections", std::move(secs)},
                   {"notes", c.elim.notes}};
      out.body = root.dump(2) + "\n";
    }
    return out;
  });
}

/// Writes the limit as an explicit model file; P0, Y1inv and the check
/// reports go under the reserved "derived" key.
inline CommandOutput cmd_eliminate(const ModelFile& mf, const RunConfig& cfg) {
  return detail::guarded([&] {
    if (cfg.format != Format::json) {
      throw io::ParseError("/format: eliminate writes a model file, only json is supported");
    }
    const detail::Checked c = detail::run_checks(mf, cfg);
    CommandOutput out;
    out.exit_code = c.passed ? kExitOk : kExitAssumption;
    detail::fail_messages(c, out);
    json checks = json::array();
    for (const auto& s : c.sections) checks.push_back(detail::section_json(s));
    json root = {{"schema_version", io::kSchemaVersion},
                 {"explicit", io::model_to_json(io::as_constant_model(c.elim.limit))},
                 {"derived",
                  {{"source", mf.label()},
                   {"P0", io::write_matrix(c.elim.decomposition.P0.op())},
                   {"Y1inv", io::write_matrix(c.elim.decomposition.Y1inv)},
                   {"passed", c.passed},
                   {"checks", std::move(checks)},
                   {"notes", c.elim.notes}}}};
    out.body = root.dump(2) + "\n";
    return out;
  });
}

inline CommandOutput cmd_converge(const ModelFile& mf, const RunConfig& cfg) {
  return detail::guarded([&] {
    cfg.validate();
    const ScaledModel m = mf.model();
    const EliminationResult e = eliminate(m, cfg.rank_tol, cfg.check_tol, mf.y1inv);
    CommandOutput out;
    if (!e.assumptions_hold()) {
      out.messages.push_back("warning: assumptions 3-4 do not hold; distances are reported anyway");
    }
    const std::vector<double>& ks = cfg.ks ? *cfg.ks : default_converge_ks();
    const StateVector v = default_ground_vector(e.decomposition.P0);
    const ConvergenceReport rep = k_sweep(m, e, v, ks, cfg.horizon, cfg.steps, cfg.drive);
    const char* mode = cfg.drive ? "coherent" : "vacuum";

    if (cfg.format == Format::csv) {
      std::string s = "k,t,distance\n";
      for (std::size_t a = 0; a < rep.ks.size(); ++a) {
        for (std::size_t b = 0; b < rep.t_grid.size(); ++b) {
          s += detail::num(rep.ks[a]) + "," + detail::num(rep.t_grid[b]) + "," +
               detail::num(rep.distances[a][b]) + "\n";
        }
      }
      s += "\nk,sup_distance\n";
      for (std::size_t a = 0; a < rep.ks.size(); ++a) {
        s += detail::num(rep.ks[a]) + "," + detail::num(rep.sup_distance[a]) + "\n";
      }
      out.body = std::move(s);
    } else {
      json root = {{"command", "converge"},
                   {"model", mf.label()},
                   {"mode", mode},
                   {"seed", cfg.seed},
                   {"ks", rep.ks},
                   {"t", rep.t_grid},
                   {"distance", rep.distances},
                   {"sup_distance", rep.sup_distance},
                   {"max_clamp", rep.max_clamp}};
      out.body = root.dump(2) + "\n";
    }
    return out;
  });
}

/// Observables for the corrector diagnostic: P0 first, then the matrix
/// units u_a u_b^dag over an orthonormal basis of the ground space.
inline std::vector<std::pair<std::string, Operator>> kurtz_observables(const Projector& p0) {
  std::vector<std::pair<std::string, Operator>> xs{{"P0", p0.op()}};
  const Operator basis = p0.range_basis();
  for (Eigen::Index a = 0; a < basis.cols(); ++a) {
    for (Eigen::Index b = 0; b < basis.cols(); ++b) {
      xs.push_back({"E" + std::to_string(a + 1) + std::to_string(b + 1),
                    basis.col(a) * basis.col(b).adjoint()});
    }
  }
  return xs;
}

inline CommandOutput cmd_kurtz(const ModelFile& mf, const RunConfig& cfg) {
  return detail::guarded([&] {
    cfg.validate();
    const ScaledModel m = mf.model();
    const EliminationResult e = eliminate(m, cfg.rank_tol, cfg.check_tol, mf.y1inv);
    CommandOutput out;
    if (!e.assumptions_hold()) {
      out.messages.push_back("warning: assumptions 3-4 do not hold; residuals are reported anyway");
    }
    const std::vector<double>& ks = cfg.ks ? *cfg.ks : default_kurtz_ks();
    struct Row {
      std::string label;
      std::vector<GeneratorResidual> res;
      double slope;
      double slope_uncorrected;
    };
    std::vector<Row> rows;
    for (const auto& [label, x] : kurtz_observables(e.decomposition.P0)) {
      Row r{label, generator_convergence_check(m, e, x, ks), 0.0, 0.0};
      std::vector<double> c, u;
      for (const auto& g : r.res) {
        c.push_back(g.corrected);
        u.push_back(g.uncorrected);
      }
      r.slope = loglog_slope(ks, c);
      r.slope_uncorrected = loglog_slope(ks, u);
      rows.push_back(std::move(r));
    }

    if (cfg.format == Format::csv) {
      std::string s = "X,k,corrected,uncorrected\n";
      for (const auto& r : rows) {
        for (const auto& g : r.res) {
          s += r.label + "," + detail::num(g.k) + "," + detail::num(g.corrected) + "," +
               detail::num(g.uncorrected) + "\n";
        }
      }
      s += "\nX,corrected_slope,uncorrected_slope\n";
      for (const auto& r : rows) {
        s += r.label + "," + detail::num(r.slope) + "," + detail::num(r.slope_uncorrected) + "\n";
      }
      out.body = std::move(s);
    } else {
      json obs = json::array();
      for (const auto& r : rows) {
        json res = json::array();
        for (const auto& g : r.res) {
          res.push_back({{"k", g.k}, {"corrected", g.corrected}, {"uncorrected", g.uncorrected}});
        }
        // NaN slopes (zero residuals) are written as null
        obs.push_back({{"X", r.label},
                       {"residuals", std::move(res)},
                       {"corrected_slope", std::isfinite(r.slope) ? json(r.slope) : json(nullptr)},
                       {"uncorrected_slope", std::isfinite(r.slope_uncorrected)
                                                 ? json(r.slope_uncorrected)
                                                 : json(nullptr)}});
      }
      json root = {{"command", "kurtz"}, {"model", mf.label()}, {"observables", std::move(obs)}};
      out.body = root.dump(2) + "\n";
    }
    return out;
  });
}

}  // namespace qsde::cli
