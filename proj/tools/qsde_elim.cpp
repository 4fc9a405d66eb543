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

// qsde-elim check|eliminate|converge|kurtz --model <path> [options]

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "qsde_elim/commands.hpp"

namespace {

struct Options {
  std::string model;
  std::string config;
  std::string out;
  std::string format;
  std::string ks;
  std::optional<double> horizon;
  std::optional<int> steps;
  std::optional<double> tol;
};

qsde::io::RunConfig make_config(const Options& o) {
  qsde::io::RunConfig cfg;
  if (!o.config.empty()) cfg = qsde::io::load_config(o.config);
  // command-line flags win over the config file
  if (!o.format.empty()) cfg.format = qsde::io::parse_format(o.format);
  if (!o.ks.empty()) cfg.ks = qsde::io::parse_list(o.ks);
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.steps) cfg.steps = *o.steps;
  if (o.tol) cfg.check_tol = *o.tol;
  if (!o.out.empty()) cfg.output = o.out;
  cfg.validate();
  return cfg;
}

int run(const std::string& command, const Options& o) {
  namespace cli = qsde::cli;
  qsde::io::RunConfig cfg;
  qsde::io::ModelFile mf;
  try {
    cfg = make_config(o);
    mf = qsde::io::load_model(o.model);
  } catch (const qsde::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return cli::kExitInput;
  }

  cli::CommandOutput res;
  if (command == "check") res = cli::cmd_check(mf, cfg);
  else if (command == "eliminate") res = cli::cmd_eliminate(mf, cfg);
  else if (command == "converge") res = cli::cmd_converge(mf, cfg);
  else res = cli::cmd_kurtz(mf, cfg);

  for (const auto& m : res.messages) std::cerr << m << "\n";
  if (!res.body.empty()) {
    if (cfg.output) {
      std::ofstream f(*cfg.output, std::ios::binary | std::ios::trunc);
      f << res.body;
      if (!f) {
        std::cerr << "error: cannot write " << *cfg.output << "\n";
        return cli::kExitInput;
      }
    } else {
      std::cout << res.body;
    }
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adiabatic elimination and strong-convergence diagnostics for scaled QSDE models"};
  app.require_subcommand(1);
  Options o;
  const std::pair<const char*, const char*> subs[] = {
      {"check", "verify structural identities of a model"},
      {"eliminate", "write the limit model and derived quantities"},
      {"converge", "distance sweep over coupling strengths k"},
      {"kurtz", "corrected generator residuals and log-log slopes"}};
  for (const auto& [name, about] : subs) {
    CLI::App* sub = app.add_subcommand(name, about);
    sub->add_option("--model", o.model, "model file (JSON)")->required();
    sub->add_option("--config", o.config, "run configuration (JSON)");
    sub->add_option("--out", o.out, "output path (default: stdout)");
    sub->add_option("--format", o.format, "csv or json");
    sub->add_option("--ks", o.ks, "comma-separated coupling strengths");
    sub->add_option("--horizon", o.horizon, "time horizon T");
    sub->add_option("--steps", o.steps, "number of time points in [0, T]");
    sub->add_option("--tol", o.tol, "identity check tolerance");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : qsde::cli::kExitInput;
  }
  return run(app.get_subcommands().front()->get_name(), o);
}
