// Copyright 2026 The LCA Lab Authors
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

// Command-line driver: `lca_cli <mode> --config <file> [--out <dir>]
// [--seed <u64>]`. Exit codes: 0 success, 1 model error, 2 usage or config
// error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lca/errors.hpp"
#include "lca/harness/config.hpp"
#include "lca/harness/modes.hpp"

namespace lca::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitModel = 1;
inline constexpr int kExitConfig = 2;

struct CliRequest {
  Mode mode = Mode::Simulate;
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

// Loads the config, applies the command-line overrides, runs the mode and
// writes its tables into the output directory.
inline int execute(const CliRequest& req, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg;
  try {
    cfg = load_config(req.config);
    if (cfg.mode != req.mode)
      throw ConfigError("mode", std::string("config is for '") + to_string(cfg.mode) + "' but the subcommand is '" +
                                    to_string(req.mode) + "'");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (req.out) cfg.out = *req.out;
  if (req.seed) cfg.seed = *req.seed;

  try {
    const ModeOutput result = run_mode(cfg);
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    for (const auto& [name, table] : result.tables) table.write(dir / name);
    for (const auto& line : result.report) out << "  " << line << '\n';
    out << result.summary << " -> " << dir.string() << '\n';
  } catch (const lca::Error& e) {
    err << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitModel;
  }
  return kExitOk;
}

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Layered control architecture toolkit"};
  app.require_subcommand(1);
  CliRequest req;
  std::string out_dir;
  std::uint64_t seed = 0;
  for (Mode m : {Mode::Simulate, Mode::Pareto, Mode::Sensorimotor, Mode::Bode}) {
    auto* sub = app.add_subcommand(to_string(m));
    sub->add_option("--config", req.config, "scenario JSON file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->callback([&req, m] { req.mode = m; });
  }
  // CLI11 consumes the argument vector from the back.
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitConfig;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--out")) req.out = out_dir;
    if (sub->count("--seed")) req.seed = seed;
  }
  return execute(req, out, err);
}

}  // namespace lca::harness
