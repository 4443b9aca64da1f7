// Copyright 2025 The gtsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "gtsim/runner.hpp"

// Exit codes: 0 success, 1 usage or internal error, 2 invalid config,
// 3 solver finished without converging (outputs are still written).
int main(int argc, char** argv) {
  CLI::App app{"gtsim: deterministic game-theory scenarios from JSON configs to CSV files"};
  app.set_version_flag("--version", gtsim::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "Run a scenario and write its output files");
  run->add_option("config", config_path, "Path to a scenario JSON file")->required();
  run->add_option("--out-dir", out_dir, "Directory for output files, created if missing");
  CLI::Option* seed_option =
      run->add_option("--seed", seed, "Override the config's seed for this run");
  run->add_flag("--quiet", quiet, "Print nothing on success");

  CLI::App* validate =
      app.add_subcommand("validate", "Parse and validate a scenario without running it");
  validate->add_option("config", config_path, "Path to a scenario JSON file")->required();

  CLI::App* version = app.add_subcommand("version", "Print the tool version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : 1;
  }

  try {
    if (version->parsed()) {
      std::printf("%s\n", gtsim::kVersion);
      return 0;
    }

    if (validate->parsed()) {
      const gtsim::ScenarioConfig config = gtsim::load_config(config_path);
      std::printf("ok: kind %s, seed %llu, output prefix \"%s\"\n", config.kind.c_str(),
                  static_cast<unsigned long long>(config.seed), config.output.c_str());
      return 0;
    }

    gtsim::RunOptions options;
    options.out_dir = out_dir;
    if (seed_option->count() > 0) options.seed_override = seed;

    gtsim::ScenarioConfig config = gtsim::load_config(config_path);
    const gtsim::RunReport report = gtsim::run_scenario(std::move(config), options);

    if (!quiet) {
      for (const std::string& line : report.summary) std::printf("%s\n", line.c_str());
      for (const std::string& file : report.files) std::printf("wrote %s\n", file.c_str());
      std::printf("done in %.3fs\n", report.duration_seconds);
    }
    if (!report.converged) {
      std::fprintf(stderr, "gtsim: solver stopped before reaching tolerance; "
                           "outputs carry the bounds it achieved\n");
      return 3;
    }
    return 0;
  } catch (const gtsim::ConfigError& error) {
    std::fprintf(stderr, "gtsim: invalid config: %s\n", error.what());
    return 2;
  } catch (const std::exception& error) {
    std::fprintf(stderr, "gtsim: %s\n", error.what());
    return 1;
  }
}
