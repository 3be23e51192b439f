// Copyright 2026 The ActLoc Authors. All Rights Reserved.
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

// actloc: run episodes, seeded suites, ablations and plots.
//
// Exit codes: 0 success, 1 run error, 2 configuration error.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "actloc/harness.hpp"

namespace {

constexpr int kExitRunError = 1;
constexpr int kExitConfigError = 2;

actloc::RunConfig load(const std::string& config_path, const std::string& agents,
                       const std::string& seeds, const std::string& out_dir) {
  actloc::RunConfig cfg = actloc::load_run_config(config_path);
  if (!agents.empty()) {
    cfg.agents.clear();
    std::stringstream ss(agents);
    std::string a;
    while (std::getline(ss, a, ',')) cfg.agents.push_back(actloc::parse_agent_kind(a));
  }
  if (!seeds.empty()) cfg.seeds = actloc::parse_seed_list(seeds);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (const char* env = std::getenv("ACTLOC_OUT_DIR"); env && *env) {
    cfg.output_dir = env;
  }
  return cfg;
}

void print_summary(const actloc::RunConfig& cfg, const actloc::SuiteResult& r) {
  std::cout << actloc::summary_text(cfg, r.summaries);
  for (const auto& f : r.files) std::cout << "wrote " << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active action localization: simulated episodes and evaluation"};
  app.set_version_flag("--version", std::string("actloc ") + actloc::kToolVersion);
  app.require_subcommand(1);

  std::string config, agent, seeds, out_dir, grid, csv, dump_dir;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run one episode and write its log");
  run->add_option("--config", config, "Run config JSON")->required();
  run->add_option("--agent", agent, "ours, random, oracle or template");
  run->add_option("--seed", seed, "Episode seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--dump-frames", dump_dir, "Write every frame as a PGM into this directory");

  auto* suite = app.add_subcommand("suite", "Run every agent over a seed list");
  suite->add_option("--config", config, "Run config JSON")->required();
  suite->add_option("--agent", agent, "Comma-separated agents");
  suite->add_option("--seeds", seeds, "Seed list such as 0..99 or 1,2,3");
  suite->add_option("--out", out_dir, "Output directory");

  auto* ablate = app.add_subcommand("ablate", "Run the full model and each grid variant");
  ablate->add_option("--config", config, "Run config JSON")->required();
  ablate->add_option("--grid", grid, "Ablation grid JSON")->required();
  ablate->add_option("--agent", agent, "Agent to ablate (default: first in config)");
  ablate->add_option("--seeds", seeds, "Seed list");
  ablate->add_option("--out", out_dir, "Output directory");

  auto* plot = app.add_subcommand("plot", "Write SVG plots for a metrics CSV");
  plot->add_option("--in", csv, "Metrics CSV")->required();
  plot->add_option("--out", out_dir, "Output directory (default: next to the CSV)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      actloc::RunConfig cfg = load(config, agent, std::to_string(seed), out_dir);
      cfg.agents.resize(1);
      cfg.frame_dump_dir = dump_dir;
      actloc::SuiteResult r = actloc::run_suite(cfg);
      print_summary(cfg, r);
    } else if (*suite) {
      actloc::RunConfig cfg = load(config, agent, seeds, out_dir);
      print_summary(cfg, actloc::run_suite(cfg));
    } else if (*ablate) {
      actloc::RunConfig cfg = load(config, agent, seeds, out_dir);
      const auto variants = actloc::load_ablation_grid(grid);
      const auto rows = actloc::run_ablation(cfg, variants);
      std::cout << actloc::ablation_csv(cfg, rows);
      std::cout << "wrote " << (std::filesystem::path(cfg.output_dir) / "ablation.csv").string()
                << "\n";
    } else if (*plot) {
      std::filesystem::path dir = out_dir.empty()
                                      ? std::filesystem::path(csv).parent_path()
                                      : std::filesystem::path(out_dir);
      if (const char* env = std::getenv("ACTLOC_OUT_DIR"); env && *env && out_dir.empty()) {
        dir = env;
      }
      if (dir.empty()) dir = ".";
      for (const auto& f : actloc::emit_plots(csv, dir)) {
        std::cout << "wrote " << f.string() << "\n";
      }
    }
  } catch (const actloc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const actloc::ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunError;
  }
  return 0;
}
