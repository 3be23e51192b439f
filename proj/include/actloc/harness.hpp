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

// Episode loop, run configuration and result files.
//
// One step of an episode:
//   render -> agent localizes -> control error -> PD -> actuator -> world step
// and the observed frame is scored with the tracking quality, angular error
// and (when the action is in view) AUC-Judd of the agent's saliency map.

#ifndef ACTLOC_HARNESS_HPP_
#define ACTLOC_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "actloc/baselines.hpp"
#include "actloc/control.hpp"
#include "actloc/metrics.hpp"
#include "actloc/perception.hpp"
#include "actloc/world.hpp"

namespace actloc {

/// Invalid configuration; the CLI maps it to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kToolVersion = ACTLOC_VERSION;

enum class AgentKind { kOurs, kRandom, kOracle, kTemplate };

const char* to_string(AgentKind kind);
AgentKind parse_agent_kind(const std::string& name);

struct RunConfig {
  std::string scenario_path;
  Scenario scenario;  ///< loaded from scenario_path
  std::string scenario_digest;  ///< FNV-1a of the scenario file bytes
  std::vector<AgentKind> agents{AgentKind::kOurs};
  std::vector<std::uint64_t> seeds{0};
  int max_steps = 500;
  int loss_termination_window = 10;
  ControllerGains gains;
  PerceptionConfig perception;
  TrackingQualityParams metric;
  double random_spread = deg_to_rad(30.0);
  TemplateOptions templ;
  double saliency_sigma_px = 8.0;
  std::string output_dir = "out";
  bool write_step_logs = true;
  /// Debug only, not part of the canonical config: when set, every observed
  /// frame is written there as ep<seed>_t<step>.pgm.
  std::string frame_dump_dir;
};

/// Canonical JSON of a config (sorted keys, radians shown as degrees).
std::string config_to_json(const RunConfig& cfg);
/// Parses a config document. Relative scenario paths resolve against
/// `base_dir` when they do not exist relative to the working directory.
RunConfig parse_run_config(const std::string& text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
/// Sets one dotted key ("gains.lambda_d") and re-validates. Unknown keys
/// raise ConfigError.
RunConfig with_override(const RunConfig& cfg, const std::string& key,
                        const std::string& json_value);
/// 16 hex digits of FNV-1a over the canonical JSON.
std::string config_hash(const RunConfig& cfg);

/// Parses "0..99", "3" or "1,4,7".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

struct AgentOutput {
  std::optional<Bearing> bearing;   ///< camera-relative; empty = hold
  std::optional<double> distance;   ///< follower mode
  Tensor saliency;                  ///< [N,N] map at frame resolution
  double loss_global = 0.0;
  double loss_attn = 0.0;
  double confidence = 1.0;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  /// `gt` is only read by the oracle.
  virtual AgentOutput act(const ObservationFrame& frame, const GroundTruth& gt) = 0;
};

std::unique_ptr<Agent> make_agent(AgentKind kind, const RunConfig& cfg,
                                  const Scenario& scenario, std::uint64_t seed);

/// Distance to a ground point seen at `tilt` below the horizon, clamped to
/// [1, 4 * ideal]; a non-negative tilt reports the ideal distance.
double distance_from_tilt(double tilt, double camera_height, double ideal);

struct EpisodeLog {
  std::string header;              ///< one JSON line
  std::vector<std::string> steps;  ///< one JSON line each
  std::string str() const;
};

struct EpisodeResult {
  EpisodeLog log;
  EpisodeMetrics metrics;
  std::vector<StepRecord> records;
  std::string agent;
  std::uint64_t seed = 0;
};

EpisodeResult run_episode(const RunConfig& cfg, AgentKind kind, std::uint64_t seed);
/// Same loop with a caller-supplied agent, used for scripted agents.
EpisodeResult run_episode_with(const RunConfig& cfg, Agent& agent,
                               std::uint64_t seed);

struct SuiteSummary {
  std::string agent;
  std::size_t episodes = 0;
  MeanStd recall, precision, precision_relaxed, aae_deg, auc_judd, steps;
};

SuiteSummary summarize(const std::string& agent,
                       const std::vector<EpisodeResult>& results);

struct SuiteResult {
  std::vector<std::vector<EpisodeResult>> per_agent;
  std::vector<SuiteSummary> summaries;
  std::vector<std::filesystem::path> files;
};

/// CSV text for one agent: a "# actloc ..." comment line, the header, then
/// one row per episode.
std::string metrics_csv(const RunConfig& cfg, const std::string& agent,
                        const std::vector<EpisodeResult>& results);
std::string summary_text(const RunConfig& cfg, const std::vector<SuiteSummary>& s);

/// Runs every agent on every seed. With `write_files`, writes
/// metrics_<agent>.csv, summary.txt and per-episode JSONL into output_dir.
/// Rows already finished are flushed when a later episode throws.
SuiteResult run_suite(const RunConfig& cfg, bool write_files = true,
                      const std::function<void(const EpisodeResult&)>& on_episode = {});

struct AblationVariant {
  std::string name;
  std::vector<std::pair<std::string, std::string>> overrides;  ///< key, JSON
};

std::vector<AblationVariant> parse_ablation_grid(const std::string& text);
std::vector<AblationVariant> load_ablation_grid(const std::filesystem::path& path);

struct AblationRow {
  std::string variant;
  SuiteSummary summary;
  std::vector<EpisodeResult> episodes;
};

/// The full model first, then one row per variant, all on cfg.seeds and the
/// first agent of cfg. Every override is validated before any episode runs.
std::vector<AblationRow> run_ablation(const RunConfig& cfg,
                                      const std::vector<AblationVariant>& grid,
                                      bool write_files = true);
std::string ablation_csv(const RunConfig& cfg, const std::vector<AblationRow>& rows);

/// Writes SVG plots for a metrics CSV. A single-row CSV yields one gamma
/// trace read from the matching episode log next to the CSV; more rows yield
/// one bar chart per metric. Returns the written files.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& csv,
                                              const std::filesystem::path& out_dir);

}  // namespace actloc

#endif  // ACTLOC_HARNESS_HPP_
