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

#include "actloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "actloc/seeding.hpp"
#include "json.hpp"

namespace actloc {
namespace {

using ojson = nlohmann::ordered_json;

constexpr std::uint64_t kParamStream = 0x706172616d73ULL;

Tensor point_saliency(const RunConfig& cfg, const ObservationFrame& frame,
                      const std::optional<Bearing>& b) {
  const std::size_t n = frame.image.dim(2);
  if (!b) return Tensor(Shape{n, n}, 0.0);
  return gaussian_saliency(n, bearing_to_pixel(*b, n, frame.camera.fov),
                           cfg.saliency_sigma_px);
}

class OursAgent : public Agent {
 public:
  OursAgent(const RunConfig& cfg, const Scenario& s, std::uint64_t seed)
      : perception_(cfg.perception, mix_seed(seed, kParamStream)),
        height_(s.camera.height),
        ideal_(s.ideal_distance) {}
  std::string name() const override { return "ours"; }
  AgentOutput act(const ObservationFrame& frame, const GroundTruth&) override {
    const PerceptOutput p = perception_.perceive(frame);
    AgentOutput out;
    out.bearing = p.action_bearing;
    out.distance = distance_from_tilt(p.action_bearing.tilt, height_, ideal_);
    const std::size_t factor = frame.image.dim(2) / p.error_map.raw.dim(1);
    out.saliency = upsample_nearest(p.error_map.raw, factor);
    out.loss_global = p.loss_global;
    out.loss_attn = p.loss_attn;
    return out;
  }

 private:
  Perception perception_;
  double height_;
  double ideal_;
};

class RandomAgent : public Agent {
 public:
  RandomAgent(const RunConfig& cfg, const Scenario& s, std::uint64_t seed)
      : cfg_(cfg), scenario_(s), rng_(seed) {}
  std::string name() const override { return "random"; }
  AgentOutput act(const ObservationFrame& frame, const GroundTruth&) override {
    AgentOutput out;
    Bearing centre;
    if (scenario_.mode == ScenarioMode::kPanTilt) {
      // Around the scene centre, expressed relative to the camera.
      centre = Bearing{-frame.camera.orientation.pan, -frame.camera.orientation.tilt};
    } else {
      centre = Bearing{0.0, -std::atan2(scenario_.camera.height, scenario_.ideal_distance)};
    }
    const Bearing b = random_bearing(rng_, cfg_.random_spread, centre);
    out.bearing = b;
    out.distance = distance_from_tilt(b.tilt, scenario_.camera.height,
                                      scenario_.ideal_distance);
    out.saliency = point_saliency(cfg_, frame, b);
    return out;
  }

 private:
  const RunConfig& cfg_;
  const Scenario scenario_;
  std::mt19937_64 rng_;
};

class OracleAgent : public Agent {
 public:
  OracleAgent(const RunConfig& cfg, const Scenario& s) : cfg_(cfg), scenario_(s) {}
  std::string name() const override { return "oracle"; }
  AgentOutput act(const ObservationFrame& frame, const GroundTruth& gt) override {
    AgentOutput out;
    if (gt.actor < 0) {
      out.saliency = point_saliency(cfg_, frame, std::nullopt);
      return out;
    }
    out.bearing = oracle_bearing(gt);
    out.distance = scenario_.mode == ScenarioMode::kFollower ? gt.offset.rho : 0.0;
    out.saliency = point_saliency(cfg_, frame, out.bearing);
    return out;
  }

 private:
  const RunConfig& cfg_;
  const Scenario scenario_;
};

class TemplateAgent : public Agent {
 public:
  TemplateAgent(const RunConfig& cfg, const Scenario& s) : cfg_(cfg), scenario_(s) {}
  std::string name() const override { return "template"; }
  AgentOutput act(const ObservationFrame& frame, const GroundTruth&) override {
    TemplateResult r = template_track(frame, state_, cfg_.templ);
    state_ = r.state;
    AgentOutput out;
    out.bearing = r.bearing;
    if (r.bearing) {
      out.distance = distance_from_tilt(r.bearing->tilt, scenario_.camera.height,
                                        scenario_.ideal_distance);
    }
    out.confidence = r.confidence;
    out.saliency = std::move(r.response);
    return out;
  }

 private:
  const RunConfig& cfg_;
  const Scenario scenario_;
  TemplateState state_;
};

ojson bearing_json(const Bearing& b) {
  return ojson::array({rad_to_deg(b.pan), rad_to_deg(b.tilt)});
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
  os.flush();
  if (!os) throw Error("write failed for " + path.string());
}

std::string episode_file(const RunConfig& cfg, const std::string& agent,
                         std::uint64_t seed) {
  return "episode_" + cfg.scenario.name + "_" + agent + "_s" + std::to_string(seed) +
         ".jsonl";
}

}  // namespace

double distance_from_tilt(double tilt, double camera_height, double ideal) {
  if (!(tilt < 0.0) || !std::isfinite(tilt)) return ideal;
  return std::clamp(camera_height / std::tan(-tilt), 1.0, 4.0 * ideal);
}

std::unique_ptr<Agent> make_agent(AgentKind kind, const RunConfig& cfg,
                                  const Scenario& scenario, std::uint64_t seed) {
  switch (kind) {
    case AgentKind::kOurs: return std::make_unique<OursAgent>(cfg, scenario, seed);
    case AgentKind::kRandom: return std::make_unique<RandomAgent>(cfg, scenario, seed);
    case AgentKind::kOracle: return std::make_unique<OracleAgent>(cfg, scenario);
    case AgentKind::kTemplate: return std::make_unique<TemplateAgent>(cfg, scenario);
  }
  throw ConfigError("unknown agent kind");
}

std::string EpisodeLog::str() const {
  std::string out = header + "\n";
  for (const std::string& s : steps) out += s + "\n";
  return out;
}

EpisodeResult run_episode(const RunConfig& cfg, AgentKind kind, std::uint64_t seed) {
  const Scenario realized = realize_scenario(cfg.scenario, seed);
  // The agent stream is split from the episode seed so agents cannot disturb
  // world randomness.
  const std::uint64_t agent_seed =
      mix_seed(mix_seed(cfg.scenario.seed, seed), kAgentStream);
  std::unique_ptr<Agent> agent = make_agent(kind, cfg, realized, agent_seed);
  return run_episode_with(cfg, *agent, seed);
}

EpisodeResult run_episode_with(const RunConfig& cfg, Agent& agent, std::uint64_t seed) {
  const Scenario s = realize_scenario(cfg.scenario, seed);
  const bool follower = s.mode == ScenarioMode::kFollower;
  EpisodeResult result;
  result.agent = agent.name();
  result.seed = seed;

  ojson header;
  header["type"] = "header";
  header["tool"] = "actloc";
  header["version"] = kToolVersion;
  header["config_hash"] = config_hash(cfg);
  header["agent"] = agent.name();
  header["seed"] = seed;
  header["scenario"] = s.name;
  header["config"] = ojson::parse(config_to_json(cfg));
  result.log.header = header.dump();

  TrackingQualityParams relaxed = cfg.metric;
  relaxed.relaxed_distance = true;
  const PolarOffset ideal{follower ? s.ideal_distance : 0.0, Angle(0.0)};

  WorldState world = initial_world(s);
  CameraState cam = initial_camera(s);
  ControllerState ctrl;
  int lost_streak = 0;
  if (!cfg.frame_dump_dir.empty()) std::filesystem::create_directories(cfg.frame_dump_dir);
  const int last = std::min(cfg.max_steps, s.duration);
  for (int step = 0; step < last; ++step) {
    ObservationFrame frame = render(s, world, cam);
    frame.step = step;
    if (!cfg.frame_dump_dir.empty()) {
      write_pgm(std::filesystem::path(cfg.frame_dump_dir) /
                    ("ep" + std::to_string(seed) + "_t" + std::to_string(step) + ".pgm"),
                frame.image);
    }
    const GroundTruth gt = ground_truth(s, world, cam);
    const AgentOutput out = agent.act(frame, gt);

    // A missing bearing is a zero error: the camera holds.
    PdResult pd;
    if (follower) {
      const double bearing = out.bearing ? out.bearing->pan : 0.0;
      const double dist = out.bearing && out.distance ? *out.distance : s.ideal_distance;
      pd = follower_map(dist, bearing, ctrl, cfg.gains, s.ideal_distance);
    } else {
      const Bearing q = out.bearing.value_or(Bearing{});
      pd = pd_step(control_error(q, Bearing{}), ctrl, cfg.gains);
    }
    ctrl = pd.state;
    const ApplyResult applied = apply_command(s, cam, pd.command);

    StepRecord rec;
    rec.step = step;
    if (gt.actor >= 0) {
      const TrackingQuality q = tracking_quality_detail(gt.offset, ideal, cfg.metric);
      rec.gamma = q.gamma;
      rec.lost = q.lost;
      rec.gamma_relaxed = tracking_quality(gt.offset, ideal, relaxed);
      rec.aae_deg = rad_to_deg(follower ? std::abs(wrap_angle(gt.bearing.pan))
                                        : bearing_magnitude(gt.bearing));
    } else {
      rec.gamma = -1.0;
      rec.gamma_relaxed = -1.0;
      rec.lost = true;
      rec.aae_deg = 180.0;
    }
    if (gt.visible && out.saliency.rank() == 2) {
      const std::size_t n = out.saliency.dim(0);
      const PixelPos px = bearing_to_pixel(gt.bearing, n, frame.camera.fov);
      const auto clampi = [n](double v) {
        return static_cast<std::size_t>(std::clamp(std::floor(v), 0.0, double(n - 1)));
      };
      const Fixation fix{clampi(px.row), clampi(px.col)};
      rec.auc = auc_judd(out.saliency, std::span<const Fixation>(&fix, 1));
    }
    rec.camera = follower ? Bearing{cam.heading, 0.0} : cam.orientation;
    rec.action = follower ? Bearing{cam.heading - gt.bearing.pan, gt.bearing.tilt}
                          : Bearing{cam.orientation.pan + gt.bearing.pan,
                                    cam.orientation.tilt + gt.bearing.tilt};
    result.records.push_back(rec);

    ojson line;
    line["step"] = step;
    ojson camj;
    if (follower) {
      camj["x"] = cam.position.x;
      camj["y"] = cam.position.y;
      camj["heading_deg"] = rad_to_deg(cam.heading);
      camj["speed"] = cam.speed;
    } else {
      camj["pan_deg"] = rad_to_deg(cam.orientation.pan);
      camj["tilt_deg"] = rad_to_deg(cam.orientation.tilt);
    }
    line["camera"] = camj;
    line["command"] = {{"pre", ojson::array({pd.command.a, pd.command.b})},
                       {"post", ojson::array({applied.applied.a, applied.applied.b})},
                       {"clamped", applied.clamped}};
    line["action"] = out.bearing ? bearing_json(*out.bearing) : ojson(nullptr);
    line["gt"] = gt.actor >= 0 ? bearing_json(gt.bearing) : ojson(nullptr);
    line["gt_visible"] = gt.visible;
    line["gamma"] = rec.gamma;
    line["gamma_relaxed"] = rec.gamma_relaxed;
    line["lost"] = rec.lost;
    line["aae_deg"] = rec.aae_deg;
    line["auc"] = rec.auc >= 0.0 ? ojson(rec.auc) : ojson(nullptr);
    line["loss_global"] = out.loss_global;
    line["loss_attn"] = out.loss_attn;
    line["energy"] = compute_energy(out.loss_global, out.bearing.value_or(Bearing{}),
                                    Bearing{});
    line["agent"] = agent.name();
    line["seed"] = seed;
    result.log.steps.push_back(line.dump());

    lost_streak = rec.lost ? lost_streak + 1 : 0;
    if (lost_streak >= cfg.loss_termination_window) break;
    cam = applied.camera;
    if (step + 1 < last) world = step_world(s, world);
  }
  // Recall is relative to the steps this episode could have lasted.
  result.metrics = episode_metrics(result.records, last);
  return result;
}

SuiteSummary summarize(const std::string& agent,
                       const std::vector<EpisodeResult>& results) {
  SuiteSummary s;
  s.agent = agent;
  s.episodes = results.size();
  std::vector<double> r, p, pr, a, auc, st;
  for (const EpisodeResult& e : results) {
    r.push_back(e.metrics.recall);
    p.push_back(e.metrics.precision);
    pr.push_back(e.metrics.precision_relaxed);
    a.push_back(e.metrics.aae_mean);
    auc.push_back(e.metrics.auc_judd);
    st.push_back(e.metrics.steps_survived);
  }
  s.recall = mean_std(r);
  s.precision = mean_std(p);
  s.precision_relaxed = mean_std(pr);
  s.aae_deg = mean_std(a);
  s.auc_judd = mean_std(auc);
  s.steps = mean_std(st);
  return s;
}

std::string metrics_csv(const RunConfig& cfg, const std::string& agent,
                        const std::vector<EpisodeResult>& results) {
  std::string out = std::string("# actloc ") + kToolVersion + " config=" +
                    config_hash(cfg) + " agent=" + agent + "\n";
  out += "scenario,seed,recall,precision,precision_relaxed,aae_deg,auc_judd,steps\n";
  for (const EpisodeResult& e : results) {
    const EpisodeMetrics& m = e.metrics;
    out += cfg.scenario.name + "," + std::to_string(e.seed) + "," + fmt(m.recall) +
           "," + fmt(m.precision) + "," + fmt(m.precision_relaxed) + "," +
           fmt(m.aae_mean) + "," + fmt(m.auc_judd) + "," +
           std::to_string(m.steps_survived) + "\n";
  }
  return out;
}

std::string summary_text(const RunConfig& cfg, const std::vector<SuiteSummary>& all) {
  std::string out = std::string("# actloc ") + kToolVersion + " config=" +
                    config_hash(cfg) + " scenario=" + cfg.scenario.name + "\n";
  for (const SuiteSummary& s : all) {
    out += "[" + s.agent + "] episodes=" + std::to_string(s.episodes) + "\n";
    auto row = [&](const char* name, const MeanStd& m) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %-18s mean=%.6f std=%.6f\n", name, m.mean,
                    m.stddev);
      out += buf;
    };
    row("recall", s.recall);
    row("precision", s.precision);
    row("precision_relaxed", s.precision_relaxed);
    row("aae_deg", s.aae_deg);
    row("auc_judd", s.auc_judd);
    row("steps", s.steps);
  }
  return out;
}

SuiteResult run_suite(const RunConfig& cfg, bool write_files,
                      const std::function<void(const EpisodeResult&)>& on_episode) {
  if (cfg.seeds.empty()) throw ConfigError("suite needs at least one seed");
  const std::filesystem::path dir = cfg.output_dir;
  if (write_files) std::filesystem::create_directories(dir);
  SuiteResult suite;
  for (AgentKind kind : cfg.agents) {
    const std::string name = to_string(kind);
    std::vector<EpisodeResult> results;
    const std::filesystem::path csv = dir / ("metrics_" + name + ".csv");
    try {
      for (std::uint64_t seed : cfg.seeds) {
        EpisodeResult r = run_episode(cfg, kind, seed);
        if (write_files && cfg.write_step_logs) {
          const auto path = dir / episode_file(cfg, name, seed);
          write_text(path, r.log.str());
          suite.files.push_back(path);
        }
        if (on_episode) on_episode(r);
        r.log = {};  // logs can be large; metrics are what the suite keeps
        results.push_back(std::move(r));
      }
    } catch (...) {
      if (write_files) write_text(csv, metrics_csv(cfg, name, results));
      throw;
    }
    if (write_files) {
      write_text(csv, metrics_csv(cfg, name, results));
      suite.files.push_back(csv);
    }
    suite.summaries.push_back(summarize(name, results));
    suite.per_agent.push_back(std::move(results));
  }
  if (write_files) {
    const auto path = dir / "summary.txt";
    write_text(path, summary_text(cfg, suite.summaries));
    suite.files.push_back(path);
  }
  return suite;
}

std::vector<AblationVariant> parse_ablation_grid(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ablation grid: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("variants") || !j.at("variants").is_array()) {
    throw ConfigError("ablation grid: expected {\"variants\": [...]}");
  }
  std::vector<AblationVariant> out;
  for (const auto& v : j.at("variants")) {
    if (!v.is_object() || !v.contains("name") || !v.at("name").is_string() ||
        !v.contains("overrides") || !v.at("overrides").is_object()) {
      throw ConfigError("ablation grid: each variant needs name and overrides");
    }
    AblationVariant a;
    a.name = v.at("name").get<std::string>();
    for (const auto& [key, value] : v.at("overrides").items()) {
      a.overrides.emplace_back(key, value.dump());
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<AblationVariant> load_ablation_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open ablation grid");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ablation_grid(buf.str());
}

std::vector<AblationRow> run_ablation(const RunConfig& cfg,
                                      const std::vector<AblationVariant>& grid,
                                      bool write_files) {
  std::vector<std::pair<std::string, RunConfig>> variants;
  RunConfig base = cfg;
  base.agents = {cfg.agents.front()};
  variants.emplace_back("full", base);
  for (const AblationVariant& v : grid) {
    RunConfig c = base;
    for (const auto& [key, value] : v.overrides) c = with_override(c, key, value);
    variants.emplace_back(v.name, std::move(c));
  }
  std::vector<AblationRow> rows;
  const std::filesystem::path dir = cfg.output_dir;
  if (write_files) std::filesystem::create_directories(dir);
  std::size_t index = 0;
  for (auto& [name, c] : variants) {
    AblationRow row;
    row.variant = name;
    for (std::uint64_t seed : cfg.seeds) {
      EpisodeResult r = run_episode(c, c.agents.front(), seed);
      r.log = {};
      row.episodes.push_back(std::move(r));
    }
    row.summary = summarize(to_string(c.agents.front()), row.episodes);
    if (write_files) {
      write_text(dir / ("ablation_" + std::to_string(index) + ".csv"),
                 "# variant=" + name + "\n" +
                     metrics_csv(c, to_string(c.agents.front()), row.episodes));
    }
    rows.push_back(std::move(row));
    ++index;
  }
  if (write_files) write_text(dir / "ablation.csv", ablation_csv(cfg, rows));
  return rows;
}

std::string ablation_csv(const RunConfig& cfg, const std::vector<AblationRow>& rows) {
  std::string out = std::string("# actloc ") + kToolVersion + " config=" +
                    config_hash(cfg) + " scenario=" + cfg.scenario.name + "\n";
  out += "variant,episodes,recall_mean,recall_std,precision_mean,precision_std,"
         "precision_relaxed_mean,aae_deg_mean,auc_judd_mean\n";
  for (const AblationRow& r : rows) {
    const SuiteSummary& s = r.summary;
    std::string name = r.variant;
    if (name.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char ch : name) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      name = q + "\"";
    }
    out += name + "," + std::to_string(s.episodes) + "," + fmt(s.recall.mean) + "," +
           fmt(s.recall.stddev) + "," + fmt(s.precision.mean) + "," +
           fmt(s.precision.stddev) + "," + fmt(s.precision_relaxed.mean) + "," +
           fmt(s.aae_deg.mean) + "," + fmt(s.auc_judd.mean) + "\n";
  }
  return out;
}

}  // namespace actloc
