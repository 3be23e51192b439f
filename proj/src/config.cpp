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

#include <cstdio>
#include <fstream>
#include <sstream>

#include "actloc/harness.hpp"
#include "json.hpp"

namespace actloc {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError("config " + key + ": " + what);
}

void allow_only(const json& obj, const std::string& path,
                std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) bad(path.empty() ? key : path + "." + key, "unknown key");
  }
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string full = path.empty() ? key : path + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) bad(full, "expected true or false");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) {
      bad(full, "expected a non-negative integer");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) bad(full, "expected a number");
  } else {
    if (!v.is_string()) bad(full, "expected a string");
  }
  out = v.get<T>();
}

void read_deg(const json& obj, const std::string& path, const char* key, double& rad) {
  double deg = rad_to_deg(rad);
  read(obj, path, key, deg);
  rad = deg_to_rad(deg);
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json to_json(const RunConfig& c) {
  json j;
  j["scenario"] = c.scenario_path;
  json agents = json::array();
  for (AgentKind a : c.agents) agents.push_back(to_string(a));
  j["agents"] = agents;
  j["seeds"] = c.seeds;
  j["max_steps"] = c.max_steps;
  j["loss_termination_window"] = c.loss_termination_window;
  j["gains"] = {{"lambda_p", c.gains.lambda_p}, {"lambda_d", c.gains.lambda_d}};
  const PerceptionConfig& p = c.perception;
  j["perception"] = {{"hidden_dim", p.hidden_dim},
                     {"attn_dim", p.attn_dim},
                     {"grid", p.grid},
                     {"lr", p.lr},
                     {"clip", p.clip},
                     {"adaptive_lr", p.adaptive_lr},
                     {"adaptive_beta", p.adaptive_beta},
                     {"ema_decay", p.ema_decay},
                     {"disable_motion_gate", p.disable_motion_gate},
                     {"disable_attn_loss", p.disable_attn_loss},
                     {"literal_global_loss", p.literal_global_loss},
                     {"frozen", p.frozen}};
  j["metric"] = {{"rho_max", c.metric.rho_max},
                 {"theta_max_deg", rad_to_deg(c.metric.theta_max)},
                 {"lambda", c.metric.lambda}};
  j["random_spread_deg"] = rad_to_deg(c.random_spread);
  j["template"] = {{"side", c.templ.side},
                   {"search_radius", c.templ.search_radius},
                   {"blend_rate", c.templ.blend_rate},
                   {"confidence_threshold", c.templ.confidence_threshold},
                   {"reacquire_after", c.templ.reacquire_after}};
  j["saliency_sigma_px"] = c.saliency_sigma_px;
  j["output_dir"] = c.output_dir;
  j["write_step_logs"] = c.write_step_logs;
  return j;
}

std::string read_file(const std::filesystem::path& path, bool scenario) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    const std::string msg = path.string() + ": cannot open file";
    if (scenario) throw ScenarioError(msg);
    throw ConfigError(msg);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunConfig from_json(const json& j, const std::filesystem::path& base_dir) {
  allow_only(j, "", {"scenario", "agent", "agents", "seeds", "max_steps",
                     "loss_termination_window", "gains", "perception", "metric",
                     "random_spread_deg", "template", "saliency_sigma_px",
                     "output_dir", "write_step_logs"});
  RunConfig c;
  if (!j.contains("scenario") || !j.at("scenario").is_string()) {
    bad("scenario", "missing scenario path");
  }
  std::filesystem::path sp = j.at("scenario").get<std::string>();
  if (sp.is_relative() && !std::filesystem::exists(sp) && !base_dir.empty() &&
      std::filesystem::exists(base_dir / sp)) {
    sp = base_dir / sp;
  }
  c.scenario_path = sp.lexically_normal().string();
  if (j.contains("agent") && j.contains("agents")) {
    bad("agent", "give either agent or agents");
  }
  if (j.contains("agent")) {
    if (!j.at("agent").is_string()) bad("agent", "expected a string");
    c.agents = {parse_agent_kind(j.at("agent").get<std::string>())};
  }
  if (j.contains("agents")) {
    const json& a = j.at("agents");
    if (!a.is_array() || a.empty()) bad("agents", "expected a non-empty array");
    c.agents.clear();
    for (const json& x : a) {
      if (!x.is_string()) bad("agents", "expected agent names");
      c.agents.push_back(parse_agent_kind(x.get<std::string>()));
    }
  }
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    if (s.is_string()) {
      c.seeds = parse_seed_list(s.get<std::string>());
    } else if (s.is_array() && !s.empty()) {
      c.seeds.clear();
      for (const json& x : s) {
        if (!x.is_number_unsigned()) bad("seeds", "expected non-negative integers");
        c.seeds.push_back(x.get<std::uint64_t>());
      }
    } else {
      bad("seeds", "expected a non-empty array or a range string");
    }
  }
  read(j, "", "max_steps", c.max_steps);
  read(j, "", "loss_termination_window", c.loss_termination_window);
  if (j.contains("gains")) {
    const json& g = j.at("gains");
    allow_only(g, "gains", {"lambda_p", "lambda_d"});
    read(g, "gains", "lambda_p", c.gains.lambda_p);
    read(g, "gains", "lambda_d", c.gains.lambda_d);
  }
  if (j.contains("perception")) {
    const json& p = j.at("perception");
    PerceptionConfig& q = c.perception;
    allow_only(p, "perception",
               {"hidden_dim", "attn_dim", "grid", "lr", "clip", "adaptive_lr",
                "adaptive_beta", "ema_decay", "disable_motion_gate",
                "disable_attn_loss", "literal_global_loss", "frozen"});
    read(p, "perception", "hidden_dim", q.hidden_dim);
    read(p, "perception", "attn_dim", q.attn_dim);
    read(p, "perception", "grid", q.grid);
    read(p, "perception", "lr", q.lr);
    read(p, "perception", "clip", q.clip);
    read(p, "perception", "adaptive_lr", q.adaptive_lr);
    read(p, "perception", "adaptive_beta", q.adaptive_beta);
    read(p, "perception", "ema_decay", q.ema_decay);
    read(p, "perception", "disable_motion_gate", q.disable_motion_gate);
    read(p, "perception", "disable_attn_loss", q.disable_attn_loss);
    read(p, "perception", "literal_global_loss", q.literal_global_loss);
    read(p, "perception", "frozen", q.frozen);
  }
  if (j.contains("metric")) {
    const json& m = j.at("metric");
    allow_only(m, "metric", {"rho_max", "theta_max_deg", "lambda"});
    read(m, "metric", "rho_max", c.metric.rho_max);
    read_deg(m, "metric", "theta_max_deg", c.metric.theta_max);
    read(m, "metric", "lambda", c.metric.lambda);
  }
  read_deg(j, "", "random_spread_deg", c.random_spread);
  if (j.contains("template")) {
    const json& t = j.at("template");
    allow_only(t, "template", {"side", "search_radius", "blend_rate",
                               "confidence_threshold", "reacquire_after"});
    read(t, "template", "side", c.templ.side);
    read(t, "template", "search_radius", c.templ.search_radius);
    read(t, "template", "blend_rate", c.templ.blend_rate);
    read(t, "template", "confidence_threshold", c.templ.confidence_threshold);
    read(t, "template", "reacquire_after", c.templ.reacquire_after);
  }
  read(j, "", "saliency_sigma_px", c.saliency_sigma_px);
  read(j, "", "output_dir", c.output_dir);
  read(j, "", "write_step_logs", c.write_step_logs);

  if (c.max_steps <= 0) bad("max_steps", "must be positive");
  if (c.loss_termination_window <= 0) bad("loss_termination_window", "must be positive");
  if (c.templ.side % 2 == 0) bad("template.side", "must be odd");
  if (!(c.saliency_sigma_px > 0.0)) bad("saliency_sigma_px", "must be positive");
  if (!(c.random_spread >= 0.0)) bad("random_spread_deg", "must be >= 0");
  try {
    c.gains.validate();
    c.metric.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  const std::string text = read_file(c.scenario_path, true);
  c.scenario_digest = hex16(fnv1a(text));
  c.scenario = parse_scenario(text);
  if (c.scenario.name.empty()) {
    c.scenario.name = std::filesystem::path(c.scenario_path).stem().string();
  }
  c.perception.image_size = c.scenario.image_size;
  c.perception.fov = c.scenario.camera.fov;
  try {
    c.perception.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("config perception: ") + e.what());
  }
  return c;
}

}  // namespace

const char* to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kOurs: return "ours";
    case AgentKind::kRandom: return "random";
    case AgentKind::kOracle: return "oracle";
    case AgentKind::kTemplate: return "template";
  }
  return "?";
}

AgentKind parse_agent_kind(const std::string& name) {
  for (AgentKind k : {AgentKind::kOurs, AgentKind::kRandom, AgentKind::kOracle,
                      AgentKind::kTemplate}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown agent '" + name +
                    "' (expected ours, random, oracle or template)");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  auto to_u64 = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("bad seed list '" + text + "'");
    }
    return std::stoull(s);
  };
  std::vector<std::uint64_t> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t a = to_u64(text.substr(0, dots));
    const std::uint64_t b = to_u64(text.substr(dots + 2));
    if (b < a) throw ConfigError("bad seed range '" + text + "'");
    for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_u64(item));
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

std::string config_to_json(const RunConfig& cfg) { return to_json(cfg).dump(); }

RunConfig parse_run_config(const std::string& text,
                           const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return from_json(j, base_dir);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path, false), path.parent_path());
}

RunConfig with_override(const RunConfig& cfg, const std::string& key,
                        const std::string& json_value) {
  json j = to_json(cfg);
  json value;
  try {
    value = json::parse(json_value);
  } catch (const json::exception&) {
    bad(key, "override value is not valid JSON: " + json_value);
  }
  json* node = &j;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) bad(key, "empty override key");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i])) bad(key, "unknown key");
    node = &(*node)[parts[i]];
  }
  *node = value;
  return from_json(j, {});
}

std::string config_hash(const RunConfig& cfg) {
  return hex16(fnv1a(cfg.scenario_digest, fnv1a(config_to_json(cfg))));
}

}  // namespace actloc
