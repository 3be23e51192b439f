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

// Scenario files are JSON objects. Unknown keys are rejected so typos fail
// loudly instead of silently falling back to defaults. Angles are written in
// degrees and converted to radians here.

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string_view>

#include "actloc/seeding.hpp"
#include "actloc/world.hpp"
#include "json.hpp"

namespace actloc {
namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;
constexpr int kMaxDuration = 500;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(path.empty() ? key : path + "." + key, "unknown field");
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double number(const json& obj, const std::string& path, const char* key,
              double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

double required_number(const json& obj, const std::string& path,
                       const char* key) {
  if (!obj.contains(key)) fail(join(path, key), "missing required field");
  return number(obj, path, key, 0.0);
}

Vec2 vec2(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number()) {
    fail(path, "expected [x, y]");
  }
  return Vec2{v[0].get<double>(), v[1].get<double>()};
}

Vec2 vec2_field(const json& obj, const std::string& path, const char* key,
                Vec2 fallback) {
  if (!obj.contains(key)) return fallback;
  return vec2(obj.at(key), join(path, key));
}

std::string string_field(const json& obj, const std::string& path,
                         const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) fail(join(path, key), "expected a string");
  return obj.at(key).get<std::string>();
}

Texture parse_texture(const json& v, const std::string& path) {
  if (v.is_number_integer()) {
    const int id = v.get<int>();
    if (id < 0 || id > 4) fail(path, "texture id out of range 0..4");
    return static_cast<Texture>(id);
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    for (int id = 0; id <= 4; ++id) {
      if (s == to_string(static_cast<Texture>(id))) return static_cast<Texture>(id);
    }
    fail(path, "unknown texture '" + s + "'");
  }
  fail(path, "expected texture name or id");
}

CameraSpec parse_camera(const json& obj, const std::string& path) {
  check_keys(obj, path,
             {"fov_deg", "max_rate_deg", "max_accel_deg", "response", "pan_limit_deg",
              "tilt_limit_deg", "initial_deg", "start", "start_heading_deg",
              "height", "max_turn_deg", "max_speed"});
  CameraSpec cam;
  const Vec2 fov = vec2_field(obj, path, "fov_deg", Vec2{90.0, 90.0});
  cam.fov = FieldOfView{deg_to_rad(fov.x), deg_to_rad(fov.y)};
  auto& lim = cam.limits;
  lim.max_rate = deg_to_rad(number(obj, path, "max_rate_deg", rad_to_deg(lim.max_rate)));
  lim.max_accel = deg_to_rad(number(obj, path, "max_accel_deg", 0.0));
  lim.response = number(obj, path, "response", 1.0);
  if (!(lim.response > 0.0 && lim.response <= 1.0)) {
    fail(join(path, "response"), "must lie in (0, 1]");
  }
  lim.pan_limit = deg_to_rad(number(obj, path, "pan_limit_deg", rad_to_deg(lim.pan_limit)));
  lim.tilt_limit = deg_to_rad(number(obj, path, "tilt_limit_deg", rad_to_deg(lim.tilt_limit)));
  lim.max_turn = deg_to_rad(number(obj, path, "max_turn_deg", rad_to_deg(lim.max_turn)));
  lim.max_speed = number(obj, path, "max_speed", lim.max_speed);
  const Vec2 init = vec2_field(obj, path, "initial_deg", Vec2{});
  cam.initial = Bearing{deg_to_rad(init.x), deg_to_rad(init.y)};
  cam.start_position = vec2_field(obj, path, "start", Vec2{});
  cam.start_heading = deg_to_rad(number(obj, path, "start_heading_deg", 0.0));
  cam.height = number(obj, path, "height", cam.height);
  return cam;
}

ActorSpec parse_actor(const json& obj, const std::string& path) {
  check_keys(obj, path, {"name", "role", "appearance", "waypoints"});
  ActorSpec a;
  a.name = string_field(obj, path, "name", "");
  const std::string role = string_field(obj, path, "role", "distractor");
  if (role == "dominant") {
    a.role = ActorRole::kDominant;
  } else if (role == "distractor") {
    a.role = ActorRole::kDistractor;
  } else {
    fail(join(path, "role"), "expected 'dominant' or 'distractor'");
  }
  if (obj.contains("appearance")) {
    const std::string ap = join(path, "appearance");
    const json& app = obj.at("appearance");
    check_keys(app, ap, {"intensity", "texture", "radius"});
    a.appearance.intensity = number(app, ap, "intensity", a.appearance.intensity);
    a.appearance.radius = number(app, ap, "radius", a.appearance.radius);
    if (app.contains("texture")) {
      a.appearance.texture = parse_texture(app.at("texture"), join(ap, "texture"));
    }
  }
  const std::string wp = join(path, "waypoints");
  if (!obj.contains("waypoints") || !obj.at("waypoints").is_array() ||
      obj.at("waypoints").empty()) {
    fail(wp, "expected a non-empty array of [step, [x, y]]");
  }
  std::size_t k = 0;
  for (const json& w : obj.at("waypoints")) {
    const std::string p = wp + "[" + std::to_string(k++) + "]";
    if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer()) {
      fail(p, "expected [step, [x, y]]");
    }
    a.waypoints.push_back(Waypoint{w[0].get<int>(), vec2(w[1], p + "[1]")});
  }
  return a;
}

OccluderSpec parse_occluder(const json& obj, const std::string& path) {
  check_keys(obj, path, {"shape", "center", "radius", "half_size", "intensity"});
  OccluderSpec o;
  const std::string shape = string_field(obj, path, "shape", "disc");
  if (shape == "disc") {
    o.shape = OccluderSpec::Shape::kDisc;
  } else if (shape == "rect") {
    o.shape = OccluderSpec::Shape::kRect;
  } else {
    fail(join(path, "shape"), "expected 'disc' or 'rect'");
  }
  if (!obj.contains("center")) fail(join(path, "center"), "missing required field");
  o.center = vec2(obj.at("center"), join(path, "center"));
  o.radius = number(obj, path, "radius", o.radius);
  o.half_size = vec2_field(obj, path, "half_size", Vec2{o.radius, o.radius});
  o.intensity = number(obj, path, "intensity", o.intensity);
  return o;
}

EventSpec parse_event(const json& obj, const std::string& path,
                      const std::vector<ActorSpec>& actors) {
  check_keys(obj, path, {"step", "kind", "factor", "actor"});
  EventSpec e;
  if (!obj.contains("step") || !obj.at("step").is_number_integer()) {
    fail(join(path, "step"), "expected an integer step");
  }
  e.step = obj.at("step").get<int>();
  const std::string kind = string_field(obj, path, "kind", "");
  if (kind == "lighting") {
    e.kind = EventKind::kLighting;
    e.factor = required_number(obj, path, "factor");
  } else if (kind == "spawn" || kind == "despawn") {
    e.kind = kind == "spawn" ? EventKind::kSpawn : EventKind::kDespawn;
    const std::string name = string_field(obj, path, "actor", "");
    bool found = false;
    for (std::size_t i = 0; i < actors.size(); ++i) {
      if (actors[i].name == name) {
        e.actor = i;
        found = true;
      }
    }
    if (!found) fail(join(path, "actor"), "unknown actor '" + name + "'");
  } else {
    fail(join(path, "kind"), "expected 'lighting', 'spawn' or 'despawn'");
  }
  return e;
}

}  // namespace

const char* to_string(ScenarioMode mode) {
  return mode == ScenarioMode::kPanTilt ? "pan_tilt" : "follower";
}

const char* to_string(Texture texture) {
  switch (texture) {
    case Texture::kSolid: return "solid";
    case Texture::kRings: return "rings";
    case Texture::kPulse: return "pulse";
    case Texture::kStripes: return "stripes";
    case Texture::kChecker: return "checker";
  }
  return "solid";
}

void Scenario::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ScenarioError("schema_version: unsupported version " +
                        std::to_string(schema_version));
  }
  if (duration <= 0) throw ScenarioError("duration: must be positive");
  if (scene_size.x <= 0 || scene_size.y <= 0) {
    throw ScenarioError("scene_size: must be positive");
  }
  if (image_size < 16 || image_size % 8 != 0) {
    throw ScenarioError("image_size: must be a multiple of 8 and at least 16");
  }
  try {
    camera.fov.validate();
  } catch (const Error& e) {
    throw ScenarioError(std::string("camera.fov_deg: ") + e.what());
  }
  bool has_dominant = false;
  for (std::size_t i = 0; i < actors.size(); ++i) {
    const ActorSpec& a = actors[i];
    const std::string path = "actors[" + std::to_string(i) + "]";
    has_dominant = has_dominant || a.role == ActorRole::kDominant;
    if (a.waypoints.empty()) {
      throw ScenarioError(path + ".waypoints: actor '" + a.name +
                          "' has no waypoints");
    }
    for (std::size_t k = 1; k < a.waypoints.size(); ++k) {
      if (a.waypoints[k].step <= a.waypoints[k - 1].step) {
        throw ScenarioError(path + ".waypoints: steps of actor '" + a.name +
                            "' are not strictly increasing");
      }
    }
    for (const Waypoint& w : a.waypoints) {
      if (w.position.x < 0 || w.position.x > scene_size.x || w.position.y < 0 ||
          w.position.y > scene_size.y) {
        throw ScenarioError(path + ".waypoints: actor '" + a.name +
                            "' leaves the scene bounds");
      }
    }
    if (a.appearance.radius <= 0) {
      throw ScenarioError(path + ".appearance.radius: must be positive");
    }
  }
  if (!has_dominant) {
    throw ScenarioError("actors: at least one actor must be 'dominant'");
  }
  for (std::size_t i = 0; i < occluders.size(); ++i) {
    if (mode == ScenarioMode::kFollower &&
        occluders[i].shape == OccluderSpec::Shape::kRect) {
      throw ScenarioError("occluders[" + std::to_string(i) +
                          "].shape: rect occluders need pan_tilt mode");
    }
  }
}

namespace {
Scenario parse_root(const json& root);
}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("<root>: invalid JSON: ") + e.what());
  }
  try {
    return parse_root(root);
  } catch (const json::exception& e) {
    // Type mismatches that slipped past the field helpers.
    throw ScenarioError(std::string("<root>: wrong value type: ") + e.what());
  }
}

namespace {
Scenario parse_root(const json& root) {
  check_keys(root, "",
             {"schema_version", "name", "mode", "duration", "duration_override",
              "seed", "scene_size", "scene_span_deg", "background",
              "noise_sigma", "ideal_distance", "waypoint_jitter", "image_size",
              "camera", "actors", "occluders", "events"});
  Scenario s;
  if (!root.contains("schema_version")) {
    throw ScenarioError("schema_version: missing required field");
  }
  s.schema_version = root.at("schema_version").get<int>();
  s.name = string_field(root, "", "name", "");
  const std::string mode = string_field(root, "", "mode", "pan_tilt");
  if (mode == "pan_tilt") {
    s.mode = ScenarioMode::kPanTilt;
  } else if (mode == "follower") {
    s.mode = ScenarioMode::kFollower;
  } else {
    throw ScenarioError("mode: expected 'pan_tilt' or 'follower'");
  }
  s.duration = static_cast<int>(number(root, "", "duration", 500));
  const bool override_duration =
      root.contains("duration_override") && root.at("duration_override").get<bool>();
  if (s.duration > kMaxDuration && !override_duration) {
    throw ScenarioError("duration: exceeds 500 without duration_override");
  }
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned()) {
      throw ScenarioError("seed: expected a non-negative integer");
    }
    s.seed = root.at("seed").get<std::uint64_t>();
  }
  s.scene_size = vec2_field(root, "", "scene_size", s.scene_size);
  const Vec2 span = vec2_field(root, "", "scene_span_deg", Vec2{164.0, 164.0});
  s.scene_span = Vec2{deg_to_rad(span.x), deg_to_rad(span.y)};
  s.background = number(root, "", "background", s.background);
  s.noise_sigma = number(root, "", "noise_sigma", s.noise_sigma);
  s.ideal_distance = number(root, "", "ideal_distance", s.ideal_distance);
  s.waypoint_jitter = number(root, "", "waypoint_jitter", s.waypoint_jitter);
  s.image_size = static_cast<std::size_t>(number(root, "", "image_size", 112));
  if (root.contains("camera")) s.camera = parse_camera(root.at("camera"), "camera");
  if (root.contains("actors")) {
    if (!root.at("actors").is_array()) throw ScenarioError("actors: expected an array");
    std::size_t i = 0;
    for (const json& a : root.at("actors")) {
      s.actors.push_back(parse_actor(a, "actors[" + std::to_string(i++) + "]"));
    }
  }
  if (root.contains("occluders")) {
    std::size_t i = 0;
    for (const json& o : root.at("occluders")) {
      s.occluders.push_back(parse_occluder(o, "occluders[" + std::to_string(i++) + "]"));
    }
  }
  if (root.contains("events")) {
    std::size_t i = 0;
    for (const json& e : root.at("events")) {
      s.events.push_back(
          parse_event(e, "events[" + std::to_string(i++) + "]", s.actors));
    }
  }
  s.validate();
  return s;
}
}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string() + ": cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

Scenario realize_scenario(const Scenario& base, std::uint64_t episode_seed) {
  Scenario s = base;
  s.seed = mix_seed(mix_seed(base.seed, episode_seed), kWorldStream);
  if (base.waypoint_jitter > 0.0) {
    std::mt19937_64 rng(mix_seed(s.seed, 0x6a6974ULL));
    std::uniform_real_distribution<double> u(-base.waypoint_jitter,
                                             base.waypoint_jitter);
    for (ActorSpec& a : s.actors) {
      // One offset per actor keeps trajectory shapes intact.
      const Vec2 d{u(rng), u(rng)};
      for (Waypoint& w : a.waypoints) {
        w.position.x = std::clamp(w.position.x + d.x, 0.0, s.scene_size.x);
        w.position.y = std::clamp(w.position.y + d.y, 0.0, s.scene_size.y);
      }
    }
  }
  return s;
}

}  // namespace actloc
