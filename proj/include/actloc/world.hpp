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

// Deterministic 2D world for active-camera experiments.
//
// Two modes share one core:
//  * pan_tilt: a fixed camera crops an angular window out of a flat virtual
//    screen. Scene coordinates map linearly onto angles, the scene centre is
//    bearing (0, 0).
//  * follower: an agent with position and heading carries the camera over a
//    ground plane. Objects project by bearing (horizontal) and by depression
//    below the horizon from the camera height (vertical).

#ifndef ACTLOC_WORLD_HPP_
#define ACTLOC_WORLD_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "actloc/geometry.hpp"
#include "actloc/tensor.hpp"

namespace actloc {

/// Raised by the scenario loader; the message starts with the field path.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

enum class ScenarioMode { kPanTilt, kFollower };
enum class ActorRole { kDominant, kDistractor };

/// Appearance patterns. Pulse and Stripes change over time.
enum class Texture { kSolid = 0, kRings = 1, kPulse = 2, kStripes = 3, kChecker = 4 };

const char* to_string(ScenarioMode mode);
const char* to_string(Texture texture);

struct Waypoint {
  int step = 0;
  Vec2 position;
};

struct Appearance {
  double intensity = 0.9;
  Texture texture = Texture::kSolid;
  double radius = 10.0;  ///< world units
};

struct ActorSpec {
  std::string name;
  std::vector<Waypoint> waypoints;
  Appearance appearance;
  ActorRole role = ActorRole::kDistractor;
};

struct OccluderSpec {
  enum class Shape { kDisc, kRect };
  Shape shape = Shape::kDisc;
  Vec2 center;
  double radius = 10.0;  ///< disc radius
  Vec2 half_size;        ///< rect half extents (pan_tilt only)
  double intensity = 0.1;
};

enum class EventKind { kLighting, kSpawn, kDespawn };

struct EventSpec {
  int step = 0;
  EventKind kind = EventKind::kLighting;
  double factor = 1.0;     ///< lighting multiplier
  std::size_t actor = 0;   ///< spawn / despawn target
};

struct ActuatorLimits {
  double max_rate = deg_to_rad(6.0);   ///< per-step pan/tilt change
  double max_accel = 0.0;              ///< per-step change of rate; 0 = none
  /// Fraction of the gap between requested and current rate closed per step
  /// (first-order motor response). 1 = the request is followed at once.
  double response = 1.0;
  double pan_limit = deg_to_rad(37.0);
  double tilt_limit = deg_to_rad(37.0);
  double max_turn = deg_to_rad(12.0);  ///< follower heading change per step
  double max_speed = 10.0;             ///< follower forward speed per step
};

struct CameraSpec {
  FieldOfView fov;
  ActuatorLimits limits;
  Bearing initial;          ///< pan_tilt start orientation
  Vec2 start_position;      ///< follower
  double start_heading = 0; ///< follower, CCW from +x
  double height = 90.0;     ///< follower camera height above ground
};

struct Scenario {
  int schema_version = 1;
  std::string name;
  ScenarioMode mode = ScenarioMode::kPanTilt;
  int duration = 500;
  std::uint64_t seed = 0;
  Vec2 scene_size{164.0, 164.0};
  Vec2 scene_span{deg_to_rad(164.0), deg_to_rad(164.0)};  ///< pan_tilt only
  double background = 0.25;
  double noise_sigma = 0.02;
  double ideal_distance = 250.0;
  double waypoint_jitter = 0.0;
  std::size_t image_size = 112;
  CameraSpec camera;
  std::vector<ActorSpec> actors;
  std::vector<OccluderSpec> occluders;
  std::vector<EventSpec> events;

  /// Throws ScenarioError on any broken invariant.
  void validate() const;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text);

/// Per-episode copy of a scenario: waypoints jittered inside the scene and the
/// noise seed mixed with the episode seed. Jitter 0 keeps positions intact.
Scenario realize_scenario(const Scenario& base, std::uint64_t episode_seed);

struct WorldState {
  int step = 0;
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  std::vector<bool> present;
  double lighting = 1.0;
};

/// State at an arbitrary step; step_world is equivalent to repeated calls.
WorldState world_at(const Scenario& s, int step);
WorldState initial_world(const Scenario& s);
WorldState step_world(const Scenario& s, const WorldState& w);

struct CameraState {
  Bearing orientation;  ///< pan_tilt absolute pan/tilt
  Bearing rate;         ///< last applied per-step change
  Vec2 position;        ///< follower
  double heading = 0.0; ///< follower, CCW from +x
  double turn_rate = 0.0;
  double speed = 0.0;
  FieldOfView fov;
};

CameraState initial_camera(const Scenario& s);

/// Pan/tilt deltas (pan_tilt) or turn rate / forward speed (follower).
/// A positive turn rotates toward positive pan, i.e. to the right.
struct ControlCommand {
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const ControlCommand&, const ControlCommand&) = default;
};

struct ApplyResult {
  CameraState camera;
  ControlCommand applied;
  bool clamped = false;
};

ApplyResult apply_command(const Scenario& s, const CameraState& cam,
                          const ControlCommand& cmd);
ApplyResult apply_command(ScenarioMode mode, const ActuatorLimits& limits,
                          const Vec2& scene_size, const CameraState& cam,
                          const ControlCommand& cmd);

struct ObservationFrame {
  Tensor image;  ///< [1, H, W], values in [0, 1]
  int step = 0;
  CameraState camera;
};

ObservationFrame render(const Scenario& s, const WorldState& w,
                        const CameraState& cam);

struct GroundTruth {
  Bearing bearing;      ///< camera-relative bearing of the nearest dominant actor
  PolarOffset offset;   ///< follower: distance and bearing; pan_tilt: rho 0
  bool visible = false; ///< inside the FOV and centre not occluded
  int actor = -1;
};

/// Nearest present dominant actor. actor == -1 if none is present.
GroundTruth ground_truth(const Scenario& s, const WorldState& w,
                         const CameraState& cam);

/// Pixel (row, col) of a camera-relative bearing, not clamped to the image.
struct PixelPos {
  double row = 0.0;
  double col = 0.0;
};
PixelPos bearing_to_pixel(Bearing b, std::size_t image_size,
                          const FieldOfView& fov);
Bearing pixel_to_bearing(double row, double col, std::size_t image_size,
                         const FieldOfView& fov);

/// Binary 8-bit portable graymap of a [1,H,W] image.
void write_pgm(const std::filesystem::path& path, const Tensor& image);

}  // namespace actloc

#endif  // ACTLOC_WORLD_HPP_
