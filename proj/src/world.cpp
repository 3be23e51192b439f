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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "actloc/seeding.hpp"
#include "actloc/world.hpp"

namespace actloc {
namespace {

Vec2 interpolate(const std::vector<Waypoint>& wps, double step) {
  if (step <= wps.front().step) return wps.front().position;
  if (step >= wps.back().step) return wps.back().position;
  for (std::size_t k = 1; k < wps.size(); ++k) {
    if (step <= wps[k].step) {
      const Waypoint& a = wps[k - 1];
      const Waypoint& b = wps[k];
      const double t = (step - a.step) / static_cast<double>(b.step - a.step);
      return Vec2{a.position.x + t * (b.position.x - a.position.x),
                  a.position.y + t * (b.position.y - a.position.y)};
    }
  }
  return wps.back().position;
}

// Drawable in camera-relative angular coordinates.
struct Sprite {
  Bearing center;
  double radius = 0.0;  // disc angular radius
  bool rect = false;
  double half_pan = 0.0;
  double half_tilt = 0.0;
  double intensity = 0.0;
  Texture texture = Texture::kSolid;
  double orientation = 0.0;  // stripe normal direction in the image plane
  double depth = 0.0;
  bool occluder = false;
};

double texture_value(Texture tex, double u, double v, double orientation,
                     int step) {
  switch (tex) {
    case Texture::kSolid:
      return 1.0;
    case Texture::kRings:
      return 0.6 + 0.4 * std::cos(2.0 * kPi * 2.0 * std::hypot(u, v));
    case Texture::kPulse:
      return 0.55 + 0.45 * std::sin(2.0 * kPi * step / 8.0);
    case Texture::kStripes: {
      const double s = u * std::cos(orientation) + v * std::sin(orientation);
      return 0.5 + 0.5 * std::sin(2.0 * kPi * (1.5 * s - step / 4.0));
    }
    case Texture::kChecker:
      return (std::sin(3.0 * kPi * u) * std::sin(3.0 * kPi * v)) >= 0 ? 1.0 : 0.35;
  }
  return 1.0;
}

// Scene coordinates to absolute pan/tilt (pan_tilt mode).
Bearing scene_to_bearing(const Scenario& s, Vec2 p) {
  return Bearing{(p.x / s.scene_size.x - 0.5) * s.scene_span.x,
                 (p.y / s.scene_size.y - 0.5) * s.scene_span.y};
}

double scene_angular_scale(const Scenario& s) {
  return s.scene_span.x / s.scene_size.x;
}

// Follower projection of a ground point. Returns false when behind the agent.
bool project_follower(const Scenario& s, const CameraState& cam, Vec2 p,
                      double radius, Bearing& center, double& ang_radius,
                      double& dist) {
  const double dx = p.x - cam.position.x;
  const double dy = p.y - cam.position.y;
  dist = std::hypot(dx, dy);
  if (dist < 1e-6) return false;
  const double rel = wrap_angle(std::atan2(dy, dx) - cam.heading);
  if (std::abs(rel) >= kPi / 2.0) return false;
  center.pan = -rel;
  center.tilt = -std::atan2(s.camera.height, dist);
  ang_radius = std::atan2(radius, dist);
  return true;
}

std::vector<Sprite> collect_sprites(const Scenario& s, const WorldState& w,
                                    const CameraState& cam) {
  std::vector<Sprite> sprites;
  const bool pan_tilt = s.mode == ScenarioMode::kPanTilt;
  for (std::size_t i = 0; i < s.actors.size(); ++i) {
    if (!w.present[i]) continue;
    const ActorSpec& a = s.actors[i];
    Sprite sp;
    sp.intensity = a.appearance.intensity;
    sp.texture = a.appearance.texture;
    const Vec2 v = w.velocities[i];
    if (pan_tilt) {
      const Bearing abs = scene_to_bearing(s, w.positions[i]);
      sp.center = Bearing{abs.pan - cam.orientation.pan,
                          abs.tilt - cam.orientation.tilt};
      sp.radius = a.appearance.radius * scene_angular_scale(s);
      sp.depth = 1.0 + static_cast<double>(s.actors.size() - i) * 1e-3;
      sp.orientation = std::atan2(v.y, v.x);
    } else {
      if (!project_follower(s, cam, w.positions[i], a.appearance.radius,
                            sp.center, sp.radius, sp.depth)) {
        continue;
      }
      sp.orientation = std::atan2(v.y, v.x) - cam.heading;
    }
    sprites.push_back(sp);
  }
  for (const OccluderSpec& o : s.occluders) {
    Sprite sp;
    sp.occluder = true;
    sp.intensity = o.intensity;
    if (pan_tilt) {
      const Bearing abs = scene_to_bearing(s, o.center);
      sp.center = Bearing{abs.pan - cam.orientation.pan,
                          abs.tilt - cam.orientation.tilt};
      sp.depth = 0.5;
      if (o.shape == OccluderSpec::Shape::kRect) {
        sp.rect = true;
        sp.half_pan = o.half_size.x * s.scene_span.x / s.scene_size.x;
        sp.half_tilt = o.half_size.y * s.scene_span.y / s.scene_size.y;
      } else {
        sp.radius = o.radius * scene_angular_scale(s);
      }
    } else if (!project_follower(s, cam, o.center, o.radius, sp.center,
                                 sp.radius, sp.depth)) {
      continue;
    }
    sprites.push_back(sp);
  }
  // Far to near; stable so equal depths keep declaration order.
  std::stable_sort(sprites.begin(), sprites.end(),
                   [](const Sprite& a, const Sprite& b) { return a.depth > b.depth; });
  return sprites;
}

bool covers(const Sprite& sp, Bearing b) {
  const double dp = b.pan - sp.center.pan;
  const double dt = b.tilt - sp.center.tilt;
  if (sp.rect) return std::abs(dp) <= sp.half_pan && std::abs(dt) <= sp.half_tilt;
  return dp * dp + dt * dt <= sp.radius * sp.radius;
}

}  // namespace

WorldState world_at(const Scenario& s, int step) {
  WorldState w;
  w.step = step;
  const std::size_t n = s.actors.size();
  w.positions.resize(n);
  w.velocities.resize(n);
  w.present.assign(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& wps = s.actors[i].waypoints;
    w.positions[i] = interpolate(wps, step);
    const Vec2 prev = interpolate(wps, step - 1);
    const Vec2 next = interpolate(wps, step + 1);
    // Direction of travel, preferring the upcoming segment.
    w.velocities[i] = Vec2{next.x - w.positions[i].x, next.y - w.positions[i].y};
    if (w.velocities[i].x == 0.0 && w.velocities[i].y == 0.0) {
      w.velocities[i] = Vec2{w.positions[i].x - prev.x, w.positions[i].y - prev.y};
    }
  }
  // Actors with a spawn event are absent until it fires.
  for (const EventSpec& e : s.events) {
    if (e.kind == EventKind::kSpawn) w.present[e.actor] = false;
  }
  std::vector<const EventSpec*> ordered;
  for (const EventSpec& e : s.events) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const EventSpec* a, const EventSpec* b) { return a->step < b->step; });
  for (const EventSpec* e : ordered) {
    if (e->step > step) break;
    switch (e->kind) {
      case EventKind::kLighting: w.lighting = e->factor; break;
      case EventKind::kSpawn: w.present[e->actor] = true; break;
      case EventKind::kDespawn: w.present[e->actor] = false; break;
    }
  }
  return w;
}

WorldState initial_world(const Scenario& s) { return world_at(s, 0); }

WorldState step_world(const Scenario& s, const WorldState& w) {
  if (w.step >= s.duration) {
    throw Error("step_world: step " + std::to_string(w.step) +
                " is at or past the scenario duration " +
                std::to_string(s.duration));
  }
  return world_at(s, w.step + 1);
}

CameraState initial_camera(const Scenario& s) {
  CameraState cam;
  cam.fov = s.camera.fov;
  cam.orientation = s.camera.initial;
  cam.position = s.camera.start_position;
  cam.heading = wrap_angle(s.camera.start_heading);
  return cam;
}

namespace {

// Lagged, acceleration- and rate-limited change toward a requested delta.
double limit_delta(double requested, double prev_rate, double max_rate,
                   double max_accel, double response) {
  double d = response == 1.0 ? requested : prev_rate + response * (requested - prev_rate);
  if (max_accel > 0.0) d = std::clamp(d, prev_rate - max_accel, prev_rate + max_accel);
  return std::clamp(d, -max_rate, max_rate);
}

}  // namespace

ApplyResult apply_command(ScenarioMode mode, const ActuatorLimits& lim,
                          const Vec2& scene_size, const CameraState& cam,
                          const ControlCommand& cmd) {
  ApplyResult r;
  r.camera = cam;
  ControlCommand req = cmd;
  if (!std::isfinite(req.a)) req.a = 0.0;
  if (!std::isfinite(req.b)) req.b = 0.0;
  if (mode == ScenarioMode::kPanTilt) {
    const double dp = limit_delta(req.a, cam.rate.pan, lim.max_rate, lim.max_accel, lim.response);
    const double dt = limit_delta(req.b, cam.rate.tilt, lim.max_rate, lim.max_accel, lim.response);
    const double pan = std::clamp(cam.orientation.pan + dp, -lim.pan_limit, lim.pan_limit);
    const double tilt = std::clamp(cam.orientation.tilt + dt, -lim.tilt_limit, lim.tilt_limit);
    r.applied = ControlCommand{pan - cam.orientation.pan, tilt - cam.orientation.tilt};
    r.camera.orientation = Bearing{pan, tilt};
    r.camera.rate = Bearing{r.applied.a, r.applied.b};
  } else {
    const double turn = limit_delta(req.a, cam.turn_rate, lim.max_turn, lim.max_accel, lim.response);
    const double speed = std::clamp(req.b, 0.0, lim.max_speed);
    r.camera.heading = wrap_angle(cam.heading - turn);
    r.camera.turn_rate = turn;
    Vec2 p{cam.position.x + speed * std::cos(r.camera.heading),
           cam.position.y + speed * std::sin(r.camera.heading)};
    p.x = std::clamp(p.x, 0.0, scene_size.x);
    p.y = std::clamp(p.y, 0.0, scene_size.y);
    r.camera.position = p;
    r.camera.speed = std::hypot(p.x - cam.position.x, p.y - cam.position.y);
    r.applied = ControlCommand{turn, r.camera.speed};
  }
  r.clamped = r.applied.a != cmd.a || r.applied.b != cmd.b;
  return r;
}

ApplyResult apply_command(const Scenario& s, const CameraState& cam,
                          const ControlCommand& cmd) {
  return apply_command(s.mode, s.camera.limits, s.scene_size, cam, cmd);
}

PixelPos bearing_to_pixel(Bearing b, std::size_t image_size,
                          const FieldOfView& fov) {
  const double n = static_cast<double>(image_size);
  return PixelPos{(-b.tilt / fov.vertical + 0.5) * n,
                  (b.pan / fov.horizontal + 0.5) * n};
}

Bearing pixel_to_bearing(double row, double col, std::size_t image_size,
                         const FieldOfView& fov) {
  const double n = static_cast<double>(image_size);
  return Bearing{(col / n - 0.5) * fov.horizontal,
                 -(row / n - 0.5) * fov.vertical};
}

ObservationFrame render(const Scenario& s, const WorldState& w,
                        const CameraState& cam) {
  const std::size_t n = s.image_size;
  const FieldOfView& fov = cam.fov;
  Tensor img(Shape{1, n, n}, s.background);
  auto px = img.data();
  const std::vector<Sprite> sprites = collect_sprites(s, w, cam);
  const double deg_per_px_h = fov.horizontal / static_cast<double>(n);
  const double deg_per_px_v = fov.vertical / static_cast<double>(n);
  for (const Sprite& sp : sprites) {
    const double ext_pan = sp.rect ? sp.half_pan : sp.radius;
    const double ext_tilt = sp.rect ? sp.half_tilt : sp.radius;
    const PixelPos c = bearing_to_pixel(sp.center, n, fov);
    const double rpx_h = ext_pan / deg_per_px_h + 1.0;
    const double rpx_v = ext_tilt / deg_per_px_v + 1.0;
    const long r0 = std::max(0L, static_cast<long>(std::floor(c.row - rpx_v)));
    const long r1 = std::min(static_cast<long>(n) - 1,
                             static_cast<long>(std::ceil(c.row + rpx_v)));
    const long c0 = std::max(0L, static_cast<long>(std::floor(c.col - rpx_h)));
    const long c1 = std::min(static_cast<long>(n) - 1,
                             static_cast<long>(std::ceil(c.col + rpx_h)));
    for (long r = r0; r <= r1; ++r) {
      for (long col = c0; col <= c1; ++col) {
        const Bearing pb = pixel_to_bearing(r + 0.5, col + 0.5, n, fov);
        if (!covers(sp, pb)) continue;
        double value = sp.intensity;
        if (!sp.occluder) {
          const double u = (pb.pan - sp.center.pan) / sp.radius;
          const double v = (pb.tilt - sp.center.tilt) / sp.radius;
          value *= texture_value(sp.texture, u, v, sp.orientation, w.step);
        }
        px[static_cast<std::size_t>(r) * n + static_cast<std::size_t>(col)] = value;
      }
    }
  }
  std::mt19937_64 rng(mix_seed(s.seed, static_cast<std::uint64_t>(w.step)));
  std::normal_distribution<double> noise(0.0, s.noise_sigma);
  for (double& v : px) {
    v *= w.lighting;
    if (s.noise_sigma > 0.0) v += noise(rng);
    v = std::clamp(v, 0.0, 1.0);
  }
  return ObservationFrame{std::move(img), w.step, cam};
}

GroundTruth ground_truth(const Scenario& s, const WorldState& w,
                         const CameraState& cam) {
  GroundTruth best;
  double best_key = std::numeric_limits<double>::infinity();
  const bool pan_tilt = s.mode == ScenarioMode::kPanTilt;
  for (std::size_t i = 0; i < s.actors.size(); ++i) {
    if (s.actors[i].role != ActorRole::kDominant || !w.present[i]) continue;
    GroundTruth gt;
    gt.actor = static_cast<int>(i);
    double key;
    double depth;
    if (pan_tilt) {
      const Bearing abs = scene_to_bearing(s, w.positions[i]);
      gt.bearing = Bearing{abs.pan - cam.orientation.pan,
                           abs.tilt - cam.orientation.tilt};
      gt.offset = PolarOffset{0.0, Angle(bearing_magnitude(gt.bearing))};
      key = bearing_magnitude(gt.bearing);
      depth = 1.0;
    } else {
      const double dx = w.positions[i].x - cam.position.x;
      const double dy = w.positions[i].y - cam.position.y;
      const double dist = std::hypot(dx, dy);
      const double rel = -wrap_angle(std::atan2(dy, dx) - cam.heading);
      gt.bearing = Bearing{rel, -std::atan2(s.camera.height, dist)};
      gt.offset = PolarOffset{dist, Angle(rel)};
      key = dist;
      depth = dist;
    }
    gt.visible = std::abs(gt.bearing.pan) <= cam.fov.horizontal / 2.0 &&
                 std::abs(gt.bearing.tilt) <= cam.fov.vertical / 2.0;
    if (gt.visible) {
      for (const Sprite& sp : collect_sprites(s, w, cam)) {
        if (sp.occluder && sp.depth < depth && covers(sp, gt.bearing)) {
          gt.visible = false;
          break;
        }
      }
    }
    if (key < best_key) {
      best_key = key;
      best = gt;
    }
  }
  return best;
}

void write_pgm(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 1) {
    throw Error("write_pgm: expected [1,H,W] image, got " +
                shape_string(image.shape()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_pgm: cannot open " + path.string());
  const std::size_t h = image.dim(1), w = image.dim(2);
  out << "P5\n" << w << " " << h << "\n255\n";
  for (double v : image.data()) {
    const auto byte = static_cast<unsigned char>(
        std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    out.put(static_cast<char>(byte));
  }
}

}  // namespace actloc
