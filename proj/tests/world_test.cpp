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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "actloc/world.hpp"
#include "test_util.hpp"

namespace actloc {
namespace {

using testing::source_path;

// One solid dominant actor parked at the scene centre.
const char* kMinimal = R"({
  "schema_version": 1,
  "name": "minimal",
  "mode": "pan_tilt",
  "duration": 100,
  "seed": 5,
  "actors": [
    {"name": "hero", "role": "dominant",
     "appearance": {"intensity": 0.9, "texture": "solid", "radius": 7},
     "waypoints": [[0, [82, 82]], [99, [82, 82]]]}
  ]
})";

Scenario minimal() { return parse_scenario(kMinimal); }

std::string expect_scenario_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ScenarioError for: " << text;
  return "";
}

TEST(LoadScenario, MinimalFile) {
  const Scenario s = minimal();
  ASSERT_EQ(s.actors.size(), 1u);
  EXPECT_EQ(s.actors[0].role, ActorRole::kDominant);
  EXPECT_EQ(s.mode, ScenarioMode::kPanTilt);
  EXPECT_EQ(s.duration, 100);
}

TEST(LoadScenario, OutOfOrderWaypointsNameTheActor) {
  std::string text = kMinimal;
  text.replace(text.find("[99,"), 4, "[0,");
  const std::string msg = expect_scenario_error(text);
  EXPECT_NE(msg.find("hero"), std::string::npos) << msg;
  EXPECT_NE(msg.find("actors[0].waypoints"), std::string::npos) << msg;
}

TEST(LoadScenario, ErrorsCarryFieldPaths) {
  std::string text = kMinimal;
  text.replace(text.find("\"radius\""), 8, "\"radios\"");
  EXPECT_NE(expect_scenario_error(text).find("actors[0].appearance.radios"),
            std::string::npos);

  text = kMinimal;
  text.replace(text.find("\"dominant\""), 10, "\"distractor\"");
  EXPECT_NE(expect_scenario_error(text).find("dominant"), std::string::npos);

  text = kMinimal;
  text.replace(text.find("\"duration\": 100"), 15, "\"duration\": 900");
  EXPECT_EQ(expect_scenario_error(text).rfind("duration", 0), 0u);

  EXPECT_NE(expect_scenario_error("{not json").find("invalid JSON"), std::string::npos);
  EXPECT_NE(expect_scenario_error(R"({"name": "x"})").find("schema_version"),
            std::string::npos);

  text = kMinimal;
  text.replace(text.find("[82, 82]]"), 8, "[900, 82]");
  EXPECT_NE(expect_scenario_error(text).find("bounds"), std::string::npos);
}

TEST(LoadScenario, MissingFile) {
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ScenarioError);
}

TEST(LoadScenario, BundledFixturesLoad) {
  for (const char* name : {"follower_basic", "sharp_turns", "clutter_multi_actor",
                           "lighting_change", "dual_dominant", "dueling_room_like"}) {
    SCOPED_TRACE(name);
    const Scenario s = load_scenario(source_path(std::string("scenarios/") + name + ".json"));
    EXPECT_EQ(s.name, name);
  }
}

TEST(LoadScenario, DuelingRoomLike) {
  const Scenario s = load_scenario(source_path("scenarios/dueling_room_like.json"));
  EXPECT_EQ(s.duration, 500);
  int dominant = 0, distractors = 0;
  for (const auto& a : s.actors) (a.role == ActorRole::kDominant ? dominant : distractors)++;
  EXPECT_EQ(dominant, 1);
  EXPECT_EQ(distractors, 0);
}

TEST(StepWorld, LinearInterpolation) {
  Scenario s = minimal();
  s.actors[0].waypoints = {{0, {0, 0}}, {10, {10, 0}}};
  const WorldState w = world_at(s, 5);
  EXPECT_DOUBLE_EQ(w.positions[0].x, 5.0);
  EXPECT_DOUBLE_EQ(w.positions[0].y, 0.0);
  // Before the first and after the last waypoint the actor holds position.
  EXPECT_EQ(world_at(s, 50).positions[0], (Vec2{10, 0}));
}

TEST(StepWorld, MatchesWorldAtAndStopsAtDuration) {
  const Scenario s = load_scenario(source_path("scenarios/sharp_turns.json"));
  WorldState w = initial_world(s);
  for (int t = 0; t < s.duration; ++t) {
    w = step_world(s, w);
    const WorldState direct = world_at(s, t + 1);
    ASSERT_EQ(w.step, t + 1);
    ASSERT_EQ(w.positions, direct.positions);
  }
  EXPECT_THROW(step_world(s, w), Error);
}

TEST(StepWorld, NoActorsOnlyAdvancesStep) {
  Scenario s = minimal();
  s.actors.clear();
  const WorldState w0 = initial_world(s);
  const WorldState w1 = step_world(s, w0);
  EXPECT_EQ(w1.step, 1);
  EXPECT_EQ(w1.lighting, w0.lighting);
  EXPECT_TRUE(w1.positions.empty());
}

TEST(StepWorld, LightingEventFromItsStep) {
  Scenario s = minimal();
  s.events.push_back(EventSpec{50, EventKind::kLighting, 1.4, 0});
  EXPECT_EQ(world_at(s, 49).lighting, 1.0);
  EXPECT_EQ(world_at(s, 50).lighting, 1.4);
  EXPECT_EQ(world_at(s, 99).lighting, 1.4);

  s.noise_sigma = 0.0;
  const CameraState cam = initial_camera(s);
  const double before = render(s, world_at(s, 49), cam).image.at(0, 0, 0);
  const double after = render(s, world_at(s, 50), cam).image.at(0, 0, 0);
  EXPECT_NEAR(after, before * 1.4, 1e-12);
}

TEST(StepWorld, SpawnAndDespawn) {
  Scenario s = minimal();
  s.actors.push_back(s.actors[0]);
  s.actors[1].role = ActorRole::kDistractor;
  s.events.push_back(EventSpec{10, EventKind::kSpawn, 1.0, 1});
  s.events.push_back(EventSpec{20, EventKind::kDespawn, 1.0, 1});
  EXPECT_FALSE(world_at(s, 9).present[1]);
  EXPECT_TRUE(world_at(s, 10).present[1]);
  EXPECT_FALSE(world_at(s, 20).present[1]);
  EXPECT_TRUE(world_at(s, 20).present[0]);
}

TEST(Render, EmptyWorldIsBackgroundPlusNoise) {
  Scenario s = minimal();
  s.actors.clear();
  const Tensor img = render(s, initial_world(s), initial_camera(s)).image;
  EXPECT_EQ(img.shape(), (Shape{1, 112, 112}));
  double mean = 0.0, var = 0.0;
  for (double v : img.data()) mean += v;
  mean /= static_cast<double>(img.size());
  for (double v : img.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(img.size());
  EXPECT_NEAR(mean, s.background, 0.002);
  EXPECT_NEAR(std::sqrt(var), s.noise_sigma, 0.002);
  for (double v : img.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Render, CentredActorGivesCentredBlob) {
  Scenario s = minimal();
  s.noise_sigma = 0.0;
  const Tensor img = render(s, initial_world(s), initial_camera(s)).image;
  double wsum = 0.0, rsum = 0.0, csum = 0.0;
  for (std::size_t r = 0; r < 112; ++r) {
    for (std::size_t c = 0; c < 112; ++c) {
      const double w = img.at(0, r, c) - s.background;
      wsum += w;
      rsum += w * (static_cast<double>(r) + 0.5);
      csum += w * (static_cast<double>(c) + 0.5);
    }
  }
  ASSERT_GT(wsum, 0.0);
  EXPECT_NEAR(rsum / wsum, 56.0, 1.0);
  EXPECT_NEAR(csum / wsum, 56.0, 1.0);
  EXPECT_NEAR(img.at(0, 56, 56), 0.9, 1e-12);
}

TEST(Render, FullyOccludedActorIsInvisible) {
  Scenario s = minimal();
  OccluderSpec occ;
  occ.center = {82, 82};
  occ.radius = 15;
  s.occluders.push_back(occ);
  Scenario empty = s;
  empty.actors.clear();
  const CameraState cam = initial_camera(s);
  EXPECT_EQ(render(s, initial_world(s), cam).image,
            render(empty, initial_world(empty), cam).image);
  const GroundTruth gt = ground_truth(s, initial_world(s), cam);
  EXPECT_FALSE(gt.visible);
  EXPECT_EQ(gt.actor, 0);
}

TEST(Render, IsLocalToTheFieldOfView) {
  Scenario s = minimal();
  ActorSpec far = s.actors[0];
  far.role = ActorRole::kDistractor;
  far.waypoints = {{0, {5, 5}}};
  s.actors.push_back(far);
  Scenario moved = s;
  moved.actors[1].waypoints = {{0, {10, 150}}};
  moved.actors[1].appearance.intensity = 0.1;
  const CameraState cam = initial_camera(s);
  EXPECT_EQ(render(s, initial_world(s), cam).image,
            render(moved, initial_world(moved), cam).image);
}

TEST(Render, DeterministicAcrossCalls) {
  const Scenario s = realize_scenario(
      load_scenario(source_path("scenarios/clutter_multi_actor.json")), 3);
  CameraState cam = initial_camera(s);
  cam.orientation = {deg_to_rad(12), deg_to_rad(-7)};
  for (int t : {0, 17, 230}) {
    EXPECT_EQ(render(s, world_at(s, t), cam).image, render(s, world_at(s, t), cam).image);
  }
  const Scenario other = realize_scenario(
      load_scenario(source_path("scenarios/clutter_multi_actor.json")), 4);
  EXPECT_NE(render(s, world_at(s, 0), cam).image,
            render(other, world_at(other, 0), cam).image);
}

TEST(Render, FollowerModeShowsTargetAhead) {
  const Scenario s = load_scenario(source_path("scenarios/follower_basic.json"));
  const WorldState w = initial_world(s);
  const CameraState cam = initial_camera(s);
  const GroundTruth gt = ground_truth(s, w, cam);
  ASSERT_TRUE(gt.visible);
  EXPECT_NEAR(gt.offset.rho, s.ideal_distance, 40.0);
  EXPECT_LT(gt.bearing.tilt, 0.0);
  const ObservationFrame f = render(s, w, cam);
  const PixelPos p = bearing_to_pixel(gt.bearing, s.image_size, cam.fov);
  const auto r = static_cast<std::size_t>(p.row), c = static_cast<std::size_t>(p.col);
  EXPECT_GT(std::abs(f.image.at(0, r, c) - s.background), 0.1);
}

TEST(GroundTruth, CentreAndOutsideFov) {
  Scenario s = minimal();
  CameraState cam = initial_camera(s);
  GroundTruth gt = ground_truth(s, initial_world(s), cam);
  EXPECT_NEAR(gt.bearing.pan, 0.0, 1e-12);
  EXPECT_NEAR(gt.bearing.tilt, 0.0, 1e-12);
  EXPECT_TRUE(gt.visible);

  s.actors[0].waypoints = {{0, {160, 82}}};
  gt = ground_truth(s, initial_world(s), cam);
  EXPECT_FALSE(gt.visible);
  EXPECT_NEAR(rad_to_deg(gt.bearing.pan), (160.0 / 164.0 - 0.5) * 164.0, 1e-9);
}

TEST(GroundTruth, NearestOfTwoDominants) {
  Scenario s = minimal();
  ActorSpec second = s.actors[0];
  second.name = "near";
  second.waypoints = {{0, {90, 82}}};
  s.actors[0].waypoints = {{0, {120, 82}}};
  s.actors.push_back(second);
  EXPECT_EQ(ground_truth(s, initial_world(s), initial_camera(s)).actor, 1);
  s.actors.clear();
  EXPECT_EQ(ground_truth(s, initial_world(s), initial_camera(s)).actor, -1);
}

TEST(ApplyCommand, RateAndTravelLimits) {
  ActuatorLimits lim;
  lim.max_rate = deg_to_rad(4);
  lim.pan_limit = deg_to_rad(60);
  lim.tilt_limit = deg_to_rad(60);
  CameraState cam;
  ApplyResult r = apply_command(ScenarioMode::kPanTilt, lim, {164, 164}, cam, {0, 0});
  EXPECT_EQ(r.camera.orientation, cam.orientation);
  EXPECT_FALSE(r.clamped);

  r = apply_command(ScenarioMode::kPanTilt, lim, {164, 164}, cam, {deg_to_rad(10), 0});
  EXPECT_NEAR(r.camera.orientation.pan, deg_to_rad(4), 1e-15);
  EXPECT_TRUE(r.clamped);

  cam.orientation.pan = deg_to_rad(60);
  r = apply_command(ScenarioMode::kPanTilt, lim, {164, 164}, cam, {deg_to_rad(3), 0});
  EXPECT_EQ(r.camera.orientation.pan, deg_to_rad(60));
  EXPECT_EQ(r.applied.a, 0.0);
}

TEST(ApplyCommand, RateLimitIsNeverExceeded) {
  const Scenario s = minimal();
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CameraState cam = initial_camera(s);
  for (int i = 0; i < 1000; ++i) {
    const ApplyResult r = apply_command(s, cam, {u(rng), u(rng)});
    EXPECT_LE(std::abs(r.camera.orientation.pan - cam.orientation.pan),
              s.camera.limits.max_rate + 1e-15);
    EXPECT_LE(std::abs(r.camera.orientation.pan), s.camera.limits.pan_limit);
    EXPECT_LE(std::abs(r.camera.orientation.tilt), s.camera.limits.tilt_limit);
    cam = r.camera;
  }
}

TEST(ApplyCommand, AccelerationLimit) {
  ActuatorLimits lim;
  lim.max_accel = deg_to_rad(1);
  CameraState cam;
  ApplyResult r = apply_command(ScenarioMode::kPanTilt, lim, {164, 164}, cam, {deg_to_rad(6), 0});
  EXPECT_NEAR(r.camera.orientation.pan, deg_to_rad(1), 1e-15);
  r = apply_command(ScenarioMode::kPanTilt, lim, {164, 164}, r.camera, {deg_to_rad(6), 0});
  EXPECT_NEAR(r.camera.orientation.pan, deg_to_rad(3), 1e-15);
}

TEST(ApplyCommand, FirstOrderResponse) {
  ActuatorLimits lim;
  lim.response = 0.5;
  CameraState cam;
  ApplyResult r = apply_command(ScenarioMode::kPanTilt, lim, {164, 164}, cam, {deg_to_rad(4), 0});
  EXPECT_NEAR(r.camera.orientation.pan, deg_to_rad(2), 1e-15);
  r = apply_command(ScenarioMode::kPanTilt, lim, {164, 164}, r.camera, {deg_to_rad(4), 0});
  EXPECT_NEAR(r.camera.rate.pan, deg_to_rad(3), 1e-15);
  std::string text = kMinimal;
  text.replace(text.find("\"actors\""), 0, R"("camera": {"response": 1.5}, )");
  EXPECT_NE(expect_scenario_error(text).find("camera.response"), std::string::npos);
}

TEST(ApplyCommand, FollowerTurnAndSpeed) {
  const Scenario s = load_scenario(source_path("scenarios/follower_basic.json"));
  CameraState cam = initial_camera(s);
  cam.position = {1000, 1000};
  cam.heading = 0.0;
  const ApplyResult r = apply_command(s, cam, {deg_to_rad(90), 50.0});
  EXPECT_NEAR(r.camera.heading, -s.camera.limits.max_turn, 1e-12);
  EXPECT_NEAR(r.camera.speed, s.camera.limits.max_speed, 1e-9);
  EXPECT_TRUE(r.clamped);
  const ApplyResult back = apply_command(s, cam, {0.0, -5.0});
  EXPECT_EQ(back.camera.position, cam.position);
}

TEST(Coverage, PanTiltSeesAboutThirtyPercent) {
  Scenario s = minimal();
  const CameraState cam = initial_camera(s);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 164.0);
  int visible = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    s.actors[0].waypoints = {{0, {u(rng), u(rng)}}};
    visible += ground_truth(s, initial_world(s), cam).visible ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(visible) / n, 0.30, 0.02);
}

TEST(RealizeScenario, SeedsAndJitter) {
  const Scenario base = load_scenario(source_path("scenarios/clutter_multi_actor.json"));
  const Scenario a = realize_scenario(base, 1), b = realize_scenario(base, 1);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.actors[0].waypoints[0].position, b.actors[0].waypoints[0].position);
  EXPECT_NE(a.seed, realize_scenario(base, 2).seed);
  for (std::size_t i = 0; i < base.actors.size(); ++i) {
    const Vec2 p = base.actors[i].waypoints[0].position;
    const Vec2 q = a.actors[i].waypoints[0].position;
    EXPECT_LE(std::abs(p.x - q.x), base.waypoint_jitter + 1e-12);
    EXPECT_LE(std::abs(p.y - q.y), base.waypoint_jitter + 1e-12);
  }
  Scenario still = base;
  still.waypoint_jitter = 0.0;
  EXPECT_EQ(realize_scenario(still, 9).actors[0].waypoints[0].position,
            base.actors[0].waypoints[0].position);
}

TEST(WritePgm, HeaderAndPayload) {
  const auto dir = testing::scratch_dir("pgm");
  Tensor img(Shape{1, 2, 3}, {0.0, 0.5, 1.0, 0.25, 0.75, 1.0});
  write_pgm(dir / "f.pgm", img);
  std::ifstream in(dir / "f.pgm", std::ios::binary);
  std::string magic;
  int w, h, maxv;
  in >> magic >> w >> h >> maxv;
  in.get();
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(w, 3);
  EXPECT_EQ(h, 2);
  EXPECT_EQ(maxv, 255);
  std::string payload((std::istreambuf_iterator<char>(in)), {});
  ASSERT_EQ(payload.size(), 6u);
  EXPECT_EQ(static_cast<unsigned char>(payload[1]), 128);
  EXPECT_EQ(static_cast<unsigned char>(payload[2]), 255);
  EXPECT_THROW(write_pgm(dir / "g.pgm", Tensor(Shape{2, 2})), Error);
}

}  // namespace
}  // namespace actloc
