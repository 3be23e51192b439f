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

// Angular and polar arithmetic shared by the simulator, controller and
// metrics. All angles are radians.

#ifndef ACTLOC_GEOMETRY_HPP_
#define ACTLOC_GEOMETRY_HPP_

#include <cstddef>
#include <numbers>

namespace actloc {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Maps any finite angle into (-pi, pi].
double wrap_angle(double rad);

/// Angle normalized to (-pi, pi].
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double rad) : rad_(wrap_angle(rad)) {}
  static Angle degrees(double deg) { return Angle(deg_to_rad(deg)); }

  double rad() const { return rad_; }
  double deg() const { return rad_to_deg(rad_); }

  friend bool operator==(Angle, Angle) = default;

 private:
  double rad_ = 0.0;
};

/// Shortest unsigned separation of two angles, in [0, pi].
double angular_distance(Angle a, Angle b);
/// Signed shortest rotation taking `from` onto `to`, in (-pi, pi].
double angular_difference(Angle to, Angle from);

struct PolarOffset {
  double rho = 0.0;  ///< distance, world units, >= 0
  Angle theta;       ///< bearing relative to the forward axis
};

/// Pan/tilt direction pair. Pan grows to the right, tilt grows upward.
struct Bearing {
  double pan = 0.0;
  double tilt = 0.0;

  friend bool operator==(const Bearing&, const Bearing&) = default;
};

struct FieldOfView {
  double horizontal = deg_to_rad(90.0);
  double vertical = deg_to_rad(90.0);

  /// Throws unless both spans lie in (0, pi].
  void validate() const;
};

struct GridCell {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct GridShape {
  std::size_t rows = 14;
  std::size_t cols = 14;
};

/// Camera-relative bearing of a continuous grid position, where cell (i, j)
/// spans [i, i+1) x [j, j+1) and the grid covers the full field of view.
Bearing grid_point_to_bearing(double row, double col, GridShape grid,
                              const FieldOfView& fov);
/// Bearing of the centre of a cell. Throws for out-of-range cells.
Bearing grid_cell_to_bearing(GridCell cell, GridShape grid,
                             const FieldOfView& fov);
/// Cell containing a bearing; bearings outside the FOV clamp to the border.
GridCell bearing_to_grid_cell(Bearing b, GridShape grid, const FieldOfView& fov);

/// Euclidean magnitude of a (pan, tilt) offset with the pan part wrapped.
double bearing_magnitude(Bearing b);

}  // namespace actloc

#endif  // ACTLOC_GEOMETRY_HPP_
