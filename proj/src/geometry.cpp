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

#include "actloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "actloc/tensor.hpp"

namespace actloc {

double wrap_angle(double rad) {
  double r = std::fmod(rad, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

double angular_distance(Angle a, Angle b) {
  return std::abs(wrap_angle(a.rad() - b.rad()));
}

double angular_difference(Angle to, Angle from) {
  return wrap_angle(to.rad() - from.rad());
}

void FieldOfView::validate() const {
  if (!(horizontal > 0.0 && horizontal <= kPi) ||
      !(vertical > 0.0 && vertical <= kPi)) {
    throw Error("field of view spans must lie in (0, pi]");
  }
}

Bearing grid_point_to_bearing(double row, double col, GridShape grid,
                              const FieldOfView& fov) {
  const double u = col / static_cast<double>(grid.cols) - 0.5;
  const double v = row / static_cast<double>(grid.rows) - 0.5;
  // Row index grows downward, tilt grows upward.
  return Bearing{u * fov.horizontal, -v * fov.vertical};
}

Bearing grid_cell_to_bearing(GridCell cell, GridShape grid,
                             const FieldOfView& fov) {
  if (cell.row >= grid.rows || cell.col >= grid.cols) {
    throw Error("grid cell (" + std::to_string(cell.row) + "," +
                std::to_string(cell.col) + ") outside " +
                std::to_string(grid.rows) + "x" + std::to_string(grid.cols) +
                " grid");
  }
  return grid_point_to_bearing(static_cast<double>(cell.row) + 0.5,
                               static_cast<double>(cell.col) + 0.5, grid, fov);
}

GridCell bearing_to_grid_cell(Bearing b, GridShape grid,
                              const FieldOfView& fov) {
  const double col = (b.pan / fov.horizontal + 0.5) * static_cast<double>(grid.cols);
  const double row = (-b.tilt / fov.vertical + 0.5) * static_cast<double>(grid.rows);
  auto to_index = [](double x, std::size_t n) {
    const double f = std::floor(x);
    return static_cast<std::size_t>(
        std::clamp(f, 0.0, static_cast<double>(n - 1)));
  };
  return GridCell{to_index(row, grid.rows), to_index(col, grid.cols)};
}

double bearing_magnitude(Bearing b) {
  return std::hypot(wrap_angle(b.pan), b.tilt);
}

}  // namespace actloc
