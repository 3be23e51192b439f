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

// Comparison agents. Each emits one camera-relative bearing per step and
// feeds the same controller and world as the learned agent.

#ifndef ACTLOC_BASELINES_HPP_
#define ACTLOC_BASELINES_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "actloc/geometry.hpp"
#include "actloc/tensor.hpp"
#include "actloc/world.hpp"

namespace actloc {

enum class BaselineKind { kRandom, kOracle, kTemplateNcc };

const char* to_string(BaselineKind kind);

/// Uniform in [-spread, spread] on both axes around `center`.
Bearing random_bearing(std::mt19937_64& rng, double spread,
                       Bearing center = {});

/// Camera-relative bearing of the nearest dominant actor.
Bearing oracle_bearing(const GroundTruth& gt);

struct TemplateOptions {
  std::size_t side = 15;          ///< odd
  std::size_t search_radius = 28; ///< pixels around the last match
  double blend_rate = 0.1;
  double confidence_threshold = 0.5;
  int reacquire_after = 10;
};

struct TemplateState {
  Tensor patch;            ///< [side, side]
  std::size_t row = 0;     ///< centre pixel of the last match
  std::size_t col = 0;
  double confidence = 0.0;
  int low_confidence_steps = 0;
  bool initialized = false;
};

struct TemplateResult {
  /// Empty when the match is not trusted; the controller then holds.
  std::optional<Bearing> bearing;
  double confidence = 0.0;
  Tensor response;  ///< NCC score per pixel, -1 outside the search window
  TemplateState state;
};

/// Zero-mean normalized cross-correlation of two equal-size patches. A flat
/// patch on either side gives 0.
double ncc(std::span<const double> a, std::span<const double> b);

/// Centre of the brightest blob: the pixel maximising the box-filtered
/// intensity over a side x side window.
GridCell brightest_blob(const Tensor& image, std::size_t side);

/// side x side crop centred on (row, col), edge-clamped.
Tensor crop_patch(const Tensor& image, std::size_t row, std::size_t col,
                  std::size_t side);

TemplateState seed_template(const Tensor& image, const TemplateOptions& opts);

TemplateResult template_track(const ObservationFrame& frame,
                              const TemplateState& state,
                              const TemplateOptions& opts = {});

/// Isotropic Gaussian bump centred at a pixel, used as the saliency map of
/// agents that only output a point.
Tensor gaussian_saliency(std::size_t size, PixelPos center, double sigma);

}  // namespace actloc

#endif  // ACTLOC_BASELINES_HPP_
