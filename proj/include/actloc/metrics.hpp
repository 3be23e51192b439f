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

#ifndef ACTLOC_METRICS_HPP_
#define ACTLOC_METRICS_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "actloc/geometry.hpp"
#include "actloc/tensor.hpp"

namespace actloc {

struct TrackingQualityParams {
  double rho_max = 250.0;
  double theta_max = deg_to_rad(90.0);
  double lambda = 1.0;
  bool relaxed_distance = false;

  void validate() const;
};

struct TrackingQuality {
  double raw = 0.0;     ///< before clamping
  double gamma = 0.0;   ///< clamped to [-1, 1]
  bool lost = false;    ///< raw <= -1
};

/// gamma = 1 - lambda |rho1 - rho2| / rho_max - lambda |theta1 - theta2| / theta_max.
/// In relaxed mode the distance term is lambda * (1 - [|rho1 - rho2| / rho_max <= 1]).
TrackingQuality tracking_quality_detail(const PolarOffset& current,
                                        const PolarOffset& ideal,
                                        const TrackingQualityParams& p);
double tracking_quality(const PolarOffset& current, const PolarOffset& ideal,
                        const TrackingQualityParams& p);

struct StepRecord {
  int step = 0;
  double gamma = 0.0;
  double gamma_relaxed = 0.0;
  bool lost = false;
  double aae_deg = 0.0;
  double auc = -1.0;  ///< negative when the action was not in the frame
  Bearing camera;
  Bearing action;
};

struct EpisodeMetrics {
  double recall = 0.0;
  double precision = 0.0;
  double precision_relaxed = 0.0;
  int steps_survived = 0;
  double aae_mean = 0.0;
  double auc_judd = 0.0;
};

EpisodeMetrics episode_metrics(std::span<const StepRecord> records,
                               int max_steps = 500);

/// Mean wrap-aware angular distance between paired bearings, in degrees.
double average_angular_error(std::span<const Bearing> pred,
                             std::span<const Bearing> gt);

struct Fixation {
  std::size_t row = 0;
  std::size_t col = 0;
};

/// AUC-Judd over an [H,W] saliency map. Thresholds are the saliency values at
/// the fixations; TPR counts fixations at or above the threshold and FPR
/// counts non-fixation pixels at or above it. The (FPR, TPR) points plus
/// (0,0) and (1,1) are integrated with the trapezoid rule. A constant map
/// scores 0.5.
double auc_judd(const Tensor& saliency, std::span<const Fixation> fixations);

/// Nearest-neighbour upsampling of an [h,w] map by an integer factor.
Tensor upsample_nearest(const Tensor& map, std::size_t factor);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};
/// Population standard deviation; an empty input gives zeros.
MeanStd mean_std(std::span<const double> xs);

}  // namespace actloc

#endif  // ACTLOC_METRICS_HPP_
