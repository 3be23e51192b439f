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

#include "actloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace actloc {

void TrackingQualityParams::validate() const {
  if (!(rho_max > 0.0) || !(theta_max > 0.0) || !(lambda > 0.0)) {
    throw Error("tracking quality parameters must be positive");
  }
}

TrackingQuality tracking_quality_detail(const PolarOffset& current,
                                        const PolarOffset& ideal,
                                        const TrackingQualityParams& p) {
  const double dist_ratio = std::abs(current.rho - ideal.rho) / p.rho_max;
  const double dist_term =
      p.relaxed_distance ? p.lambda * (dist_ratio <= 1.0 ? 0.0 : 1.0)
                         : p.lambda * dist_ratio;
  const double angle_term =
      p.lambda * angular_distance(current.theta, ideal.theta) / p.theta_max;
  TrackingQuality q;
  q.raw = 1.0 - dist_term - angle_term;
  q.gamma = std::clamp(q.raw, -1.0, 1.0);
  q.lost = q.raw <= -1.0;
  return q;
}

double tracking_quality(const PolarOffset& current, const PolarOffset& ideal,
                        const TrackingQualityParams& p) {
  return tracking_quality_detail(current, ideal, p).gamma;
}

EpisodeMetrics episode_metrics(std::span<const StepRecord> records,
                               int max_steps) {
  EpisodeMetrics m;
  if (records.empty() || max_steps <= 0) return m;
  m.steps_survived = static_cast<int>(records.size());
  m.recall = std::min(1.0, static_cast<double>(records.size()) / max_steps);
  double g = 0.0, gr = 0.0, aae = 0.0, auc = 0.0;
  int auc_n = 0;
  for (const StepRecord& r : records) {
    g += r.gamma;
    gr += r.gamma_relaxed;
    aae += r.aae_deg;
    if (r.auc >= 0.0) {
      auc += r.auc;
      ++auc_n;
    }
  }
  const double n = static_cast<double>(records.size());
  m.precision = g / n;
  m.precision_relaxed = gr / n;
  m.aae_mean = aae / n;
  m.auc_judd = auc_n > 0 ? auc / auc_n : 0.5;
  return m;
}

double average_angular_error(std::span<const Bearing> pred,
                             std::span<const Bearing> gt) {
  if (pred.size() != gt.size()) {
    throw Error("average_angular_error: length mismatch " +
                std::to_string(pred.size()) + " vs " + std::to_string(gt.size()));
  }
  if (pred.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    total += bearing_magnitude(Bearing{wrap_angle(pred[i].pan - gt[i].pan),
                                       pred[i].tilt - gt[i].tilt});
  }
  return rad_to_deg(total / static_cast<double>(pred.size()));
}

double auc_judd(const Tensor& saliency, std::span<const Fixation> fixations) {
  if (saliency.rank() != 2) {
    throw Error("auc_judd: expected [H,W] map, got " +
                shape_string(saliency.shape()));
  }
  if (fixations.empty()) throw Error("auc_judd: at least one fixation required");
  const std::size_t h = saliency.dim(0), w = saliency.dim(1);
  auto values = saliency.data();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return 0.5;

  std::vector<char> is_fix(values.size(), 0);
  std::vector<double> fix_values;
  fix_values.reserve(fixations.size());
  for (const Fixation& f : fixations) {
    if (f.row >= h || f.col >= w) {
      throw Error("auc_judd: fixation (" + std::to_string(f.row) + "," +
                  std::to_string(f.col) + ") outside map");
    }
    // Repeated fixations on one pixel count once, as in a binary fixation map.
    if (is_fix[f.row * w + f.col]) continue;
    is_fix[f.row * w + f.col] = 1;
    fix_values.push_back(values[f.row * w + f.col]);
  }
  std::vector<double> negatives;
  negatives.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!is_fix[i]) negatives.push_back(values[i]);
  }
  // Sorted descending, counts of values >= t come from upper_bound on the
  // reversed order.
  std::sort(negatives.begin(), negatives.end(), std::greater<>());
  std::vector<double> thresholds = fix_values;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  std::vector<double> fix_sorted = thresholds;

  auto count_ge = [](const std::vector<double>& desc, double t) {
    return static_cast<double>(
        std::upper_bound(desc.begin(), desc.end(), t, std::greater<>()) -
        desc.begin());
  };
  const double n_fix = static_cast<double>(fix_values.size());
  const double n_neg = static_cast<double>(negatives.size());
  double area = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (double t : thresholds) {
    const double tpr = count_ge(fix_sorted, t) / n_fix;
    const double fpr = n_neg > 0 ? count_ge(negatives, t) / n_neg : 0.0;
    area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  area += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2.0;
  return area;
}

Tensor upsample_nearest(const Tensor& map, std::size_t factor) {
  if (map.rank() != 2 || factor == 0) {
    throw Error("upsample_nearest: expected [h,w] map and positive factor");
  }
  const std::size_t h = map.dim(0), w = map.dim(1);
  Tensor out(Shape{h * factor, w * factor});
  for (std::size_t r = 0; r < h * factor; ++r)
    for (std::size_t c = 0; c < w * factor; ++c)
      out.at(r, c) = map.at(r / factor, c / factor);
  return out;
}

MeanStd mean_std(std::span<const double> xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - r.mean) * (x - r.mean);
  r.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return r;
}

}  // namespace actloc
