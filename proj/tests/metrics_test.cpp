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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "actloc/metrics.hpp"
#include "test_util.hpp"

namespace actloc {
namespace {

double deg(double d) { return deg_to_rad(d); }

PolarOffset polar(double rho, double theta_deg) {
  return PolarOffset{rho, Angle::degrees(theta_deg)};
}

TEST(TrackingQuality, Examples) {
  const TrackingQualityParams p;
  EXPECT_DOUBLE_EQ(tracking_quality(polar(250, 10), polar(250, 10), p), 1.0);
  EXPECT_NEAR(tracking_quality(polar(375, 45), polar(250, 0), p), 0.0, 1e-12);

  const TrackingQuality lost = tracking_quality_detail(polar(750, 90), polar(250, 0), p);
  EXPECT_NEAR(lost.raw, -2.0, 1e-12);
  EXPECT_EQ(lost.gamma, -1.0);
  EXPECT_TRUE(lost.lost);

  TrackingQualityParams relaxed = p;
  relaxed.relaxed_distance = true;
  EXPECT_DOUBLE_EQ(tracking_quality(polar(450, 0), polar(250, 0), relaxed), 1.0);
  EXPECT_DOUBLE_EQ(tracking_quality(polar(600, 0), polar(250, 0), relaxed), 0.0);
}

TEST(TrackingQuality, LostNeedsRawAtMostMinusOne) {
  const TrackingQualityParams p;
  const TrackingQuality edge = tracking_quality_detail(polar(250, 180), polar(250, 0), p);
  EXPECT_NEAR(edge.raw, -1.0, 1e-12);
  EXPECT_TRUE(edge.lost);
  const TrackingQuality near = tracking_quality_detail(polar(250, 170), polar(250, 0), p);
  EXPECT_FALSE(near.lost);
  EXPECT_GT(near.gamma, -1.0);
}

TEST(TrackingQuality, BoundedAndMonotone) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> rho(0.0, 1000.0), th(-180.0, 180.0);
  const TrackingQualityParams p;
  const PolarOffset ideal = polar(250, 0);
  for (int i = 0; i < 2000; ++i) {
    const double r = rho(rng), t = th(rng);
    const double g = tracking_quality(polar(r, t), ideal, p);
    EXPECT_GE(g, -1.0);
    EXPECT_LE(g, 1.0);
    const double further = r >= 250 ? r + 10 : r - std::min(r, 10.0);
    EXPECT_LE(tracking_quality(polar(further, t), ideal, p), g + 1e-12);
    const double wider = t >= 0 ? std::min(t + 5, 180.0) : std::max(t - 5, -180.0);
    EXPECT_LE(tracking_quality(polar(r, wider), ideal, p), g + 1e-12);
  }
}

TEST(TrackingQualityParams, Validation) {
  EXPECT_NO_THROW(TrackingQualityParams{}.validate());
  TrackingQualityParams p;
  p.rho_max = 0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.lambda = -1;
  EXPECT_THROW(p.validate(), Error);
}

std::vector<StepRecord> constant_records(int n, double gamma) {
  std::vector<StepRecord> r(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    r[i].step = i;
    r[i].gamma = gamma;
    r[i].gamma_relaxed = gamma;
  }
  return r;
}

TEST(EpisodeMetrics, Examples) {
  EpisodeMetrics m = episode_metrics(constant_records(500, 1.0));
  EXPECT_DOUBLE_EQ(m.recall, 1.0);
  EXPECT_DOUBLE_EQ(m.precision, 1.0);
  EXPECT_EQ(m.steps_survived, 500);

  m = episode_metrics(constant_records(250, 0.5));
  EXPECT_DOUBLE_EQ(m.recall, 0.5);
  EXPECT_DOUBLE_EQ(m.precision, 0.5);

  m = episode_metrics({});
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.steps_survived, 0);
}

TEST(EpisodeMetrics, AucSkipsStepsWithoutAction) {
  auto r = constant_records(4, 1.0);
  r[0].auc = 0.9;
  r[2].auc = 0.7;
  r[1].aae_deg = 8.0;
  const EpisodeMetrics m = episode_metrics(r, 4);
  EXPECT_NEAR(m.auc_judd, 0.8, 1e-12);
  EXPECT_NEAR(m.aae_mean, 2.0, 1e-12);
}

TEST(AverageAngularError, Examples) {
  std::vector<Bearing> gt{{0.1, 0.2}, {-0.3, 0.0}, {1.0, -0.5}};
  EXPECT_EQ(average_angular_error(gt, gt), 0.0);
  std::vector<Bearing> off = gt;
  for (Bearing& b : off) b.pan += deg(10);
  EXPECT_NEAR(average_angular_error(off, gt), 10.0, 1e-9);
  EXPECT_THROW(average_angular_error(off, std::span(gt).first(2)), Error);
}

TEST(AverageAngularError, SymmetricAndWrapInvariant) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-kPi, kPi), v(-1.0, 1.0);
  std::vector<Bearing> a, b, a_wrapped;
  for (int i = 0; i < 300; ++i) {
    a.push_back({u(rng), v(rng)});
    b.push_back({u(rng), v(rng)});
    a_wrapped.push_back({a.back().pan + 2.0 * kPi, a.back().tilt});
  }
  EXPECT_NEAR(average_angular_error(a, b), average_angular_error(b, a), 1e-9);
  EXPECT_NEAR(average_angular_error(a_wrapped, b), average_angular_error(a, b), 1e-9);
  const std::vector<Bearing> x{{deg(179), 0}}, y{{deg(-179), 0}};
  EXPECT_NEAR(average_angular_error(x, y), 2.0, 1e-9);
}

// Explicit ROC enumeration, independent of the sorted-count implementation.
double brute_force_auc(const Tensor& s, const std::vector<Fixation>& fix) {
  const std::size_t w = s.dim(1);
  std::set<std::size_t> fix_idx;
  for (const Fixation& f : fix) fix_idx.insert(f.row * w + f.col);
  std::vector<double> thresholds;
  for (std::size_t i : fix_idx) thresholds.push_back(s[i]);
  std::sort(thresholds.rbegin(), thresholds.rend());
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  for (double t : thresholds) {
    double tp = 0, fp = 0, negs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool is_fix = fix_idx.count(i) > 0;
      if (!is_fix) ++negs;
      if (s[i] >= t) (is_fix ? tp : fp) += 1;
    }
    pts.push_back({fp / negs, tp / static_cast<double>(fix_idx.size())});
  }
  pts.push_back({1.0, 1.0});
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  }
  return area;
}

TEST(AucJudd, Examples) {
  Tensor s(Shape{5, 5}, 0.1);
  s.at(2, 3) = 0.9;
  const std::vector<Fixation> fix{{2, 3}};
  EXPECT_DOUBLE_EQ(auc_judd(s, fix), 1.0);
  EXPECT_DOUBLE_EQ(auc_judd(Tensor(Shape{5, 5}, 0.3), fix), 0.5);
  EXPECT_THROW(auc_judd(s, std::vector<Fixation>{}), Error);
  EXPECT_THROW(auc_judd(s, std::vector<Fixation>{{5, 0}}), Error);
}

TEST(AucJudd, MatchesBruteForceOnRandomMaps) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> cell(0, 7), count(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor s = testing::random_tensor({8, 8}, rng, 0.0, 1.0);
    std::vector<Fixation> fix;
    const std::size_t n = count(rng);
    for (std::size_t k = 0; k < n; ++k) fix.push_back({cell(rng), cell(rng)});
    EXPECT_NEAR(auc_judd(s, fix), brute_force_auc(s, fix), 1e-6) << trial;
  }
}

TEST(AucJudd, InvariantUnderMonotoneRescaling) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor s = testing::random_tensor({8, 8}, rng, 0.0, 1.0);
    Tensor t = s;
    for (double& v : t.data()) v = 3.0 * std::exp(2.0 * v) - 7.0;
    const std::vector<Fixation> fix{{1, 2}, {5, 6}, {7, 0}};
    EXPECT_NEAR(auc_judd(s, fix), auc_judd(t, fix), 1e-12);
  }
}

TEST(UpsampleNearest, Blocks) {
  Tensor m(Shape{2, 2}, {1, 2, 3, 4});
  const Tensor u = upsample_nearest(m, 3);
  EXPECT_EQ(u.shape(), (Shape{6, 6}));
  EXPECT_EQ(u.at(0, 0), 1.0);
  EXPECT_EQ(u.at(2, 3), 2.0);
  EXPECT_EQ(u.at(5, 5), 4.0);
  EXPECT_THROW(upsample_nearest(m, 0), Error);
}

TEST(MeanStd, PopulationStatistics) {
  const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  const MeanStd r = mean_std(xs);
  EXPECT_DOUBLE_EQ(r.mean, 5.0);
  EXPECT_DOUBLE_EQ(r.stddev, 2.0);
  EXPECT_EQ(mean_std({}).mean, 0.0);
}

}  // namespace
}  // namespace actloc
