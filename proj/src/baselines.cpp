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

#include "actloc/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace actloc {

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kRandom: return "random";
    case BaselineKind::kOracle: return "oracle";
    case BaselineKind::kTemplateNcc: return "template";
  }
  return "?";
}

Bearing random_bearing(std::mt19937_64& rng, double spread, Bearing center) {
  if (!(spread > 0.0)) return center;
  std::uniform_real_distribution<double> u(-spread, spread);
  const double pan = u(rng);
  const double tilt = u(rng);
  return Bearing{center.pan + pan, center.tilt + tilt};
}

Bearing oracle_bearing(const GroundTruth& gt) { return gt.bearing; }

double ncc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error("ncc: patches differ in size");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 1e-12 || sbb <= 1e-12) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

const Tensor& as_plane(const Tensor& image, Tensor& storage) {
  if (image.rank() == 2) return image;
  if (image.rank() == 3 && image.dim(0) == 1) {
    storage = image.reshaped(Shape{image.dim(1), image.dim(2)});
    return storage;
  }
  throw Error("template tracker: expected [1,H,W] or [H,W] image, got " +
              shape_string(image.shape()));
}

}  // namespace

Tensor crop_patch(const Tensor& image, std::size_t row, std::size_t col,
                  std::size_t side) {
  Tensor storage;
  const Tensor& img = as_plane(image, storage);
  const long h = static_cast<long>(img.dim(0)), w = static_cast<long>(img.dim(1));
  const long half = static_cast<long>(side / 2);
  Tensor out(Shape{side, side});
  for (long r = 0; r < static_cast<long>(side); ++r) {
    for (long c = 0; c < static_cast<long>(side); ++c) {
      const long rr = std::clamp(static_cast<long>(row) + r - half, 0L, h - 1);
      const long cc = std::clamp(static_cast<long>(col) + c - half, 0L, w - 1);
      out.at(r, c) = img.at(rr, cc);
    }
  }
  return out;
}

GridCell brightest_blob(const Tensor& image, std::size_t side) {
  Tensor storage;
  const Tensor& img = as_plane(image, storage);
  const std::size_t h = img.dim(0), w = img.dim(1);
  // Summed-area table for O(1) box sums.
  std::vector<double> sat((h + 1) * (w + 1), 0.0);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      sat[(r + 1) * (w + 1) + c + 1] = img.at(r, c) + sat[r * (w + 1) + c + 1] +
                                       sat[(r + 1) * (w + 1) + c] -
                                       sat[r * (w + 1) + c];
  const std::size_t half = side / 2;
  GridCell best{h / 2, w / 2};
  double best_sum = -1.0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t r0 = r >= half ? r - half : 0, r1 = std::min(h, r + half + 1);
      const std::size_t c0 = c >= half ? c - half : 0, c1 = std::min(w, c + half + 1);
      const double s = sat[r1 * (w + 1) + c1] - sat[r0 * (w + 1) + c1] -
                       sat[r1 * (w + 1) + c0] + sat[r0 * (w + 1) + c0];
      const double mean = s / static_cast<double>((r1 - r0) * (c1 - c0));
      if (mean > best_sum) {
        best_sum = mean;
        best = {r, c};
      }
    }
  }
  return best;
}

TemplateState seed_template(const Tensor& image, const TemplateOptions& opts) {
  if (opts.side % 2 == 0) throw Error("template side must be odd");
  TemplateState s;
  const GridCell c = brightest_blob(image, opts.side);
  s.row = c.row;
  s.col = c.col;
  s.patch = crop_patch(image, c.row, c.col, opts.side);
  s.confidence = 1.0;
  s.initialized = true;
  return s;
}

TemplateResult template_track(const ObservationFrame& frame,
                              const TemplateState& state,
                              const TemplateOptions& opts) {
  TemplateResult r;
  Tensor storage;
  const Tensor& img = as_plane(frame.image, storage);
  const std::size_t h = img.dim(0), w = img.dim(1);
  r.state = state.initialized ? state : seed_template(img, opts);

  const long rad = static_cast<long>(opts.search_radius);
  const long r0 = std::max(0L, static_cast<long>(r.state.row) - rad);
  const long r1 = std::min(static_cast<long>(h) - 1, static_cast<long>(r.state.row) + rad);
  const long c0 = std::max(0L, static_cast<long>(r.state.col) - rad);
  const long c1 = std::min(static_cast<long>(w) - 1, static_cast<long>(r.state.col) + rad);
  r.response = Tensor(Shape{h, w}, -1.0);
  double best = -2.0;
  std::size_t br = r.state.row, bc = r.state.col;
  for (long row = r0; row <= r1; ++row) {
    for (long col = c0; col <= c1; ++col) {
      const Tensor cand = crop_patch(img, row, col, opts.side);
      const double v = ncc(r.state.patch.data(), cand.data());
      r.response.at(row, col) = v;
      if (v > best) {
        best = v;
        br = static_cast<std::size_t>(row);
        bc = static_cast<std::size_t>(col);
      }
    }
  }
  r.confidence = best;
  r.state.confidence = best;
  if (best > opts.confidence_threshold) {
    r.state.row = br;
    r.state.col = bc;
    r.state.low_confidence_steps = 0;
    const Tensor cur = crop_patch(img, br, bc, opts.side);
    auto p = r.state.patch.data();
    auto q = cur.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = (1.0 - opts.blend_rate) * p[i] + opts.blend_rate * q[i];
    }
    r.bearing = pixel_to_bearing(static_cast<double>(br) + 0.5,
                                 static_cast<double>(bc) + 0.5, h, frame.camera.fov);
  } else if (++r.state.low_confidence_steps >= opts.reacquire_after) {
    r.state = seed_template(img, opts);
    r.state.confidence = best;
  }
  return r;
}

Tensor gaussian_saliency(std::size_t size, PixelPos center, double sigma) {
  if (!(sigma > 0.0)) throw Error("gaussian_saliency: sigma must be positive");
  Tensor out(Shape{size, size});
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      const double dr = static_cast<double>(r) + 0.5 - center.row;
      const double dc = static_cast<double>(c) + 0.5 - center.col;
      out.at(r, c) = std::exp(-(dr * dr + dc * dc) * inv);
    }
  }
  return out;
}

}  // namespace actloc
