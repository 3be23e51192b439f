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

#include "actloc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace actloc {

SgdOutcome sgd_step(ParameterSet& params, double lr, double clip) {
  SgdOutcome out;
  out.lr_eff = lr;
  bool finite = true;
  for (const auto& name : params.names()) {
    if (!params.grad(name).all_finite()) {
      finite = false;
      break;
    }
  }
  if (finite) {
    for (const auto& name : params.names()) {
      auto p = params.value(name).data();
      auto g = params.grad(name).data();
      for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] -= lr * std::clamp(g[i], -clip, clip);
      }
    }
    out.applied = true;
  }
  params.zero_grad();
  return out;
}

double AdaptiveLearningRate::update(double loss) {
  if (!opts_.enabled) return opts_.base_lr;
  if (std::isfinite(loss)) {
    if (!seen_) {
      ema_ = loss;
      seen_ = true;
    } else {
      ema_ = opts_.ema_decay * ema_ + (1.0 - opts_.ema_decay) * loss;
    }
  }
  return opts_.base_lr / (1.0 + opts_.beta * ema_);
}

GradCheckReport finite_diff_check(const LossBuilder& f, ParameterSet& params,
                                  const GradCheckOptions& opts) {
  GradCheckReport report;
  params.zero_grad();
  {
    Graph g;
    Var loss = f(g, params);
    backward(g, loss, params);
  }
  auto eval = [&]() {
    Graph g;
    return f(g, params).value().item();
  };

  std::mt19937_64 rng(opts.seed);
  for (const auto& name : params.names()) {
    Tensor& value = params.value(name);
    const Tensor analytic = params.grad(name);
    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > opts.samples_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opts.samples_per_param);
    }
    for (std::size_t idx : coords) {
      const double saved = value[idx];
      value[idx] = saved + opts.h;
      const double plus = eval();
      value[idx] = saved - opts.h;
      const double minus = eval();
      value[idx] = saved;
      const double numeric = (plus - minus) / (2.0 * opts.h);
      const double rel = std::abs(analytic[idx] - numeric) /
                         std::max(1e-8, std::abs(numeric));
      ++report.coordinates;
      if (rel > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = std::max(rel, report.max_rel_error);
        report.worst_param = name;
        report.worst_index = idx;
        report.worst_analytic = analytic[idx];
        report.worst_numeric = numeric;
      }
    }
  }
  params.zero_grad();
  return report;
}

}  // namespace actloc
