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

#ifndef ACTLOC_OPTIM_HPP_
#define ACTLOC_OPTIM_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "actloc/graph.hpp"
#include "actloc/tensor.hpp"

namespace actloc {

struct SgdOutcome {
  bool applied = false;
  double lr_eff = 0.0;
};

/// p <- p - lr * clamp(grad, -clip, clip) for every parameter, then zeroes the
/// gradients. A non-finite gradient anywhere skips the whole update (the
/// gradients are still cleared) and reports applied = false.
SgdOutcome sgd_step(ParameterSet& params, double lr,
                    double clip = std::numeric_limits<double>::infinity());

/// Loss-damped learning rate: lr / (1 + beta * EMA(loss)).
class AdaptiveLearningRate {
 public:
  struct Options {
    double base_lr = 1e-4;
    double beta = 0.1;
    double ema_decay = 0.99;
    bool enabled = true;
  };

  AdaptiveLearningRate() = default;
  explicit AdaptiveLearningRate(Options opts) : opts_(opts) {}

  /// Folds `loss` into the running average and returns the rate to use now.
  double update(double loss);
  double ema() const { return ema_; }
  void reset() {
    ema_ = 0.0;
    seen_ = false;
  }

 private:
  Options opts_;
  double ema_ = 0.0;
  bool seen_ = false;
};

/// Builds a scalar loss on a fresh graph from the given parameters.
using LossBuilder = std::function<Var(Graph&, ParameterSet&)>;

struct GradCheckOptions {
  double h = 1e-5;
  /// Coordinates sampled per parameter tensor; tensors smaller than this are
  /// checked exhaustively.
  std::size_t samples_per_param = 8;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Compares reverse-mode gradients against central differences. The relative
/// error of a coordinate is |analytic - numeric| / max(1e-8, |numeric|).
GradCheckReport finite_diff_check(const LossBuilder& f, ParameterSet& params,
                                  const GradCheckOptions& opts = {});

}  // namespace actloc

#endif  // ACTLOC_OPTIM_HPP_
