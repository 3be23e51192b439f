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

// Predictive-learning perception.
//
// Each step encodes the incoming frame into a C x 14 x 14 feature grid,
// scores it against the grid predicted from the previous frame, and turns the
// per-cell prediction error into a softmax error map. The cell with the
// largest raw error is reported as the location of the dominant action.
//
// Pipeline for the prediction of f(t+1) from f(t):
//   scores  s_ij = v . tanh(W_f f(t)[:, i, j] + W_h h_top + b)
//   alpha   = softmax over cells of s
//   context = sum_ij alpha_ij f(t)[:, i, j]
//   context -> LSTM 1 -> LSTM 2 -> LSTM 3 -> linear head -> residual
//   f_hat(t+1) = f(t) + residual
//
// Losses on observing f(t+1):
//   e_ij   = || f_hat(t+1)[:, i, j] - f(t+1)[:, i, j] ||_2
//            * sigmoid(mean_c(f(t+1) - f(t))[i, j])
//   L_global = mean_ij e_ij
//   L_attn   = || alpha - alpha_hat_prev ||_2
//            + || alpha (.) f(t) - alpha_hat_prev (.) f(t) ||_2
// where alpha_hat_prev is the error map produced when f(t) was observed.
//
// Learning is online: every step runs one SGD update on L_global + L_attn
// over the encoder, attention, recurrent stack and head.

#ifndef ACTLOC_PERCEPTION_HPP_
#define ACTLOC_PERCEPTION_HPP_

#include <array>
#include <cstdint>
#include <filesystem>

#include "actloc/geometry.hpp"
#include "actloc/graph.hpp"
#include "actloc/optim.hpp"
#include "actloc/tensor.hpp"
#include "actloc/world.hpp"

namespace actloc {

inline constexpr std::size_t kRecurrentLayers = 3;
inline constexpr std::size_t kFeatureChannels = 16;

struct PerceptionConfig {
  std::size_t hidden_dim = 64;
  std::size_t attn_dim = 16;
  std::size_t grid = 14;
  std::size_t image_size = 112;
  FieldOfView fov;

  double lr = 1e-4;
  double clip = 5.0;
  bool adaptive_lr = true;
  double adaptive_beta = 0.1;
  double ema_decay = 0.99;

  bool disable_motion_gate = false;
  bool disable_attn_loss = false;
  /// Weight the frame-to-frame feature change instead of the prediction error.
  bool literal_global_loss = false;
  bool frozen = false;

  void validate() const;
};

struct FeatureGrid {
  Tensor tensor;  ///< [C, grid, grid]
  int step = 0;
};

struct AttentionMap {
  Tensor map;  ///< [grid, grid], sums to 1
};

struct ErrorMap {
  Tensor raw;          ///< e_ij >= 0
  Tensor normalized;   ///< softmax of raw
};

ErrorMap make_error_map(Tensor raw);
ErrorMap uniform_error_map(std::size_t grid);

struct RecurrentState {
  std::array<Tensor, kRecurrentLayers> h;
  std::array<Tensor, kRecurrentLayers> c;
};

RecurrentState zero_recurrent_state(std::size_t hidden_dim);

struct PredictorState {
  RecurrentState recurrent;
  ErrorMap prev_error;
  Tensor prev_frame;
  bool has_prev_frame = false;
  int steps = 0;
};

PredictorState initial_predictor_state(const PerceptionConfig& cfg);

struct PerceptOutput {
  double loss_global = 0.0;
  double loss_attn = 0.0;
  ErrorMap error_map;
  AttentionMap attention;
  GridCell action_cell;
  Bearing action_bearing;
  bool updated = false;
  double lr_eff = 0.0;
};

/// Fresh parameters with seeded initialization.
ParameterSet make_perception_params(const PerceptionConfig& cfg,
                                    std::uint64_t seed);

/// Two stride-2 3x3 sigmoid convolutions (8 then 16 channels) followed by
/// average pooling down to grid x grid.
Var encode(Graph& g, ParameterSet& params, const Tensor& image,
           const PerceptionConfig& cfg);

struct PredictOutput {
  Var f_hat_next;
  Var alpha;
  std::array<Var, kRecurrentLayers> h;
  std::array<Var, kRecurrentLayers> c;
};

PredictOutput predict_next(Graph& g, ParameterSet& params, Var f_t,
                           const RecurrentState& state,
                           const PerceptionConfig& cfg);

struct GlobalLossOutput {
  Var loss;
  Var raw;  ///< e_ij map
};

GlobalLossOutput loss_global(Var f_hat_next, Var f_next, Var f_t,
                             const PerceptionConfig& cfg);

Var loss_attn(Var alpha, const Tensor& prev_alpha_hat, Var f_t);

/// Argmax over the raw error map. Ties go to the centre cell when it is among
/// them, otherwise to the lexicographically smallest (row, col).
GridCell localize(const Tensor& raw);

/// Diagnostic energy: loss_global + |q - c|^2 over (pan, tilt) radians.
double compute_energy(double loss_global, Bearing q, Bearing c);

struct StepGraph {
  Var total;
  Var loss_global;
  Var loss_attn;
  Var raw_error;
  PredictOutput prediction;
};

/// Records one learning step: encode the previous frame, predict, encode the
/// current frame and build both losses.
StepGraph build_step_graph(Graph& g, ParameterSet& params,
                           const Tensor& prev_frame, const Tensor& frame,
                           const PredictorState& state,
                           const PerceptionConfig& cfg);

/// One online step. Learns from `frame`, then returns the localization.
/// The first call of an episode only stores the frame: losses are 0 and the
/// error map is uniform.
PerceptOutput perceive_step(const ObservationFrame& frame,
                            PredictorState& state, ParameterSet& params,
                            AdaptiveLearningRate& lr,
                            const PerceptionConfig& cfg);

/// Owns parameters, predictor state and learning-rate schedule for one
/// episode.
class Perception {
 public:
  Perception(PerceptionConfig cfg, std::uint64_t seed);

  PerceptOutput perceive(const ObservationFrame& frame);
  /// Clears the predictor state; parameters are kept.
  void reset();

  ParameterSet& params() { return params_; }
  const PredictorState& state() const { return state_; }
  const PerceptionConfig& config() const { return cfg_; }

 private:
  PerceptionConfig cfg_;
  ParameterSet params_;
  PredictorState state_;
  AdaptiveLearningRate lr_;
};

/// Snapshot layout: text header lines
///   actloc-params v1
///   count <n>
///   <name> <rank> <dims...> <offset>     (offset in doubles)
///   end
/// followed by the little-endian float64 payload.
void save_parameters(const std::filesystem::path& path,
                     const ParameterSet& params);
ParameterSet load_parameters(const std::filesystem::path& path);

}  // namespace actloc

#endif  // ACTLOC_PERCEPTION_HPP_
