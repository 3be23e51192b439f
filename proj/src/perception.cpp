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

#include "actloc/perception.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace actloc {
namespace {

constexpr std::size_t kConv1Channels = 8;
constexpr std::size_t kKernel = 3;

std::string layer_name(std::size_t k, const char* what) {
  return "lstm.l" + std::to_string(k) + "." + what;
}

Tensor normal_tensor(Shape shape, double stddev, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

Tensor uniform_tensor(Shape shape, double bound, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

std::size_t lstm_input_dim(std::size_t k, const PerceptionConfig& cfg) {
  return k == 0 ? kFeatureChannels : cfg.hidden_dim;
}

struct LstmOut {
  Var h;
  Var c;
};

LstmOut lstm_cell(Graph& g, ParameterSet& params, std::size_t k, Var x,
                  const Tensor& h_prev, const Tensor& c_prev,
                  std::size_t hidden) {
  Var w_in = g.parameter(params, layer_name(k, "w_in"));
  Var w_rec = g.parameter(params, layer_name(k, "w_rec"));
  Var b = g.parameter(params, layer_name(k, "b"));
  Var h0 = g.constant(h_prev);
  Var c0 = g.constant(c_prev);
  Var z = ops::add(ops::add(ops::matvec(w_in, x), ops::matvec(w_rec, h0)), b);
  Var i = ops::sigmoid(ops::slice(z, 0, hidden));
  Var f = ops::sigmoid(ops::slice(z, hidden, hidden));
  Var gg = ops::tanh(ops::slice(z, 2 * hidden, hidden));
  Var o = ops::sigmoid(ops::slice(z, 3 * hidden, hidden));
  Var c = ops::add(ops::mul(f, c0), ops::mul(i, gg));
  Var h = ops::mul(o, ops::tanh(c));
  return {h, c};
}

}  // namespace

void PerceptionConfig::validate() const {
  if (hidden_dim == 0 || attn_dim == 0 || grid == 0) {
    throw Error("perception: hidden_dim, attn_dim and grid must be positive");
  }
  // Two stride-2 convolutions, then integer pooling down to the grid.
  const std::size_t conv_out = (image_size + 3) / 4;
  if (image_size % 4 != 0 || conv_out % grid != 0) {
    throw Error("perception: image_size " + std::to_string(image_size) +
                " is not compatible with grid " + std::to_string(grid));
  }
  if (!(lr >= 0.0) || !(clip > 0.0)) {
    throw Error("perception: lr must be >= 0 and clip > 0");
  }
  fov.validate();
}

ErrorMap make_error_map(Tensor raw) {
  if (raw.rank() != 2) {
    throw Error("make_error_map: expected [H,W], got " + shape_string(raw.shape()));
  }
  ErrorMap m;
  m.normalized = softmax2d_value(raw);
  m.raw = std::move(raw);
  return m;
}

ErrorMap uniform_error_map(std::size_t grid) {
  return make_error_map(Tensor(Shape{grid, grid}, 0.0));
}

RecurrentState zero_recurrent_state(std::size_t hidden_dim) {
  RecurrentState s;
  for (std::size_t k = 0; k < kRecurrentLayers; ++k) {
    s.h[k] = Tensor(Shape{hidden_dim}, 0.0);
    s.c[k] = Tensor(Shape{hidden_dim}, 0.0);
  }
  return s;
}

PredictorState initial_predictor_state(const PerceptionConfig& cfg) {
  PredictorState s;
  s.recurrent = zero_recurrent_state(cfg.hidden_dim);
  s.prev_error = uniform_error_map(cfg.grid);
  s.prev_frame = Tensor(Shape{1, cfg.image_size, cfg.image_size}, 0.0);
  return s;
}

ParameterSet make_perception_params(const PerceptionConfig& cfg,
                                    std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  const std::size_t c = kFeatureChannels, a = cfg.attn_dim, hd = cfg.hidden_dim;
  ParameterSet p;
  // He-style scale for the sigmoid encoder keeps features away from saturation
  // on [0, 1] inputs.
  p.add("enc.conv1.w", normal_tensor({kConv1Channels, 1, kKernel, kKernel},
                                     std::sqrt(2.0 / 9.0), rng));
  p.add("enc.conv1.b", Tensor(Shape{kConv1Channels}, 0.0));
  p.add("enc.conv2.w", normal_tensor({c, kConv1Channels, kKernel, kKernel},
                                     std::sqrt(2.0 / (9.0 * kConv1Channels)), rng));
  p.add("enc.conv2.b", Tensor(Shape{c}, 0.0));
  p.add("attn.w_feat", normal_tensor({a, c, 1, 1}, 1.0 / std::sqrt(double(c)), rng));
  p.add("attn.w_hidden", normal_tensor({a, hd}, 1.0 / std::sqrt(double(hd)), rng));
  p.add("attn.b", Tensor(Shape{a}, 0.0));
  p.add("attn.v", normal_tensor({1, a, 1, 1}, 1.0 / std::sqrt(double(a)), rng));
  const double bound = 1.0 / std::sqrt(double(hd));
  for (std::size_t k = 0; k < kRecurrentLayers; ++k) {
    p.add(layer_name(k, "w_in"),
          uniform_tensor({4 * hd, lstm_input_dim(k, cfg)}, bound, rng));
    p.add(layer_name(k, "w_rec"), uniform_tensor({4 * hd, hd}, bound, rng));
    p.add(layer_name(k, "b"), Tensor(Shape{4 * hd}, 0.0));
  }
  // Small head: the initial prediction is close to "nothing changes".
  p.add("head.w", normal_tensor({c * cfg.grid * cfg.grid, hd},
                                0.01 / std::sqrt(double(hd)), rng));
  p.add("head.b", Tensor(Shape{c * cfg.grid * cfg.grid}, 0.0));
  return p;
}

Var encode(Graph& g, ParameterSet& params, const Tensor& image,
           const PerceptionConfig& cfg) {
  if (image.rank() != 3 || image.dim(0) != 1 || image.dim(1) != cfg.image_size ||
      image.dim(2) != cfg.image_size) {
    throw Error("encode: expected [1," + std::to_string(cfg.image_size) + "," +
                std::to_string(cfg.image_size) + "] frame, got " +
                shape_string(image.shape()));
  }
  Var x = g.constant(image);
  Var h1 = ops::sigmoid(ops::add_channel_bias(
      ops::conv2d(x, g.parameter(params, "enc.conv1.w"), 2),
      g.parameter(params, "enc.conv1.b")));
  Var h2 = ops::sigmoid(ops::add_channel_bias(
      ops::conv2d(h1, g.parameter(params, "enc.conv2.w"), 2),
      g.parameter(params, "enc.conv2.b")));
  const std::size_t factor = h2.shape()[1] / cfg.grid;
  return factor == 1 ? h2 : ops::avg_pool2d(h2, factor);
}

PredictOutput predict_next(Graph& g, ParameterSet& params, Var f_t,
                           const RecurrentState& state,
                           const PerceptionConfig& cfg) {
  const std::size_t grid = cfg.grid;
  // Attention reads the feature grid conditioned on the top recurrent layer.
  Var top = g.constant(state.h[kRecurrentLayers - 1]);
  Var bias = ops::add(ops::matvec(g.parameter(params, "attn.w_hidden"), top),
                      g.parameter(params, "attn.b"));
  Var proj = ops::tanh(ops::add_channel_bias(
      ops::conv2d(f_t, g.parameter(params, "attn.w_feat"), 1), bias));
  Var scores = ops::reshape(ops::conv2d(proj, g.parameter(params, "attn.v"), 1),
                            Shape{grid, grid});
  PredictOutput out;
  out.alpha = ops::softmax2d(scores);
  Var x = ops::spatial_sum(ops::mul_map(f_t, out.alpha));
  for (std::size_t k = 0; k < kRecurrentLayers; ++k) {
    LstmOut l = lstm_cell(g, params, k, x, state.h[k], state.c[k], cfg.hidden_dim);
    out.h[k] = l.h;
    out.c[k] = l.c;
    x = l.h;
  }
  Var residual = ops::add(ops::matvec(g.parameter(params, "head.w"), x),
                          g.parameter(params, "head.b"));
  out.f_hat_next = ops::add(f_t, ops::reshape(residual, f_t.shape()));
  return out;
}

GlobalLossOutput loss_global(Var f_hat_next, Var f_next, Var f_t,
                             const PerceptionConfig& cfg) {
  if (f_hat_next.shape() != f_next.shape() || f_next.shape() != f_t.shape()) {
    throw Error("loss_global: feature shapes differ: " +
                shape_string(f_hat_next.shape()) + ", " +
                shape_string(f_next.shape()) + ", " + shape_string(f_t.shape()));
  }
  Var change = ops::sub(f_next, f_t);
  Var residual = cfg.literal_global_loss ? change : ops::sub(f_hat_next, f_next);
  Var e = ops::channel_norm(residual);
  if (!cfg.disable_motion_gate) {
    e = ops::mul(e, ops::sigmoid(ops::channel_mean(change)));
  }
  return {ops::mean(e), e};
}

Var loss_attn(Var alpha, const Tensor& prev_alpha_hat, Var f_t) {
  if (alpha.shape() != prev_alpha_hat.shape()) {
    throw Error("loss_attn: attention " + shape_string(alpha.shape()) +
                " vs target " + shape_string(prev_alpha_hat.shape()));
  }
  Graph& g = *alpha.graph;
  Var target = g.constant(prev_alpha_hat);
  Var term1 = ops::norm(ops::sub(alpha, target));
  Var term2 = ops::norm(ops::sub(ops::mul_map(f_t, alpha), ops::mul_map(f_t, target)));
  return ops::add(term1, term2);
}

GridCell localize(const Tensor& raw) {
  if (raw.rank() != 2 || raw.size() == 0) {
    throw Error("localize: expected non-empty [H,W] map");
  }
  const std::size_t h = raw.dim(0), w = raw.dim(1);
  const auto values = raw.data();
  const double best = *std::max_element(values.begin(), values.end());
  const GridCell centre{h / 2, w / 2};
  if (raw.at(centre.row, centre.col) == best) return centre;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      if (raw.at(r, c) == best) return {r, c};
  return centre;  // unreachable for finite maps
}

double compute_energy(double loss_global, Bearing q, Bearing c) {
  const double dp = wrap_angle(q.pan - c.pan);
  const double dt = wrap_angle(q.tilt - c.tilt);
  return loss_global + dp * dp + dt * dt;
}

StepGraph build_step_graph(Graph& g, ParameterSet& params,
                           const Tensor& prev_frame, const Tensor& frame,
                           const PredictorState& state,
                           const PerceptionConfig& cfg) {
  StepGraph s;
  Var f_prev = encode(g, params, prev_frame, cfg);
  s.prediction = predict_next(g, params, f_prev, state.recurrent, cfg);
  Var f_cur = encode(g, params, frame, cfg);
  GlobalLossOutput gl = loss_global(s.prediction.f_hat_next, f_cur, f_prev, cfg);
  s.loss_global = gl.loss;
  s.raw_error = gl.raw;
  s.loss_attn = loss_attn(s.prediction.alpha, state.prev_error.normalized, f_prev);
  s.total = cfg.disable_attn_loss ? gl.loss : ops::add(gl.loss, s.loss_attn);
  return s;
}

PerceptOutput perceive_step(const ObservationFrame& frame,
                            PredictorState& state, ParameterSet& params,
                            AdaptiveLearningRate& lr,
                            const PerceptionConfig& cfg) {
  PerceptOutput out;
  const GridShape grid{cfg.grid, cfg.grid};
  if (!state.has_prev_frame) {
    state.prev_frame = frame.image;
    state.has_prev_frame = true;
    state.prev_error = uniform_error_map(cfg.grid);
    state.steps = 1;
    out.error_map = state.prev_error;
    out.attention.map = state.prev_error.normalized;
    out.action_cell = localize(out.error_map.raw);
    out.action_bearing = Bearing{0.0, 0.0};
    return out;
  }

  Graph g;
  StepGraph s = build_step_graph(g, params, state.prev_frame, frame.image, state, cfg);
  out.loss_global = s.loss_global.value().item();
  out.loss_attn = s.loss_attn.value().item();
  out.attention.map = s.prediction.alpha.value();
  if (!cfg.frozen) {
    backward(g, s.total, params);
    out.lr_eff = lr.update(s.total.value().item());
    out.updated = sgd_step(params, out.lr_eff, cfg.clip).applied;
  }

  for (std::size_t k = 0; k < kRecurrentLayers; ++k) {
    state.recurrent.h[k] = s.prediction.h[k].value();
    state.recurrent.c[k] = s.prediction.c[k].value();
  }
  out.error_map = make_error_map(s.raw_error.value());
  state.prev_error = out.error_map;
  state.prev_frame = frame.image;
  ++state.steps;

  const auto values = out.error_map.raw.data();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  out.action_cell = localize(out.error_map.raw);
  out.action_bearing = *lo == *hi ? Bearing{0.0, 0.0}
                                  : grid_cell_to_bearing(out.action_cell, grid, cfg.fov);
  return out;
}

Perception::Perception(PerceptionConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      params_(make_perception_params(cfg_, seed)),
      state_(initial_predictor_state(cfg_)),
      lr_(AdaptiveLearningRate::Options{cfg_.lr, cfg_.adaptive_beta,
                                        cfg_.ema_decay, cfg_.adaptive_lr}) {}

PerceptOutput Perception::perceive(const ObservationFrame& frame) {
  return perceive_step(frame, state_, params_, lr_, cfg_);
}

void Perception::reset() {
  state_ = initial_predictor_state(cfg_);
  lr_.reset();
}

// --- snapshots --------------------------------------------------------------

namespace {
constexpr const char* kMagic = "actloc-params v1";

void put_le(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}
}  // namespace

void save_parameters(const std::filesystem::path& path,
                     const ParameterSet& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("save_parameters: cannot open " + path.string());
  os << kMagic << "\ncount " << params.count() << "\n";
  std::size_t offset = 0;
  for (const std::string& name : params.names()) {
    const Tensor& t = params.value(name);
    os << name << ' ' << t.rank();
    for (std::size_t d : t.shape()) os << ' ' << d;
    os << ' ' << offset << "\n";
    offset += t.size();
  }
  os << "end\n";
  for (const std::string& name : params.names())
    for (double v : params.value(name).data()) put_le(os, v);
  if (!os) throw Error("save_parameters: write failed for " + path.string());
}

ParameterSet load_parameters(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_parameters: cannot open " + path.string());
  auto fail = [&](const std::string& msg) -> Error {
    return Error("load_parameters: " + path.string() + ": " + msg);
  };
  std::string line;
  if (!std::getline(is, line) || line != kMagic) throw fail("bad magic line");
  std::size_t count = 0;
  {
    if (!std::getline(is, line)) throw fail("missing count");
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key >> count) || key != "count") throw fail("bad count line");
  }
  struct Entry {
    std::string name;
    Shape shape;
    std::size_t offset;
  };
  std::vector<Entry> entries;
  std::size_t total = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw fail("truncated header");
    std::istringstream ls(line);
    Entry e;
    std::size_t rank = 0;
    if (!(ls >> e.name >> rank)) throw fail("bad entry '" + line + "'");
    e.shape.resize(rank);
    for (std::size_t& d : e.shape)
      if (!(ls >> d)) throw fail("bad dims in '" + line + "'");
    if (!(ls >> e.offset)) throw fail("bad offset in '" + line + "'");
    if (e.offset != total) throw fail("non-contiguous offset for " + e.name);
    total += shape_size(e.shape);
    entries.push_back(std::move(e));
  }
  if (!std::getline(is, line) || line != "end") throw fail("missing end marker");
  std::vector<unsigned char> payload(total * 8);
  is.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(is.gcount()) != payload.size()) {
    throw fail("payload truncated");
  }
  ParameterSet params;
  for (const Entry& e : entries) {
    std::vector<double> data(shape_size(e.shape));
    for (std::size_t k = 0; k < data.size(); ++k)
      data[k] = get_le(payload.data() + 8 * (e.offset + k));
    params.add(e.name, Tensor(e.shape, std::move(data)));
  }
  return params;
}

}  // namespace actloc
