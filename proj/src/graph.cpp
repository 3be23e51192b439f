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

#include "actloc/graph.hpp"

#include <algorithm>
#include <cmath>

namespace actloc {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return "constant";
    case OpKind::kLeaf: return "leaf";
    case OpKind::kParameter: return "parameter";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kExp: return "exp";
    case OpKind::kTanh: return "tanh";
    case OpKind::kScale: return "scale";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
    case OpKind::kNorm: return "norm";
    case OpKind::kMatVec: return "matvec";
    case OpKind::kConv2d: return "conv2d";
    case OpKind::kChannelBias: return "channel_bias";
    case OpKind::kAvgPool: return "avg_pool2d";
    case OpKind::kSoftmax2d: return "softmax2d";
    case OpKind::kChannelNorm: return "channel_norm";
    case OpKind::kChannelMean: return "channel_mean";
    case OpKind::kMulMap: return "mul_map";
    case OpKind::kSpatialSum: return "spatial_sum";
    case OpKind::kReshape: return "reshape";
    case OpKind::kSlice: return "slice";
  }
  return "?";
}

const Tensor& Var::value() const { return graph->value(*this); }

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Graph::constant(Tensor value) {
  Node n;
  n.kind = OpKind::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::leaf(Tensor value) {
  Node n;
  n.kind = OpKind::kLeaf;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::parameter(ParameterSet& params, const std::string& name) {
  Node n;
  n.kind = OpKind::kParameter;
  n.value = params.value(name);
  n.requires_grad = true;
  n.params = &params;
  n.param_name = name;
  return push(std::move(n));
}

Var Graph::record(OpKind kind, std::vector<Var> inputs, Tensor value,
                  BackwardFn backward) {
  Node n;
  n.kind = kind;
  n.value = std::move(value);
  for (const Var& v : inputs) {
    if (v.graph != this) throw Error("op input belongs to another graph");
    n.inputs.push_back(v.id);
    n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

Tensor& Graph::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (!n.has_grad) {
    // Materialize zeros lazily so callers can always read a gradient.
    auto& self = const_cast<Graph&>(*this);
    return self.grad_slot(v.id);
  }
  return n.grad;
}

void Graph::backward(Var loss) {
  if (loss.graph != this) throw Error("loss belongs to another graph");
  const Tensor& lv = nodes_[loss.id].value;
  if (lv.size() != 1) {
    throw Error("backward requires a scalar loss, got shape " +
                shape_string(lv.shape()));
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  grad_slot(loss.id).fill(1.0);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.has_grad) continue;
    if (n.backward) n.backward(*this, i);
    if (n.kind == OpKind::kParameter) {
      Tensor& acc = n.params->grad(n.param_name);
      auto g = n.grad.data();
      auto a = acc.data();
      for (std::size_t k = 0; k < a.size(); ++k) a[k] += g[k];
    }
  }
}

void backward(Graph& graph, Var loss, ParameterSet& params) {
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const ParameterSet* owner = graph.parameter_owner(Var{&graph, i});
    if (owner != nullptr && owner != &params) {
      throw Error("graph parameter bound to a different parameter set");
    }
  }
  graph.backward(loss);
}

Tensor softmax2d_value(const Tensor& e) {
  Tensor out(e.shape());
  auto in = e.data();
  auto o = out.data();
  const double peak = *std::max_element(in.begin(), in.end());
  double total = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    o[i] = std::exp(in[i] - peak);
    total += o[i];
  }
  for (double& v : o) v /= total;
  return out;
}

namespace ops {
namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw Error(std::string(op) + ": expected rank " + std::to_string(rank) +
                " input, got shape " + shape_string(t.shape()));
  }
}

enum class Broadcast { kExact, kScalarA, kScalarB };

Broadcast broadcast_mode(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::kExact;
  if (b.size() == 1) return Broadcast::kScalarB;
  if (a.size() == 1) return Broadcast::kScalarA;
  throw Error(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
              " vs " + shape_string(b.shape()));
}

template <typename F>
Tensor binary_value(const Tensor& a, const Tensor& b, Broadcast mode, F f) {
  const Tensor& big = mode == Broadcast::kScalarA ? b : a;
  Tensor out(big.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double av = mode == Broadcast::kScalarA ? x[0] : x[i];
    const double bv = mode == Broadcast::kScalarB ? y[0] : y[i];
    o[i] = f(av, bv);
  }
  return out;
}

// Accumulates d(out)/d(input) * grad into input `which` (0 = a, 1 = b).
// `da` / `db` give the local partials for element i.
template <typename DA, typename DB>
void binary_backward(Graph& g, std::size_t self, Broadcast mode, DA da,
                     DB db) {
  const Tensor& go = g.grad_of(self);
  const std::size_t ia = g.input(self, 0);
  const std::size_t ib = g.input(self, 1);
  const auto gv = go.data();
  if (g.requires_grad(ia)) {
    auto ga = g.grad_slot(ia).data();
    for (std::size_t i = 0; i < gv.size(); ++i) {
      ga[mode == Broadcast::kScalarA ? 0 : i] += gv[i] * da(i);
    }
  }
  if (g.requires_grad(ib)) {
    auto gb = g.grad_slot(ib).data();
    for (std::size_t i = 0; i < gv.size(); ++i) {
      gb[mode == Broadcast::kScalarB ? 0 : i] += gv[i] * db(i);
    }
  }
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

template <typename F, typename DF>
Var unary(Var a, OpKind kind, F f, DF df_from_y) {
  const Tensor& x = a.value();
  Tensor out(x.shape());
  auto o = out.data();
  auto xv = x.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(xv[i]);
  return a.graph->record(
      kind, {a}, std::move(out), [df_from_y](Graph& g, std::size_t self) {
        const std::size_t in = g.input(self, 0);
        auto gi = g.grad_slot(in).data();
        auto go = g.grad_of(self).data();
        auto y = g.value_of(self).data();
        auto xv = g.value_of(in).data();
        for (std::size_t i = 0; i < gi.size(); ++i) {
          gi[i] += go[i] * df_from_y(xv[i], y[i]);
        }
      });
}

}  // namespace

Var add(Var a, Var b) {
  const Broadcast mode = broadcast_mode(a.value(), b.value(), "add");
  Tensor out = binary_value(a.value(), b.value(), mode,
                            [](double x, double y) { return x + y; });
  return a.graph->record(
      OpKind::kAdd, {a, b}, std::move(out),
      [mode](Graph& g, std::size_t self) {
        binary_backward(
            g, self, mode, [](std::size_t) { return 1.0; },
            [](std::size_t) { return 1.0; });
      });
}

Var sub(Var a, Var b) {
  const Broadcast mode = broadcast_mode(a.value(), b.value(), "sub");
  Tensor out = binary_value(a.value(), b.value(), mode,
                            [](double x, double y) { return x - y; });
  return a.graph->record(
      OpKind::kSub, {a, b}, std::move(out),
      [mode](Graph& g, std::size_t self) {
        binary_backward(
            g, self, mode, [](std::size_t) { return 1.0; },
            [](std::size_t) { return -1.0; });
      });
}

Var mul(Var a, Var b) {
  const Broadcast mode = broadcast_mode(a.value(), b.value(), "mul");
  Tensor out = binary_value(a.value(), b.value(), mode,
                            [](double x, double y) { return x * y; });
  return a.graph->record(
      OpKind::kMul, {a, b}, std::move(out),
      [mode](Graph& g, std::size_t self) {
        auto x = g.value_of(g.input(self, 0)).data();
        auto y = g.value_of(g.input(self, 1)).data();
        binary_backward(
            g, self, mode,
            [&](std::size_t i) {
              return y[mode == Broadcast::kScalarB ? 0 : i];
            },
            [&](std::size_t i) {
              return x[mode == Broadcast::kScalarA ? 0 : i];
            });
      });
}

Var sigmoid(Var a) {
  return unary(a, OpKind::kSigmoid, sigmoid_scalar,
               [](double, double y) { return y * (1.0 - y); });
}

Var exp(Var a) {
  return unary(
      a, OpKind::kExp, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Var tanh(Var a) {
  return unary(
      a, OpKind::kTanh, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var scale(Var a, double factor) {
  return unary(
      a, OpKind::kScale, [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return a.graph->record(OpKind::kSum, {a}, Tensor::scalar(total),
                         [](Graph& g, std::size_t self) {
                           const double go = g.grad_of(self)[0];
                           for (double& v : g.grad_slot(g.input(self, 0)).data())
                             v += go;
                         });
}

Var mean(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const double n = static_cast<double>(a.value().size());
  return a.graph->record(OpKind::kMean, {a}, Tensor::scalar(total / n),
                         [n](Graph& g, std::size_t self) {
                           const double go = g.grad_of(self)[0] / n;
                           for (double& v : g.grad_slot(g.input(self, 0)).data())
                             v += go;
                         });
}

Var norm(Var a) {
  double ss = 0.0;
  for (double v : a.value().data()) ss += v * v;
  return a.graph->record(
      OpKind::kNorm, {a}, Tensor::scalar(std::sqrt(ss)),
      [](Graph& g, std::size_t self) {
        const double n = g.value_of(self)[0];
        if (n == 0.0) return;
        const double go = g.grad_of(self)[0] / n;
        const std::size_t in = g.input(self, 0);
        auto x = g.value_of(in).data();
        auto gi = g.grad_slot(in).data();
        for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += go * x[i];
      });
}

Var matvec(Var weights, Var x) {
  const Tensor& w = weights.value();
  const Tensor& v = x.value();
  require_rank(w, 2, "matvec");
  require_rank(v, 1, "matvec");
  if (w.dim(1) != v.dim(0)) {
    throw Error("matvec: shape mismatch " + shape_string(w.shape()) + " vs " +
                shape_string(v.shape()));
  }
  const std::size_t m = w.dim(0);
  const std::size_t n = w.dim(1);
  Tensor out(Shape{m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = w.data().data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
  return weights.graph->record(
      OpKind::kMatVec, {weights, x}, std::move(out),
      [m, n](Graph& g, std::size_t self) {
        const std::size_t iw = g.input(self, 0);
        const std::size_t ix = g.input(self, 1);
        auto go = g.grad_of(self).data();
        if (g.requires_grad(iw)) {
          auto gw = g.grad_slot(iw).data();
          auto xv = g.value_of(ix).data();
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = go[i];
            if (gi == 0.0) continue;
            double* row = gw.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) row[j] += gi * xv[j];
          }
        }
        if (g.requires_grad(ix)) {
          auto gx = g.grad_slot(ix).data();
          auto wv = g.value_of(iw).data();
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = go[i];
            if (gi == 0.0) continue;
            const double* row = wv.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) gx[j] += gi * row[j];
          }
        }
      });
}

namespace {

struct ConvGeometry {
  std::size_t cin, h, w, cout, k, stride, pad, oh, ow;
};

ConvGeometry conv_geometry(const Tensor& x, const Tensor& k,
                           std::size_t stride) {
  require_rank(x, 3, "conv2d");
  require_rank(k, 4, "conv2d");
  if (stride == 0) throw Error("conv2d: stride must be positive");
  const std::size_t ks = k.dim(2);
  if (ks % 2 == 0 || k.dim(3) != ks) {
    throw Error("conv2d: kernel must be square with odd side, got " +
                shape_string(k.shape()));
  }
  if (k.dim(1) != x.dim(0)) {
    throw Error("conv2d: channel mismatch " + shape_string(x.shape()) +
                " vs " + shape_string(k.shape()));
  }
  if (x.dim(1) < ks || x.dim(2) < ks) {
    throw Error("conv2d: input " + shape_string(x.shape()) +
                " smaller than kernel " + shape_string(k.shape()));
  }
  ConvGeometry geo{};
  geo.cin = x.dim(0);
  geo.h = x.dim(1);
  geo.w = x.dim(2);
  geo.cout = k.dim(0);
  geo.k = ks;
  geo.stride = stride;
  geo.pad = ks / 2;
  geo.oh = (geo.h + stride - 1) / stride;
  geo.ow = (geo.w + stride - 1) / stride;
  return geo;
}

// Calls f(out_index, in_index) for every valid tap of kernel offset (ky,kx).
template <typename F>
void for_each_tap(const ConvGeometry& geo, std::size_t ky, std::size_t kx,
                  F&& f) {
  for (std::size_t oy = 0; oy < geo.oh; ++oy) {
    const long iy = static_cast<long>(oy * geo.stride + ky) -
                    static_cast<long>(geo.pad);
    if (iy < 0 || iy >= static_cast<long>(geo.h)) continue;
    for (std::size_t ox = 0; ox < geo.ow; ++ox) {
      const long ix = static_cast<long>(ox * geo.stride + kx) -
                      static_cast<long>(geo.pad);
      if (ix < 0 || ix >= static_cast<long>(geo.w)) continue;
      f(oy * geo.ow + ox, static_cast<std::size_t>(iy) * geo.w +
                              static_cast<std::size_t>(ix));
    }
  }
}

}  // namespace

Var conv2d(Var input, Var kernels, std::size_t stride) {
  const ConvGeometry geo = conv_geometry(input.value(), kernels.value(), stride);
  Tensor out(Shape{geo.cout, geo.oh, geo.ow});
  const double* x = input.value().data().data();
  const double* k = kernels.value().data().data();
  double* o = out.data().data();
  const std::size_t in_plane = geo.h * geo.w;
  const std::size_t out_plane = geo.oh * geo.ow;
  for (std::size_t co = 0; co < geo.cout; ++co) {
    for (std::size_t ci = 0; ci < geo.cin; ++ci) {
      for (std::size_t ky = 0; ky < geo.k; ++ky) {
        for (std::size_t kx = 0; kx < geo.k; ++kx) {
          const double wv = k[((co * geo.cin + ci) * geo.k + ky) * geo.k + kx];
          if (wv == 0.0) continue;
          double* op = o + co * out_plane;
          const double* ip = x + ci * in_plane;
          for_each_tap(geo, ky, kx, [&](std::size_t oi, std::size_t ii) {
            op[oi] += wv * ip[ii];
          });
        }
      }
    }
  }
  return input.graph->record(
      OpKind::kConv2d, {input, kernels}, std::move(out),
      [geo, in_plane, out_plane](Graph& g, std::size_t self) {
        const std::size_t ix = g.input(self, 0);
        const std::size_t ik = g.input(self, 1);
        const double* go = g.grad_of(self).data().data();
        const double* xv = g.value_of(ix).data().data();
        const double* kv = g.value_of(ik).data().data();
        double* gx = g.requires_grad(ix) ? g.grad_slot(ix).data().data() : nullptr;
        double* gk = g.requires_grad(ik) ? g.grad_slot(ik).data().data() : nullptr;
        for (std::size_t co = 0; co < geo.cout; ++co) {
          for (std::size_t ci = 0; ci < geo.cin; ++ci) {
            for (std::size_t ky = 0; ky < geo.k; ++ky) {
              for (std::size_t kx = 0; kx < geo.k; ++kx) {
                const std::size_t kidx =
                    ((co * geo.cin + ci) * geo.k + ky) * geo.k + kx;
                const double* gop = go + co * out_plane;
                const double* ip = xv + ci * in_plane;
                if (gk) {
                  double acc = 0.0;
                  for_each_tap(geo, ky, kx, [&](std::size_t oi, std::size_t ii) {
                    acc += gop[oi] * ip[ii];
                  });
                  gk[kidx] += acc;
                }
                if (gx) {
                  const double wv = kv[kidx];
                  if (wv == 0.0) continue;
                  double* gip = gx + ci * in_plane;
                  for_each_tap(geo, ky, kx, [&](std::size_t oi, std::size_t ii) {
                    gip[ii] += wv * gop[oi];
                  });
                }
              }
            }
          }
        }
      });
}

Var add_channel_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  require_rank(xv, 3, "add_channel_bias");
  if (bv.rank() != 1 || bv.dim(0) != xv.dim(0)) {
    throw Error("add_channel_bias: shape mismatch " + shape_string(xv.shape()) +
                " vs " + shape_string(bv.shape()));
  }
  const std::size_t plane = xv.dim(1) * xv.dim(2);
  Tensor out = xv;
  for (std::size_t c = 0; c < xv.dim(0); ++c) {
    for (std::size_t p = 0; p < plane; ++p) out[c * plane + p] += bv[c];
  }
  return x.graph->record(
      OpKind::kChannelBias, {x, bias}, std::move(out),
      [plane](Graph& g, std::size_t self) {
        const std::size_t ix = g.input(self, 0);
        const std::size_t ib = g.input(self, 1);
        auto go = g.grad_of(self).data();
        if (g.requires_grad(ix)) {
          auto gx = g.grad_slot(ix).data();
          for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i];
        }
        if (g.requires_grad(ib)) {
          auto gb = g.grad_slot(ib).data();
          for (std::size_t c = 0; c < gb.size(); ++c) {
            double acc = 0.0;
            for (std::size_t p = 0; p < plane; ++p) acc += go[c * plane + p];
            gb[c] += acc;
          }
        }
      });
}

Var avg_pool2d(Var x, std::size_t factor) {
  const Tensor& xv = x.value();
  require_rank(xv, 3, "avg_pool2d");
  if (factor == 0 || xv.dim(1) % factor || xv.dim(2) % factor) {
    throw Error("avg_pool2d: factor " + std::to_string(factor) +
                " does not divide " + shape_string(xv.shape()));
  }
  const std::size_t c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  const std::size_t oh = h / factor, ow = w / factor;
  const double inv = 1.0 / static_cast<double>(factor * factor);
  Tensor out(Shape{c, oh, ow});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx)
        out.at(ch, y / factor, xx / factor) += xv.at(ch, y, xx) * inv;
  return x.graph->record(
      OpKind::kAvgPool, {x}, std::move(out),
      [c, h, w, factor, inv](Graph& g, std::size_t self) {
        const std::size_t ix = g.input(self, 0);
        const Tensor& go = g.grad_of(self);
        Tensor& gx = g.grad_slot(ix);
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t y = 0; y < h; ++y)
            for (std::size_t xx = 0; xx < w; ++xx)
              gx.at(ch, y, xx) += go.at(ch, y / factor, xx / factor) * inv;
      });
}

Var softmax2d(Var e) {
  require_rank(e.value(), 2, "softmax2d");
  return e.graph->record(
      OpKind::kSoftmax2d, {e}, softmax2d_value(e.value()),
      [](Graph& g, std::size_t self) {
        auto y = g.value_of(self).data();
        auto go = g.grad_of(self).data();
        double dot = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) dot += go[i] * y[i];
        auto gi = g.grad_slot(g.input(self, 0)).data();
        for (std::size_t i = 0; i < y.size(); ++i) gi[i] += y[i] * (go[i] - dot);
      });
}

Var channel_norm(Var x) {
  const Tensor& xv = x.value();
  require_rank(xv, 3, "channel_norm");
  const std::size_t c = xv.dim(0), plane = xv.dim(1) * xv.dim(2);
  Tensor out(Shape{xv.dim(1), xv.dim(2)});
  for (std::size_t p = 0; p < plane; ++p) {
    double ss = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) ss += xv[ch * plane + p] * xv[ch * plane + p];
    out[p] = std::sqrt(ss);
  }
  return x.graph->record(
      OpKind::kChannelNorm, {x}, std::move(out),
      [c, plane](Graph& g, std::size_t self) {
        const std::size_t ix = g.input(self, 0);
        auto n = g.value_of(self).data();
        auto go = g.grad_of(self).data();
        auto xv = g.value_of(ix).data();
        auto gx = g.grad_slot(ix).data();
        for (std::size_t p = 0; p < plane; ++p) {
          if (n[p] == 0.0) continue;
          const double s = go[p] / n[p];
          for (std::size_t ch = 0; ch < c; ++ch) gx[ch * plane + p] += s * xv[ch * plane + p];
        }
      });
}

Var channel_mean(Var x) {
  const Tensor& xv = x.value();
  require_rank(xv, 3, "channel_mean");
  const std::size_t c = xv.dim(0), plane = xv.dim(1) * xv.dim(2);
  const double inv = 1.0 / static_cast<double>(c);
  Tensor out(Shape{xv.dim(1), xv.dim(2)});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t p = 0; p < plane; ++p) out[p] += xv[ch * plane + p] * inv;
  return x.graph->record(
      OpKind::kChannelMean, {x}, std::move(out),
      [c, plane, inv](Graph& g, std::size_t self) {
        auto go = g.grad_of(self).data();
        auto gx = g.grad_slot(g.input(self, 0)).data();
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t p = 0; p < plane; ++p) gx[ch * plane + p] += go[p] * inv;
      });
}

Var mul_map(Var x, Var map) {
  const Tensor& xv = x.value();
  const Tensor& mv = map.value();
  require_rank(xv, 3, "mul_map");
  if (mv.rank() != 2 || mv.dim(0) != xv.dim(1) || mv.dim(1) != xv.dim(2)) {
    throw Error("mul_map: shape mismatch " + shape_string(xv.shape()) + " vs " +
                shape_string(mv.shape()));
  }
  const std::size_t c = xv.dim(0), plane = mv.size();
  Tensor out(xv.shape());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t p = 0; p < plane; ++p)
      out[ch * plane + p] = xv[ch * plane + p] * mv[p];
  return x.graph->record(
      OpKind::kMulMap, {x, map}, std::move(out),
      [c, plane](Graph& g, std::size_t self) {
        const std::size_t ix = g.input(self, 0);
        const std::size_t im = g.input(self, 1);
        auto go = g.grad_of(self).data();
        auto xv = g.value_of(ix).data();
        auto mv = g.value_of(im).data();
        if (g.requires_grad(ix)) {
          auto gx = g.grad_slot(ix).data();
          for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t p = 0; p < plane; ++p)
              gx[ch * plane + p] += go[ch * plane + p] * mv[p];
        }
        if (g.requires_grad(im)) {
          auto gm = g.grad_slot(im).data();
          for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t p = 0; p < plane; ++p)
              gm[p] += go[ch * plane + p] * xv[ch * plane + p];
        }
      });
}

Var spatial_sum(Var x) {
  const Tensor& xv = x.value();
  require_rank(xv, 3, "spatial_sum");
  const std::size_t c = xv.dim(0), plane = xv.dim(1) * xv.dim(2);
  Tensor out(Shape{c});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t p = 0; p < plane; ++p) out[ch] += xv[ch * plane + p];
  return x.graph->record(
      OpKind::kSpatialSum, {x}, std::move(out),
      [c, plane](Graph& g, std::size_t self) {
        auto go = g.grad_of(self).data();
        auto gx = g.grad_slot(g.input(self, 0)).data();
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t p = 0; p < plane; ++p) gx[ch * plane + p] += go[ch];
      });
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return a.graph->record(OpKind::kReshape, {a}, std::move(out),
                         [](Graph& g, std::size_t self) {
                           auto go = g.grad_of(self).data();
                           auto gi = g.grad_slot(g.input(self, 0)).data();
                           for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += go[i];
                         });
}

Var slice(Var a, std::size_t offset, std::size_t length) {
  const Tensor& av = a.value();
  require_rank(av, 1, "slice");
  if (offset + length > av.size()) {
    throw Error("slice: range [" + std::to_string(offset) + "," +
                std::to_string(offset + length) + ") outside " +
                shape_string(av.shape()));
  }
  Tensor out(Shape{length});
  std::copy_n(av.data().begin() + static_cast<long>(offset), length,
              out.data().begin());
  return a.graph->record(OpKind::kSlice, {a}, std::move(out),
                         [offset](Graph& g, std::size_t self) {
                           auto go = g.grad_of(self).data();
                           auto gi = g.grad_slot(g.input(self, 0)).data();
                           for (std::size_t i = 0; i < go.size(); ++i)
                             gi[offset + i] += go[i];
                         });
}

}  // namespace ops
}  // namespace actloc
