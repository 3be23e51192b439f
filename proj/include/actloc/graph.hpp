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

// Tape-based reverse-mode differentiation over Tensor values.
//
// A Graph records one forward pass. Every op appends a node holding its
// output value and a closure that pushes the node's gradient into its inputs.
// Nodes are appended in evaluation order, so the reverse of the recording
// order is a valid topological order for the backward sweep.

#ifndef ACTLOC_GRAPH_HPP_
#define ACTLOC_GRAPH_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "actloc/tensor.hpp"

namespace actloc {

enum class OpKind {
  kConstant,
  kLeaf,
  kParameter,
  kAdd,
  kSub,
  kMul,
  kSigmoid,
  kExp,
  kTanh,
  kScale,
  kSum,
  kMean,
  kNorm,
  kMatVec,
  kConv2d,
  kChannelBias,
  kAvgPool,
  kSoftmax2d,
  kChannelNorm,
  kChannelMean,
  kMulMap,
  kSpatialSum,
  kReshape,
  kSlice,
};

const char* op_name(OpKind kind);

class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid while the Graph
/// that produced it is alive.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// A value that never receives a gradient.
  Var constant(Tensor value);
  /// A differentiable input whose gradient can be read after backward().
  Var leaf(Tensor value);
  /// Binds a parameter; backward() accumulates into params.grad(name).
  Var parameter(ParameterSet& params, const std::string& name);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  /// Gradient of the last backward() loss with respect to v. Zero-filled for
  /// nodes the loss does not depend on.
  const Tensor& grad(Var v) const;
  OpKind kind(Var v) const { return nodes_[v.id].kind; }
  const std::vector<std::size_t>& inputs(Var v) const {
    return nodes_[v.id].inputs;
  }
  std::size_t size() const { return nodes_.size(); }
  /// Owning set of a parameter node, nullptr for every other node kind.
  const ParameterSet* parameter_owner(Var v) const {
    return nodes_[v.id].params;
  }

  /// Reverse sweep from a scalar loss. Each node is visited exactly once.
  void backward(Var loss);

  // Op-author interface.
  Var record(OpKind kind, std::vector<Var> inputs, Tensor value,
             BackwardFn backward);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const Tensor& value_of(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad_of(std::size_t id) const { return nodes_[id].grad; }
  std::size_t input(std::size_t id, std::size_t k) const {
    return nodes_[id].inputs[k];
  }
  /// Gradient accumulator of a node, allocated on first use.
  Tensor& grad_slot(std::size_t id);

 private:
  struct Node {
    OpKind kind;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
    ParameterSet* params = nullptr;
    std::string param_name;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
};

/// Runs the backward sweep and checks that every parameter node on the tape is
/// bound to `params`.
void backward(Graph& graph, Var loss, ParameterSet& params);

namespace ops {

// Elementwise ops support exact shape match or a single-element operand.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var sigmoid(Var a);
Var exp(Var a);
Var tanh(Var a);
Var scale(Var a, double factor);

Var sum(Var a);
Var mean(Var a);
/// Euclidean norm of all entries. Uses the zero subgradient at the origin.
Var norm(Var a);

/// [m,n] x [n] -> [m]
Var matvec(Var weights, Var x);
/// Same-padded 2D convolution: [Cin,H,W] * [Cout,Cin,k,k] -> [Cout,ceil(H/s),ceil(W/s)].
Var conv2d(Var input, Var kernels, std::size_t stride);
/// [C,H,W] + [C] broadcast over space.
Var add_channel_bias(Var x, Var bias);
/// Non-overlapping mean pooling by `factor`; H and W must be divisible.
Var avg_pool2d(Var x, std::size_t factor);
/// Max-shifted softmax over all cells of an [H,W] map.
Var softmax2d(Var e);
/// Per-cell Euclidean norm across channels: [C,H,W] -> [H,W].
Var channel_norm(Var x);
/// Per-cell mean across channels: [C,H,W] -> [H,W].
Var channel_mean(Var x);
/// [C,H,W] * [H,W] broadcast over channels.
Var mul_map(Var x, Var map);
/// Sum over space: [C,H,W] -> [C].
Var spatial_sum(Var x);
Var reshape(Var a, Shape shape);
/// Contiguous sub-range of a rank-1 tensor.
Var slice(Var a, std::size_t offset, std::size_t length);

}  // namespace ops

/// Forward-only softmax over all entries; shared by ops::softmax2d.
Tensor softmax2d_value(const Tensor& e);

}  // namespace actloc

#endif  // ACTLOC_GRAPH_HPP_
