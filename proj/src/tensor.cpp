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

#include "actloc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace actloc {

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw Error("tensor data length " + std::to_string(data_.size()) +
                " does not match shape " + shape_string(shape_));
  }
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw Error("item() on tensor of shape " + shape_string(shape_));
  }
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw Error("cannot reshape " + shape_string(shape_) + " to " +
                shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

void ParameterSet::add(const std::string& name, Tensor init) {
  if (index_.contains(name)) throw Error("duplicate parameter '" + name + "'");
  index_.emplace(name, names_.size());
  names_.push_back(name);
  grads_.emplace_back(init.shape(), 0.0);
  values_.push_back(std::move(init));
}

bool ParameterSet::contains(const std::string& name) const {
  return index_.contains(name);
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  return it->second;
}

Tensor& ParameterSet::value(const std::string& name) {
  return values_[index_of(name)];
}
const Tensor& ParameterSet::value(const std::string& name) const {
  return values_[index_of(name)];
}
Tensor& ParameterSet::grad(const std::string& name) {
  return grads_[index_of(name)];
}
const Tensor& ParameterSet::grad(const std::string& name) const {
  return grads_[index_of(name)];
}

std::size_t ParameterSet::total_size() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& g : grads_) g.fill(0.0);
}

}  // namespace actloc
