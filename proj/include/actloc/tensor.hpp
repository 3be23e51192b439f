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

#ifndef ACTLOC_TENSOR_HPP_
#define ACTLOC_TENSOR_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace actloc {

/// Raised for malformed shapes, bad arguments and other contract violations
/// inside the numerics and simulation core.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major tensor of doubles. A rank-0 tensor (empty shape) holds one
/// value and acts as a scalar.
class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(Shape{}, v); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  bool is_scalar() const { return data_.size() == 1 && shape_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }
  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return data_[(c * shape_[1] + i) * shape_[2] + j];
  }

  /// Value of a single-element tensor.
  double item() const;
  bool all_finite() const;
  void fill(double v);
  Tensor reshaped(Shape shape) const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Named learnable tensors with gradient accumulators of identical shape.
/// Iteration order is insertion order, so updates are deterministic.
class ParameterSet {
 public:
  void add(const std::string& name, Tensor init);
  bool contains(const std::string& name) const;

  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  const Tensor& grad(const std::string& name) const;

  const std::vector<std::string>& names() const { return names_; }
  std::size_t count() const { return names_.size(); }
  std::size_t total_size() const;

  void zero_grad();

 private:
  std::size_t index_of(const std::string& name) const;

  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<Tensor> grads_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace actloc

#endif  // ACTLOC_TENSOR_HPP_
