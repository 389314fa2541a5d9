/* Copyright (c) 2026 The LDVD Lab Authors. All Rights Reserved.
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at
   http://www.apache.org/licenses/LICENSE-2.0
   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */

#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace ldvd {

using Shape = std::vector<int64_t>;

std::string shape_str(const Shape& s);
int64_t shape_numel(const Shape& s);

/// Dense N-dimensional array of 64-bit reals, row-major.
/// Invariants: every dimension >= 1 and numel == data size. A
/// default-constructed Tensor is the empty sentinel (rank 0, no data).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor full(Shape shape, double v);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  int64_t dim(int axis) const { return shape_[static_cast<size_t>(axis)]; }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  /// Row-major offset of a multi-index; bounds are the caller's problem.
  int64_t offset(std::initializer_list<int64_t> idx) const;
  double at(std::initializer_list<int64_t> idx) const { return data_[static_cast<size_t>(offset(idx))]; }
  double& at(std::initializer_list<int64_t> idx) { return data_[static_cast<size_t>(offset(idx))]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  double norm2() const;
  double sum() const;
  double abs_max() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace ldvd
