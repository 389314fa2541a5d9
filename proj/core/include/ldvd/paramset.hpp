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
#include <span>
#include <string>
#include <vector>

#include "ldvd/tensor.hpp"

namespace ldvd {

/// Ordered, named collection of parameter tensors. flatten/unflatten walk
/// entries in insertion order, so flatten followed by unflatten is the
/// identity bit for bit.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  void add(std::string name, Tensor t);

  size_t size() const { return entries_.size(); }
  const Entry& entry(size_t i) const { return entries_[i]; }
  Tensor& tensor(size_t i) { return entries_[i].tensor; }
  const Tensor& tensor(size_t i) const { return entries_[i].tensor; }
  const Tensor* find(const std::string& name) const;
  Tensor* find(const std::string& name);

  int64_t total_dim() const { return total_dim_; }

  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  /// Byte-stable content hash (names, shapes, values).
  uint64_t checksum() const;

 private:
  std::vector<Entry> entries_;
  int64_t total_dim_ = 0;
};

/// Checkpoint container ("LDPS"): magic, version, entries, FNV-1a footer.
void save_paramset(const std::string& path, const ParamSet& ps);
ParamSet load_paramset(const std::string& path);

}  // namespace ldvd
