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
#include <functional>
#include <span>
#include <vector>

namespace ldvd {

using LinearOperator = std::function<std::vector<double>(std::span<const double>)>;

struct LanczosResult {
  std::vector<double> ritz_values;  // descending
  bool breakdown = false;           // beta vanished: an exact invariant subspace was found
  int iterations = 0;
};

/// Lanczos with full reorthogonalization on a symmetric operator. With
/// max_iters == dim the Ritz values match a dense eigendecomposition; with
/// fewer iterations they approximate the extremal spectrum from both ends.
/// The start vector is a seeded unit Gaussian.
LanczosResult lanczos_extremal(const LinearOperator& op, int64_t dim, int k, int max_iters, uint64_t seed);

}  // namespace ldvd
