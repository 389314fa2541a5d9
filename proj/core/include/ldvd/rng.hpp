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

#include <array>
#include <cstdint>
#include <string_view>

#include "ldvd/tensor.hpp"

namespace ldvd {

/// xoshiro256++ seeded through SplitMix64. Every run artifact is a pure
/// function of the seed, so the standard library engines (whose streams are
/// not pinned across implementations) are not used anywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (one fresh pair per call, spare unused).
  double normal();
  int64_t uniform_int(int64_t lo, int64_t hi);  // inclusive bounds

  void fill_uniform(Tensor& t, double lo, double hi);
  void fill_normal(Tensor& t);

  /// Deterministic substream derived from this generator's seed and a tag.
  /// Substreams are independent of draw order on the parent.
  Rng stream(std::string_view tag) const;
  Rng stream(uint64_t tag) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_ = 0;
  std::array<uint64_t, 4> s_{};
};

/// FNV-1a over raw bytes; used for content checksums and run ids.
uint64_t fnv1a(const void* data, size_t n, uint64_t h = 1469598103934665603ull);

}  // namespace ldvd
