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

#include <benchmark/benchmark.h>

#include "ldvd/graph.hpp"
#include "ldvd/network.hpp"
#include "ldvd/presets.hpp"
#include "ldvd/rng.hpp"

using namespace ldvd;

namespace {

Tensor random_video(int64_t b, int64_t t, int64_t hw, int64_t c, uint64_t seed) {
  Rng rng(seed);
  Tensor x({b, t, hw, hw, c});
  rng.fill_uniform(x, -1, 1);
  return x;
}

void BM_Conv3dForward(benchmark::State& state) {
  const int64_t ch = state.range(0);
  Tensor x = random_video(4, 16, 16, 1, 1);
  Rng rng(2);
  Tensor k({ch, 4, 4, 4, 1});
  rng.fill_normal(k);
  for (auto _ : state) {
    Graph g;
    NodeId y = g.conv(g.constant(x), g.constant(k), {2, 2, 2}, {1, 1, 1});
    benchmark::DoNotOptimize(g.value(y).data());
  }
}
BENCHMARK(BM_Conv3dForward)->Arg(8)->Arg(16)->Arg(32);

void BM_FactorizedForward(benchmark::State& state) {
  const int64_t ch = state.range(0);
  Tensor x = random_video(4, 16, 16, 1, 1);
  Rng rng(3);
  Tensor ks({ch, 1, 4, 4, 1});
  rng.fill_normal(ks);
  Tensor kt({ch, 4, 1, 1, ch});
  rng.fill_normal(kt);
  for (auto _ : state) {
    Graph g;
    NodeId sp = g.conv(g.constant(x), g.constant(ks), {1, 2, 2}, {0, 1, 1});
    NodeId y = g.conv(g.leaky_relu(sp, kLreluSlope), g.constant(kt), {2, 1, 1}, {1, 0, 0});
    benchmark::DoNotOptimize(g.value(y).data());
  }
}
BENCHMARK(BM_FactorizedForward)->Arg(8)->Arg(16)->Arg(32);

void BM_TemporalShift(benchmark::State& state) {
  Tensor x = random_video(4, 16, 16, 8, 4);
  for (auto _ : state) {
    Graph g;
    NodeId y = g.temporal_shift(g.constant(x), 0.25, 1);
    benchmark::DoNotOptimize(g.value(y).data());
  }
}
BENCHMARK(BM_TemporalShift);

void BM_DiscriminatorForward(benchmark::State& state) {
  Network d = Network::build(get_preset("tgan-toy-d").parts[0], 5);
  Tensor x = random_video(4, 16, 16, 1, 7);
  for (auto _ : state) {
    Graph g;
    auto leaves = d.bind(g);
    NodeId y = d.forward(g, g.constant(x), leaves, BnMode::kTrain);
    benchmark::DoNotOptimize(g.value(y).data());
  }
}
BENCHMARK(BM_DiscriminatorForward);

}  // namespace

BENCHMARK_MAIN();
