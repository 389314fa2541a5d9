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

#include "ldvd/curvature.hpp"
#include "ldvd/lipschitz.hpp"
#include "ldvd/presets.hpp"
#include "ldvd/rng.hpp"

using namespace ldvd;

namespace {

struct SpectrumFixture {
  Network d = Network::build(get_preset("tgan-toy-d").parts[0], 11);
  Tensor real, fake;

  SpectrumFixture() {
    Rng rng(13);
    real = Tensor({4, 16, 16, 16, 1});
    rng.fill_uniform(real, -1, 1);
    fake = Tensor({4, 16, 16, 16, 1});
    rng.fill_uniform(fake, -1, 1);
  }
};

void BM_GradientPass(benchmark::State& state) {
  SpectrumFixture fx;
  for (auto _ : state) {
    Graph g;
    auto leaves = fx.d.bind(g);
    NodeId out = fx.d.forward(g, g.constant(fx.real), leaves, BnMode::kTrain);
    NodeId loss = g.mean_all(g.softplus(g.scale(out, -1.0)));
    auto grads = gradient_flat(g, loss, leaves);
    benchmark::DoNotOptimize(grads.data());
  }
}
BENCHMARK(BM_GradientPass);

void BM_HvpApply(benchmark::State& state) {
  SpectrumFixture fx;
  Graph g;
  auto leaves = fx.d.bind(g);
  NodeId out = fx.d.forward(g, g.constant(fx.real), leaves, BnMode::kFrozen);
  NodeId loss = g.mean_all(g.softplus(g.scale(out, -1.0)));
  HvpOperator h(g, loss, leaves);
  Rng rng(17);
  std::vector<double> v(static_cast<size_t>(h.dim()));
  for (auto& x : v) x = rng.normal();
  for (auto _ : state) {
    auto hv = h.apply(v);
    benchmark::DoNotOptimize(hv.data());
  }
}
BENCHMARK(BM_HvpApply);

void BM_DiscriminatorSpectrum(benchmark::State& state) {
  SpectrumFixture fx;
  SpectrumOptions opts;
  opts.k = static_cast<int>(state.range(0));
  opts.seed = 19;
  for (auto _ : state) {
    Network snapshot = fx.d;
    auto rec = discriminator_spectrum(snapshot, fx.real, fx.fake, opts);
    benchmark::DoNotOptimize(rec.eigenvalues.data());
  }
}
BENCHMARK(BM_DiscriminatorSpectrum)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SvdClip(benchmark::State& state) {
  Rng rng(23);
  Tensor w({64, 256});
  rng.fill_normal(w);
  for (auto _ : state) {
    Tensor c = svd_clip(w, 1.0);
    benchmark::DoNotOptimize(c.data());
  }
}
BENCHMARK(BM_SvdClip)->Unit(benchmark::kMillisecond);

}  // namespace
