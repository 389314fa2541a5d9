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

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <cstdio>

#include "ldvd/gan.hpp"
#include "ldvd/metrics.hpp"
#include "ldvd/presets.hpp"
#include "ldvd/rng.hpp"

using namespace ldvd;

TEST_CASE("inception-style score identities") {
  {
    // identical rows: conditional equals marginal, score 1
    Tensor probs({5, 3});
    for (int64_t i = 0; i < 5; ++i) {
      probs[i * 3 + 0] = 0.2;
      probs[i * 3 + 1] = 0.5;
      probs[i * 3 + 2] = 0.3;
    }
    CHECK(inception_style_score(probs) == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    // C balanced one-hots: score C
    const int64_t c = 4;
    Tensor probs({8, c});
    for (int64_t i = 0; i < 8; ++i) probs[i * c + (i % c)] = 1.0;
    CHECK(inception_style_score(probs) == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("inception-style score equals the double-loop KL computation") {
  Rng rng(3);
  const int64_t n = 40, c = 5;
  Tensor probs({n, c});
  for (int64_t i = 0; i < n; ++i) {
    double s = 0;
    for (int64_t j = 0; j < c; ++j) {
      probs[i * c + j] = rng.uniform(0.01, 1.0);
      s += probs[i * c + j];
    }
    for (int64_t j = 0; j < c; ++j) probs[i * c + j] /= s;
  }
  // naive reference
  std::vector<double> marginal(static_cast<size_t>(c), 0.0);
  for (int64_t j = 0; j < c; ++j) {
    for (int64_t i = 0; i < n; ++i) marginal[static_cast<size_t>(j)] += probs[i * c + j];
    marginal[static_cast<size_t>(j)] /= static_cast<double>(n);
  }
  double mean_kl = 0;
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      mean_kl += probs[i * c + j] * std::log(probs[i * c + j] / marginal[static_cast<size_t>(j)]);
    }
  }
  mean_kl /= static_cast<double>(n);
  CHECK(std::fabs(inception_style_score(probs) - std::exp(mean_kl)) < 1e-10);
  CHECK(inception_style_score(probs) >= 1.0);
}

TEST_CASE("inception-style score is invariant to row order and rejects bad rows") {
  Tensor probs({3, 2}, {0.9, 0.1, 0.4, 0.6, 0.2, 0.8});
  Tensor shuffled({3, 2}, {0.2, 0.8, 0.9, 0.1, 0.4, 0.6});
  CHECK(inception_style_score(probs) == doctest::Approx(inception_style_score(shuffled)).epsilon(1e-12));
  Tensor bad({1, 2}, {0.7, 0.7});
  CHECK_THROWS_AS(inception_style_score(bad), std::invalid_argument);
  Tensor neg({1, 2}, {1.2, -0.2});
  CHECK_THROWS_AS(inception_style_score(neg), std::invalid_argument);
}

namespace {

FeatureStats make_stats(const Tensor& mean, const Tensor& cov) {
  FeatureStats st;
  st.mean = mean;
  st.cov = cov;
  st.count = 1000;
  return st;
}

Tensor scaled_identity(int64_t n, double s) {
  Tensor c({n, n});
  for (int64_t i = 0; i < n; ++i) c[i * n + i] = s;
  return c;
}

}  // namespace

TEST_CASE("frechet distance closed forms") {
  const int64_t n = 6;
  {
    // identical Gaussians: zero
    Rng rng(7);
    Tensor mu({n});
    rng.fill_normal(mu);
    Tensor cov = scaled_identity(n, 1.7);
    CHECK(frechet_distance(make_stats(mu, cov), make_stats(mu, cov)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  }
  {
    // mean shift d with equal covariance: d^2 * n
    const double d = 0.9;
    Tensor mu1({n});
    Tensor mu2 = Tensor::full({n}, d);
    Tensor cov = scaled_identity(n, 0.8);
    const double got = frechet_distance(make_stats(mu1, cov), make_stats(mu2, cov));
    CHECK(std::fabs(got - d * d * static_cast<double>(n)) < 1e-8);
  }
  {
    // equal means, covariances aI and bI: n (sqrt(a) - sqrt(b))^2
    const double a = 2.0, b = 0.5;
    Tensor mu({n});
    const double got = frechet_distance(make_stats(mu, scaled_identity(n, a)), make_stats(mu, scaled_identity(n, b)));
    const double want = static_cast<double>(n) * (std::sqrt(a) - std::sqrt(b)) * (std::sqrt(a) - std::sqrt(b));
    CHECK(std::fabs(got - want) < 1e-8);
  }
}

TEST_CASE("frechet distance symmetry and dimension checks") {
  Rng rng(11);
  const int64_t n = 5;
  Tensor mu1({n}), mu2({n});
  rng.fill_normal(mu1);
  rng.fill_normal(mu2);
  // random PSD covariances via A A^T
  auto psd = [&](uint64_t seed) {
    Rng r(seed);
    Tensor a({n, n});
    r.fill_normal(a);
    Tensor c({n, n});
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < n; ++j) {
        double s = 0;
        for (int64_t k = 0; k < n; ++k) s += a[i * n + k] * a[j * n + k];
        c[i * n + j] = s;
      }
    return c;
  };
  auto s1 = make_stats(mu1, psd(1));
  auto s2 = make_stats(mu2, psd(2));
  const double ab = frechet_distance(s1, s2);
  const double ba = frechet_distance(s2, s1);
  CHECK(std::fabs(ab - ba) < 1e-9);
  CHECK(ab >= 0);

  FeatureStats wrong = make_stats(Tensor({n + 1}), scaled_identity(n + 1, 1.0));
  CHECK_THROWS_AS(frechet_distance(s1, wrong), std::invalid_argument);
}

TEST_CASE("feature stats from rows") {
  // two points: mean is the midpoint, unbiased covariance is half the
  // squared spread on the diagonal
  Tensor feats({2, 2}, {0.0, 0.0, 2.0, 4.0});
  FeatureStats st = compute_feature_stats(feats);
  CHECK(st.mean[0] == doctest::Approx(1.0));
  CHECK(st.mean[1] == doctest::Approx(2.0));
  CHECK(st.cov[0] == doctest::Approx(2.0));   // var of {0,2}
  CHECK(st.cov[3] == doctest::Approx(8.0));   // var of {0,4}
  CHECK(st.cov[1] == doctest::Approx(4.0));   // cov
  CHECK(st.cov[1] == st.cov[2]);
}

TEST_CASE("parameter reductions reproduce Table-style percentages") {
  for (const auto& row : published_reduction_table()) {
    CAPTURE(row.label);
    const int64_t base = preset_param_count(get_preset(row.base));
    const int64_t variant = preset_param_count(get_preset(row.variant));
    const double pct = param_reduction_percent(base, variant);
    CHECK(std::fabs(pct - row.published_percent) <= 1.0);
  }
  CHECK(param_reduction_percent(1000, 1000) == doctest::Approx(0.0));
}

TEST_CASE("surrogate extractor: trains past 90% held-out accuracy, checksums, round trips") {
  SurrogateExtractor::TrainSettings s;
  s.canvas = 16;
  s.frames = 8;
  SurrogateExtractor ex = SurrogateExtractor::train(s);

  SynthSceneConfig scene;
  scene.canvas = s.canvas;
  scene.motion = MotionKind::kMix;
  PreprocessConfig prep;
  prep.clip_len = s.frames;
  prep.out_size = s.canvas;
  SynthDataSource held(scene, prep, 0, Rng(999));
  auto [batch, labels] = held.next_labeled_batch(60);
  const double acc = ex.accuracy(batch, labels);
  CAPTURE(acc);
  CHECK(acc > 0.9);

  auto [feats, probs] = ex.extract(batch);
  CHECK(feats.shape() == Shape{60, 16});
  for (int64_t i = 0; i < probs.dim(0); ++i) {
    double s_row = 0;
    for (int64_t j = 0; j < probs.dim(1); ++j) s_row += probs[i * probs.dim(1) + j];
    CHECK(std::fabs(s_row - 1.0) < 1e-9);
  }
  // identical inputs, identical features
  auto [feats2, probs2] = ex.extract(batch);
  for (int64_t i = 0; i < feats.numel(); ++i) CHECK(feats[i] == feats2[i]);

  const std::string path = std::string(LDVD_TEST_TMP) + "/extractor.ldps";
  ex.save(path);
  SurrogateExtractor back = SurrogateExtractor::load(path);
  CHECK(back.checksum() == ex.checksum());
  auto [feats3, probs3] = back.extract(batch);
  for (int64_t i = 0; i < feats.numel(); ++i) CHECK(feats[i] == feats3[i]);

  // corrupt one byte: the load is rejected
  {
    FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f);
    std::fseek(f, 40, SEEK_SET);
    int ch = std::fgetc(f);
    std::fseek(f, 40, SEEK_SET);
    std::fputc(ch ^ 0x08, f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(SurrogateExtractor::load(path), std::runtime_error);
  CHECK_THROWS_AS(SurrogateExtractor::load(path + ".missing"), std::runtime_error);
}

TEST_CASE("trained generator sits closer to the real statistics than an untrained one") {
  // Directional metric-sanity check over three seeds: brief adversarial
  // training moves the generator's feature statistics toward the data.
  SurrogateExtractor::TrainSettings ts;
  ts.canvas = 16;
  ts.frames = 8;
  const std::string ex_path = std::string(LDVD_TEST_TMP) + "/fd_sanity_extractor.ldps";
  SurrogateExtractor extractor = [&] {
    try {
      return SurrogateExtractor::load(ex_path);
    } catch (const std::exception&) {
      SurrogateExtractor ex = SurrogateExtractor::train(ts);
      ex.save(ex_path);
      return ex;
    }
  }();

  SynthSceneConfig scene;
  scene.canvas = 16;
  scene.motion = MotionKind::kMix;
  PreprocessConfig prep;
  prep.clip_len = 8;
  prep.out_size = 16;

  auto real_stats = [&](uint64_t seed) {
    SynthDataSource src(scene, prep, 0, Rng(seed).stream("metrics-real"));
    auto [feats, probs] = extractor.extract(src.next_batch(96));
    (void)probs;
    return compute_feature_stats(feats);
  };
  auto fake_stats = [&](ToyGenerator& gen, uint64_t seed) {
    Rng lat(seed ^ 0xfa4e);
    LatentBatch z = gen.sample_latents(lat, 96);
    auto [feats, probs] = extractor.extract(gen.generate(z));
    (void)probs;
    return compute_feature_stats(feats);
  };

  int wins = 0;
  for (uint64_t seed : {61ull, 62ull, 63ull}) {
    ToyGeneratorConfig gc;
    gc.frames = 8;
    ToyGenerator gen = ToyGenerator::build(ToyGenerator::Kind::kTgan, gc, Rng(seed).stream("gen").seed());
    const FeatureStats real = real_stats(seed);
    const double fd_before = frechet_distance(real, fake_stats(gen, seed));

    Network dis = Network::build(get_preset("tgan-toy-d").parts[0], Rng(seed).stream("dis").seed());
    NetSpec dspec = dis.spec();
    dspec.input = {8, 16, 16, 1};
    dis = Network::build(dspec, Rng(seed).stream("dis").seed());
    SynthDataSource src(scene, prep, 0, Rng(seed).stream("data"));
    TrainConfig tc;
    tc.iterations = 1500;  // enough adversarial steps to move past init luck
    tc.batch_size = 8;
    tc.seed = seed;
    auto art = train(tc, gen, dis, [&src](int64_t b) { return src.next_batch(b); });
    REQUIRE_FALSE(art.halted);
    const double fd_after = frechet_distance(real, fake_stats(gen, seed));
    CAPTURE(seed);
    CAPTURE(fd_before);
    CAPTURE(fd_after);
    if (fd_after < fd_before) ++wins;
  }
  CHECK(wins == 3);
}
