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

#include "ldvd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ldvd/gan.hpp"
#include "ldvd/linalg.hpp"

namespace ldvd {

namespace {

// Kahan-compensated accumulator.
struct KahanSum {
  double s = 0, c = 0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

}  // namespace

FeatureStats compute_feature_stats(const Tensor& features) {
  if (features.rank() != 2) throw std::invalid_argument("compute_feature_stats: (N,D) rows required");
  const int64_t n = features.dim(0), d = features.dim(1);
  if (n < 2) throw std::invalid_argument("compute_feature_stats: need at least 2 samples");
  FeatureStats st;
  st.count = n;
  st.mean = Tensor({d});
  for (int64_t j = 0; j < d; ++j) {
    KahanSum ks;
    for (int64_t i = 0; i < n; ++i) ks.add(features[i * d + j]);
    st.mean[j] = ks.s / static_cast<double>(n);
  }
  st.cov = Tensor({d, d});
  for (int64_t a = 0; a < d; ++a) {
    for (int64_t b = a; b < d; ++b) {
      KahanSum ks;
      for (int64_t i = 0; i < n; ++i) {
        ks.add((features[i * d + a] - st.mean[a]) * (features[i * d + b] - st.mean[b]));
      }
      const double v = ks.s / static_cast<double>(n - 1);
      st.cov[a * d + b] = v;
      st.cov[b * d + a] = v;
    }
  }
  return st;
}

double inception_style_score(const Tensor& probs) {
  if (probs.rank() != 2) throw std::invalid_argument("inception_style_score: (N,C) rows required");
  const int64_t n = probs.dim(0), c = probs.dim(1);
  if (n < 1) throw std::invalid_argument("inception_style_score: need at least one row");
  for (int64_t i = 0; i < n; ++i) {
    double s = 0;
    for (int64_t j = 0; j < c; ++j) {
      const double p = probs[i * c + j];
      if (p < -1e-12) throw std::invalid_argument("inception_style_score: negative probability in row " + std::to_string(i));
      s += p;
    }
    if (std::fabs(s - 1.0) > 1e-6) {
      throw std::invalid_argument("inception_style_score: row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
  }
  std::vector<double> marginal(static_cast<size_t>(c), 0.0);
  for (int64_t j = 0; j < c; ++j) {
    KahanSum ks;
    for (int64_t i = 0; i < n; ++i) ks.add(probs[i * c + j]);
    marginal[static_cast<size_t>(j)] = ks.s / static_cast<double>(n);
  }
  KahanSum kl_sum;
  for (int64_t i = 0; i < n; ++i) {
    double kl = 0;
    for (int64_t j = 0; j < c; ++j) {
      const double p = probs[i * c + j];
      if (p <= 0) continue;
      kl += p * (std::log(p) - std::log(marginal[static_cast<size_t>(j)]));
    }
    kl_sum.add(kl);
  }
  return std::exp(kl_sum.s / static_cast<double>(n));
}

namespace {

Tensor sqrt_psd(const Tensor& s, double* floored) {
  EighResult eig = jacobi_eigh(s);
  const int64_t d = s.dim(0);
  Tensor out({d, d});
  for (int64_t i = 0; i < d; ++i)
    for (int64_t j = 0; j < d; ++j) {
      double acc = 0;
      for (int64_t k = 0; k < d; ++k) {
        double lam = eig.eigenvalues[static_cast<size_t>(k)];
        if (lam < 0) {
          if (floored) *floored = std::max(*floored, -lam);
          lam = 0;
        }
        acc += eig.eigenvectors[i * d + k] * std::sqrt(lam) * eig.eigenvectors[j * d + k];
      }
      out[i * d + j] = acc;
    }
  return out;
}

}  // namespace

double frechet_distance(const FeatureStats& a, const FeatureStats& b) {
  if (a.mean.numel() != b.mean.numel()) {
    throw std::invalid_argument("frechet_distance: dimension mismatch " + shape_str(a.mean.shape()) + " vs " +
                                shape_str(b.mean.shape()));
  }
  const int64_t d = a.mean.numel();
  for (int64_t i = 0; i < d; ++i)
    for (int64_t j = 0; j < d; ++j) {
      if (std::fabs(a.cov[i * d + j] - a.cov[j * d + i]) > 1e-10 ||
          std::fabs(b.cov[i * d + j] - b.cov[j * d + i]) > 1e-10) {
        throw std::invalid_argument("frechet_distance: covariance not symmetric within 1e-10");
      }
    }
  double mean_term = 0;
  for (int64_t i = 0; i < d; ++i) {
    const double diff = a.mean[i] - b.mean[i];
    mean_term += diff * diff;
  }
  double floored = 0;
  const Tensor s1h = sqrt_psd(a.cov, &floored);
  Tensor m = matmul_dense(matmul_dense(s1h, b.cov), s1h);
  // symmetrize before the second root
  for (int64_t i = 0; i < d; ++i)
    for (int64_t j = i + 1; j < d; ++j) {
      const double v = 0.5 * (m[i * d + j] + m[j * d + i]);
      m[i * d + j] = v;
      m[j * d + i] = v;
    }
  EighResult eig = jacobi_eigh(m);
  double tr_sqrt = 0;
  for (double lam : eig.eigenvalues) tr_sqrt += std::sqrt(std::max(0.0, lam));
  double tr = 0;
  for (int64_t i = 0; i < d; ++i) tr += a.cov[i * d + i] + b.cov[i * d + i];
  const double fd = mean_term + tr - 2.0 * tr_sqrt;
  return std::max(0.0, fd);
}

double param_reduction_percent(int64_t base_count, int64_t variant_count) {
  if (base_count <= 0) throw std::invalid_argument("param_reduction_percent: base count must be positive");
  return 100.0 * (1.0 - static_cast<double>(variant_count) / static_cast<double>(base_count));
}

namespace {

NetSpec extractor_trunk_spec(int64_t canvas, int64_t frames, int64_t channels) {
  NetSpec n;
  n.name = "surrogate-trunk";
  n.input = {frames, canvas, canvas, channels};
  LayerSpec c0;
  c0.label = "c0";
  c0.kind = LayerKind::kConv3d;
  c0.channels_out = 8;
  c0.kernel = {4, 4, 4};
  c0.stride = {2, 2, 2};
  c0.pad = {1, 1, 1};
  c0.act = ActKind::kLeakyRelu;
  LayerSpec c1 = c0;
  c1.label = "c1";
  c1.channels_out = 16;
  LayerSpec l0;
  l0.label = "fc0";
  l0.kind = LayerKind::kLinear;
  l0.channels_out = 32;
  l0.act = ActKind::kLeakyRelu;
  LayerSpec l1 = l0;
  l1.label = "fc1";
  l1.channels_out = 16;
  n.layers = {c0, c1, l0, l1};
  return n;
}

NetSpec extractor_head_spec() {
  NetSpec n;
  n.name = "surrogate-head";
  n.input = {1, 1, 1, 16};
  LayerSpec h;
  h.label = "logits";
  h.kind = LayerKind::kLinear;
  h.channels_out = 3;
  n.layers = {h};
  return n;
}

Tensor softmax_rows(const Tensor& logits) {
  const int64_t n = logits.dim(0), c = logits.dim(1);
  Tensor probs({n, c});
  for (int64_t i = 0; i < n; ++i) {
    double m = logits[i * c];
    for (int64_t j = 1; j < c; ++j) m = std::max(m, logits[i * c + j]);
    double s = 0;
    for (int64_t j = 0; j < c; ++j) {
      probs[i * c + j] = std::exp(logits[i * c + j] - m);
      s += probs[i * c + j];
    }
    for (int64_t j = 0; j < c; ++j) probs[i * c + j] /= s;
  }
  return probs;
}

}  // namespace

SurrogateExtractor::SurrogateExtractor(Network trunk, Network head)
    : trunk_(std::move(trunk)), head_(std::move(head)) {}

int64_t SurrogateExtractor::feature_dim() const { return 16; }

uint64_t SurrogateExtractor::checksum() const {
  uint64_t h = trunk_.params().checksum();
  const uint64_t h2 = head_.params().checksum();
  return fnv1a(&h2, sizeof(h2), h);
}

SurrogateExtractor SurrogateExtractor::train(const TrainSettings& s) {
  Network trunk = Network::build(extractor_trunk_spec(s.canvas, s.frames, s.channels), Rng(s.seed).stream("trunk").seed());
  Network head = Network::build(extractor_head_spec(), Rng(s.seed).stream("head").seed());
  SurrogateExtractor ex(std::move(trunk), std::move(head));

  SynthSceneConfig scene;
  scene.canvas = s.canvas;
  scene.channels = s.channels;
  scene.motion = MotionKind::kMix;
  PreprocessConfig prep;
  prep.clip_len = s.frames;
  prep.out_size = s.canvas;
  SynthDataSource source(scene, prep, 0, Rng(s.seed).stream("data"));

  // Fresh synthetic batches every step: the scene generator is the data
  // distribution, so there is nothing to overfit.
  Adam adam_trunk(s.lr, 0.9, 0.999);
  Adam adam_head(s.lr, 0.9, 0.999);
  const int64_t C = 3;

  for (int64_t step = 0; step < s.steps; ++step) {
    auto [batch, labels] = source.next_labeled_batch(s.batch);
    Tensor onehot({s.batch, C});
    for (int64_t b = 0; b < s.batch; ++b) {
      onehot[b * C + labels[static_cast<size_t>(b)]] = 1.0;
    }
    Graph g;
    auto trunk_leaves = ex.trunk_.bind(g);
    auto head_leaves = ex.head_.bind(g);
    NodeId feats = ex.trunk_.forward(g, g.constant(batch), trunk_leaves, BnMode::kTrain);
    NodeId logits = ex.head_.forward(g, feats, head_leaves, BnMode::kTrain);
    // Stable cross entropy: a detached row max shifts the log-sum-exp.
    const Tensor& lv = g.value(logits);
    Tensor rowmax({s.batch, C});
    Tensor rowmax_vec({s.batch});
    for (int64_t i = 0; i < s.batch; ++i) {
      double m = lv[i * C];
      for (int64_t j = 1; j < C; ++j) m = std::max(m, lv[i * C + j]);
      rowmax_vec[i] = m;
      for (int64_t j = 0; j < C; ++j) rowmax[i * C + j] = m;
    }
    NodeId z = g.sub(logits, g.constant(rowmax));
    NodeId lse = g.add(g.log(g.sum_axis(g.exp(z), 1)), g.constant(rowmax_vec));
    NodeId picked = g.sum_axis(g.mul(logits, g.constant(onehot)), 1);
    NodeId loss = g.mean_all(g.sub(lse, picked));
    std::vector<NodeId> all_leaves = trunk_leaves;
    all_leaves.insert(all_leaves.end(), head_leaves.begin(), head_leaves.end());
    auto grads = gradient_flat(g, loss, all_leaves);
    const size_t trunk_dim = static_cast<size_t>(ex.trunk_.params().total_dim());
    adam_trunk.step(ex.trunk_.params(), std::span<const double>(grads.data(), trunk_dim));
    adam_head.step(ex.head_.params(), std::span<const double>(grads.data() + trunk_dim, grads.size() - trunk_dim));
  }
  return ex;
}

std::pair<Tensor, Tensor> SurrogateExtractor::extract(const Tensor& batch) {
  Graph g;
  auto trunk_leaves = trunk_.bind(g);
  NodeId feats = trunk_.forward(g, g.constant(batch), trunk_leaves, BnMode::kFrozen);
  Tensor features = g.value(feats);
  auto head_leaves = head_.bind(g);
  NodeId logits = head_.forward(g, feats, head_leaves, BnMode::kFrozen);
  Tensor probs = softmax_rows(g.value(logits));
  return {std::move(features), std::move(probs)};
}

double SurrogateExtractor::accuracy(const Tensor& batch, const std::vector<int>& labels) {
  auto [feats, probs] = extract(batch);
  (void)feats;
  const int64_t n = probs.dim(0), c = probs.dim(1);
  int64_t hits = 0;
  for (int64_t i = 0; i < n; ++i) {
    int64_t best = 0;
    for (int64_t j = 1; j < c; ++j)
      if (probs[i * c + j] > probs[i * c + best]) best = j;
    if (best == labels[static_cast<size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

void SurrogateExtractor::save(const std::string& path) const {
  ParamSet combined;
  const auto& in = trunk_.spec().input;
  combined.add("meta.input", Tensor({4}, {static_cast<double>(in[0]), static_cast<double>(in[1]),
                                          static_cast<double>(in[2]), static_cast<double>(in[3])}));
  for (size_t i = 0; i < trunk_.params().size(); ++i) {
    const auto& e = trunk_.params().entry(i);
    combined.add("trunk." + e.name, e.tensor);
  }
  for (size_t i = 0; i < head_.params().size(); ++i) {
    const auto& e = head_.params().entry(i);
    combined.add("head." + e.name, e.tensor);
  }
  save_paramset(path, combined);
}

SurrogateExtractor SurrogateExtractor::load(const std::string& path) {
  ParamSet combined = load_paramset(path);  // integrity checksum verified here
  const Tensor* meta = combined.find("meta.input");
  if (!meta || meta->numel() != 4) throw std::runtime_error("extractor checkpoint lacks geometry: " + path);
  const int64_t frames = static_cast<int64_t>((*meta)[0]);
  const int64_t canvas = static_cast<int64_t>((*meta)[1]);
  const int64_t channels = static_cast<int64_t>((*meta)[3]);
  Network trunk = Network::build(extractor_trunk_spec(canvas, frames, channels), 0);
  Network head = Network::build(extractor_head_spec(), 0);
  for (size_t i = 0; i < trunk.params().size(); ++i) {
    auto& e = trunk.params().tensor(i);
    const Tensor* src = combined.find("trunk." + trunk.params().entry(i).name);
    if (!src || !src->same_shape(e)) throw std::runtime_error("extractor checkpoint missing entry: " + path);
    e = *src;
  }
  for (size_t i = 0; i < head.params().size(); ++i) {
    auto& e = head.params().tensor(i);
    const Tensor* src = combined.find("head." + head.params().entry(i).name);
    if (!src || !src->same_shape(e)) throw std::runtime_error("extractor checkpoint missing entry: " + path);
    e = *src;
  }
  return SurrogateExtractor(std::move(trunk), std::move(head));
}

}  // namespace ldvd
