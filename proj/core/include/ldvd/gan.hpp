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

#include <functional>
#include <string>
#include <vector>

#include "ldvd/curvature.hpp"
#include "ldvd/graph.hpp"
#include "ldvd/network.hpp"
#include "ldvd/video.hpp"

namespace ldvd {

/// Generator objective selection: the saturating form minimizes
/// log(1 - sigma(D(G(z)))), the non-saturating form maximizes
/// log sigma(D(G(z))) instead. The discriminator objective is shared.
enum class LossKind : uint8_t { kSaturating, kNonSaturating };

const char* loss_kind_name(LossKind k);

struct GanLosses {
  NodeId loss_d;
  NodeId loss_g;
};

/// Numerically-stabilized value-function losses. Logits of any shape are
/// treated as per-patch outputs and averaged elementwise.
GanLosses gan_value(Graph& g, NodeId d_real_logits, NodeId d_fake_logits, LossKind kind);
NodeId discriminator_loss(Graph& g, NodeId d_real_logits, NodeId d_fake_logits);
NodeId generator_loss(Graph& g, NodeId d_fake_logits, LossKind kind);

class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps = 1e-8);
  void step(ParamSet& params, std::span<const double> grads);

 private:
  double lr_, b1_, b2_, eps_;
  int64_t t_ = 0;
  std::vector<double> m_, v_;
};

struct ToyGeneratorConfig {
  int64_t d_content = 8;
  int64_t d_motion = 6;
  int64_t frames = 16;   // divisible by 4
  int64_t height = 16;   // power of two >= 8
  int64_t width = 16;    // == height
  int64_t channels = 1;
  int64_t gru_hidden = 8;
};

struct LatentBatch {
  Tensor z_content;  // (B, d_content)
  Tensor z_motion;   // (B, T, d_motion); empty for the content-conditioned generator
};

/// Desk-scale two-stage generators. The TGAN-style variant derives its
/// motion latents from z_content through a 1D temporal stack; the
/// MoCoGAN-style variant runs per-step motion latents through a GRU. Both
/// share the frame head: [z_content; motion_t] -> 2D upscaler -> tanh.
class ToyGenerator {
 public:
  enum class Kind : uint8_t { kTgan, kMocogan };

  static ToyGenerator build(Kind kind, const ToyGeneratorConfig& cfg, uint64_t seed);

  Kind kind() const { return kind_; }
  const ToyGeneratorConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  std::vector<NodeId> bind(Graph& g) const;
  LatentBatch sample_latents(Rng& rng, int64_t batch) const;
  /// (B, T, H, W, C) in (-1, 1).
  NodeId forward(Graph& g, const LatentBatch& z, const std::vector<NodeId>& leaves) const;
  Tensor generate(const LatentBatch& z) const;

 private:
  Kind kind_ = Kind::kTgan;
  ToyGeneratorConfig cfg_;
  ParamSet params_;
};

struct SpectrumSampling {
  bool enabled = false;
  int64_t every = 20;
  int k = 10;
  int max_iters = 0;       // 0 -> 4k + 20
  bool fixed_batch = false;  // default: current minibatch
};

struct TrainConfig {
  int64_t iterations = 200;
  int64_t batch_size = 8;
  double lr_d = 2e-4;
  double lr_g = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 1;
  LossKind loss = LossKind::kNonSaturating;
  LipschitzConfig lipschitz;
  SpectrumSampling spectrum;
  int64_t gradnorm_every = 0;  // 0 = off
  int64_t d_steps = 1;  // discriminator updates per iteration
  int64_t g_steps = 1;  // generator updates per iteration
};

struct LossPoint {
  int64_t iteration;
  double loss_d;
  double loss_g;
};

struct RunArtifacts {
  std::vector<LossPoint> losses;
  std::vector<SpectrumRecord> spectra;
  std::vector<std::pair<int64_t, std::vector<GradNormRecord>>> gradnorms;
  bool halted = false;
  int64_t halted_at = -1;
  std::string halt_reason;
};

using BatchFn = std::function<Tensor(int64_t)>;

/// Alternating single-step adversarial training. Spectrum records land at
/// iterations k*every (k >= 1, strictly before the end) plus one final
/// record at termination, each computed on parameter snapshots so probing
/// never perturbs the trajectory.
RunArtifacts train(const TrainConfig& cfg, ToyGenerator& gen, Network& dis, const BatchFn& next_batch);

}  // namespace ldvd
