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

#include <tuple>
#include <vector>

#include "ldvd/graph.hpp"
#include "ldvd/netspec.hpp"
#include "ldvd/paramset.hpp"
#include "ldvd/rng.hpp"

namespace ldvd {

enum class LipschitzKind : uint8_t { kNone, kSvc, kSn };

struct LipschitzConfig {
  LipschitzKind kind = LipschitzKind::kNone;
  double cap = 1.0;
  int64_t every_n = 5;  // clip cadence; the source experiments leave n unstated
  bool clip_bn = true;
  int first_power_iters = 50;
  int power_iters = 1;
};

/// Warm-started power-iteration state for spectral normalization.
struct SpectralState {
  Tensor u;  // left singular vector estimate, |u| = 1
  int64_t iterations = 0;
};

enum class BnMode : uint8_t { kTrain, kFrozen };

constexpr double kBnEpsilon = 1e-5;
constexpr double kBnMomentum = 0.9;
constexpr double kLreluSlope = 0.2;

/// Built network: spec + allocated parameters + per-layer batch-norm and
/// spectral-norm state. Immutable after build except parameters and state;
/// a single training thread mutates them, snapshots (copies) may be
/// analyzed concurrently.
class Network {
 public:
  struct LayerParams {
    int w = -1, b = -1, gamma = -1, beta = -1;
    int hw_w = -1, hw_b = -1, t_w = -1, t_b = -1;
    int wz = -1, uz = -1, bz = -1, wr = -1, ur = -1, br = -1, wh = -1, uh = -1, bh = -1;
  };
  struct BnState {
    Tensor running_mean, running_var;
    Tensor frozen_mean, frozen_var;
  };
  struct ForwardInfo {
    std::vector<std::tuple<int, NodeId, NodeId>> bn_batch_stats;  // (layer, mean node, var node)
    int sn_floor_hits = 0;
  };

  static Network build(const NetSpec& spec, uint64_t seed);

  const NetSpec& spec() const { return spec_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  int64_t param_count() const { return params_.total_dim(); }
  const std::vector<LayerParams>& layer_params() const { return layer_params_; }
  std::vector<BnState>& bn_states() { return bn_; }
  std::vector<SpectralState>& sn_states() { return sn_; }

  /// Binds every parameter entry as a leaf, in entry order.
  std::vector<NodeId> bind(Graph& g) const;

  NodeId forward(Graph& g, NodeId input, const std::vector<NodeId>& leaves, BnMode mode,
                 ForwardInfo* info = nullptr);

  void update_running_stats(const Graph& g, const ForwardInfo& info);
  /// Captures the batch statistics the network would use on this batch and
  /// stores them as the frozen statistics for BnMode::kFrozen forwards.
  void freeze_stats_from_batch(const Tensor& batch);

  LipschitzConfig lipschitz;

 private:
  NetSpec spec_;
  ParamSet params_;
  std::vector<LayerParams> layer_params_;
  std::vector<BnState> bn_;        // indexed by layer
  std::vector<SpectralState> sn_;  // indexed by layer (spatial stage); sn_t_ holds factorized temporal stages
  std::vector<SpectralState> sn_t_;

  NodeId weight_node(Graph& g, NodeId leaf, const Tensor& raw, SpectralState& state, ForwardInfo* info);
};

}  // namespace ldvd
