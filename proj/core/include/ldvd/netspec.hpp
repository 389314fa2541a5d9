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
#include <string>
#include <vector>

#include "ldvd/tensor.hpp"

namespace ldvd {

enum class LayerKind : uint8_t {
  kConv3d,
  kConv2d,
  kConv1dTemporal,
  kFactorizedConv,
  kTemporalShift,
  kBatchNorm,
  kLeakyRelu,
  kLinear,
  kGru,
};

enum class NormKind : uint8_t { kNone, kBatch };
enum class ActKind : uint8_t { kNone, kLeakyRelu };
enum class BiasMode : uint8_t { kAuto, kOn, kOff };  // auto: dropped when the block carries batch-norm

const char* layer_kind_name(LayerKind k);
const char* norm_kind_name(NormKind k);
const char* act_kind_name(ActKind k);
const char* bias_mode_name(BiasMode m);

/// One block row, mirroring the architecture tables: a conv (or shift,
/// norm, linear, gru) plus its attached norm and activation.
///
/// For kFactorizedConv, kernel/stride/pad describe the dense 3D block the
/// pair replaces: the spatial stage takes (1,kh,kw)/(1,sh,sw)/(0,ph,pw) and
/// the temporal stage (kt,1,1)/(st,1,1)/(pt,0,0); the mid-stage activation
/// is always leaky-relu and norm applies after the temporal stage.
struct LayerSpec {
  std::string label;  // table row name, e.g. "c0"
  LayerKind kind = LayerKind::kConv3d;
  int64_t channels_out = 1;
  std::array<int64_t, 3> kernel{1, 1, 1};  // (t, h, w)
  std::array<int64_t, 3> stride{1, 1, 1};
  std::array<int64_t, 3> pad{0, 0, 0};
  NormKind norm = NormKind::kNone;
  ActKind act = ActKind::kNone;
  BiasMode bias = BiasMode::kAuto;
  double fraction = 0.25;  // temporal-shift channel fraction per direction
  int64_t steps = 1;       // temporal-shift distance

  bool conv_bias() const { return bias == BiasMode::kOn || (bias == BiasMode::kAuto && norm != NormKind::kBatch); }
};

struct NetSpec {
  std::string name;
  std::array<int64_t, 4> input{16, 64, 64, 3};  // (T, H, W, C)
  std::vector<LayerSpec> layers;
};

/// Per-layer output shapes (batch dim = 1). Throws naming the first layer
/// whose shapes fail to chain; an empty layer list is rejected.
std::vector<Shape> chain_shapes(const NetSpec& spec);

/// Exact learnable scalar count, reproducible from the description alone.
int64_t count_params(const NetSpec& spec);
int64_t count_params(const LayerSpec& layer, int64_t channels_in);

/// Sectioned text format: one [net] section then one [layer] section per
/// layer (keys kind/channels/kernel/stride/pad/norm/act/bias/...).
std::string dump_netspec(const NetSpec& spec);
NetSpec parse_netspec(const std::string& text);
NetSpec load_netspec_file(const std::string& path);

}  // namespace ldvd
