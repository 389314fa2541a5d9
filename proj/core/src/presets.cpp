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

#include "ldvd/presets.hpp"

#include <sstream>
#include <stdexcept>

namespace ldvd {

namespace {

LayerSpec conv(LayerKind kind, const std::string& label, int64_t ch, std::array<int64_t, 3> k,
               std::array<int64_t, 3> s, std::array<int64_t, 3> p, NormKind norm, ActKind act) {
  LayerSpec l;
  l.label = label;
  l.kind = kind;
  l.channels_out = ch;
  l.kernel = k;
  l.stride = s;
  l.pad = p;
  l.norm = norm;
  l.act = act;
  return l;
}

LayerSpec shift(const std::string& label) {
  LayerSpec l;
  l.label = label;
  l.kind = LayerKind::kTemporalShift;
  l.fraction = 0.25;
  l.steps = 1;
  return l;
}

// MoCoGAN image discriminator: 2D blocks applied per frame. ksize and the
// channel multiplier cover the ablation rows; pad keeps the head shape.
NetSpec mocogan_image(int64_t mult, int64_t ksize) {
  NetSpec n;
  n.name = "mocogan-image-d";
  n.input = {16, 64, 64, 3};
  const int64_t p = (ksize - 2) / 2;
  n.layers = {
      conv(LayerKind::kConv2d, "c0", 64 * mult, {1, ksize, ksize}, {1, 2, 2}, {0, p, p}, NormKind::kNone,
           ActKind::kLeakyRelu),
      conv(LayerKind::kConv2d, "c1", 128 * mult, {1, ksize, ksize}, {1, 2, 2}, {0, p, p}, NormKind::kBatch,
           ActKind::kLeakyRelu),
      conv(LayerKind::kConv2d, "c2", 256 * mult, {1, ksize, ksize}, {1, 2, 2}, {0, p, p}, NormKind::kBatch,
           ActKind::kLeakyRelu),
      conv(LayerKind::kConv2d, "c3", 1, {1, ksize, ksize}, {1, 2, 2}, {0, p, p}, NormKind::kNone, ActKind::kNone),
  };
  return n;
}

NetSpec mocogan_video(int64_t mult, int64_t ksize) {
  NetSpec n;
  n.name = "mocogan-video-d";
  n.input = {16, 64, 64, 3};
  const int64_t p = ksize == 4 ? 1 : 0;
  n.layers = {
      conv(LayerKind::kConv3d, "c0", 64 * mult, {ksize, ksize, ksize}, {1, 2, 2}, {0, p, p}, NormKind::kNone,
           ActKind::kLeakyRelu),
      conv(LayerKind::kConv3d, "c1", 128 * mult, {ksize, ksize, ksize}, {1, 2, 2}, {0, p, p}, NormKind::kBatch,
           ActKind::kLeakyRelu),
      conv(LayerKind::kConv3d, "c2", 256 * mult, {ksize, ksize, ksize}, {1, 2, 2}, {0, p, p}, NormKind::kBatch,
           ActKind::kLeakyRelu),
      conv(LayerKind::kConv3d, "c3", 1, {ksize, ksize, ksize}, {1, 2, 2}, {0, p, p}, NormKind::kNone, ActKind::kNone),
  };
  return n;
}

NetSpec tgan_d() {
  NetSpec n;
  n.name = "tgan-d";
  n.input = {16, 64, 64, 3};
  n.layers = {
      conv(LayerKind::kConv3d, "c0", 64, {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, NormKind::kNone, ActKind::kLeakyRelu),
      conv(LayerKind::kConv3d, "c1", 128, {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, NormKind::kBatch, ActKind::kLeakyRelu),
      conv(LayerKind::kConv3d, "c2", 256, {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, NormKind::kBatch, ActKind::kLeakyRelu),
      conv(LayerKind::kConv3d, "c3", 512, {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, NormKind::kBatch, ActKind::kLeakyRelu),
      conv(LayerKind::kConv2d, "c4", 1, {1, 4, 4}, {1, 1, 1}, {0, 0, 0}, NormKind::kNone, ActKind::kNone),
  };
  return n;
}

// Factorized variants: layers c0..c<upto> replace their 3D block with a
// spatial+temporal pair; every other former-3D layer is restricted to 2D
// kernels. For TGAN the temporal stage keeps the original temporal stride.
NetSpec tgan_f(int upto) {
  NetSpec n;
  n.name = "tgan-f-c0";
  for (int i = 1; i <= upto; ++i) n.name += "c" + std::to_string(i);
  n.input = {16, 64, 64, 3};
  const int64_t chans[4] = {64, 128, 256, 512};
  for (int i = 0; i < 4; ++i) {
    const std::string label = "c" + std::to_string(i);
    const NormKind norm = i == 0 ? NormKind::kNone : NormKind::kBatch;
    if (i <= upto) {
      n.layers.push_back(conv(LayerKind::kFactorizedConv, label, chans[i], {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, norm,
                              ActKind::kLeakyRelu));
    } else {
      n.layers.push_back(
          conv(LayerKind::kConv2d, label, chans[i], {1, 4, 4}, {1, 2, 2}, {0, 1, 1}, norm, ActKind::kLeakyRelu));
    }
  }
  n.layers.push_back(
      conv(LayerKind::kConv2d, "c4", 1, {1, 4, 4}, {1, 1, 1}, {0, 0, 0}, NormKind::kNone, ActKind::kNone));
  return n;
}

// The published counts pin the factorized MoCoGAN head to a single output
// channel in both stages (1.0M total for c0-c2 and c0-c3).
NetSpec mocogan_f(int upto) {
  NetSpec n;
  n.name = "mocogan-f-c0";
  for (int i = 1; i <= upto; ++i) n.name += "c" + std::to_string(i);
  n.input = {16, 64, 64, 3};
  const int64_t chans[4] = {64, 128, 256, 1};
  for (int i = 0; i < 4; ++i) {
    const std::string label = "c" + std::to_string(i);
    const NormKind norm = (i == 1 || i == 2) ? NormKind::kBatch : NormKind::kNone;
    const ActKind act = i == 3 ? ActKind::kNone : ActKind::kLeakyRelu;
    if (i <= upto) {
      n.layers.push_back(
          conv(LayerKind::kFactorizedConv, label, chans[i], {4, 4, 4}, {1, 2, 2}, {1, 1, 1}, norm, act));
    } else {
      n.layers.push_back(conv(LayerKind::kConv2d, label, chans[i], {1, 4, 4}, {1, 2, 2}, {0, 1, 1}, norm, act));
    }
  }
  return n;
}

NetSpec tgan_tsm(int upto) {
  NetSpec n;
  n.name = "tgan-tsm-c0";
  for (int i = 1; i <= upto; ++i) n.name += "c" + std::to_string(i);
  n.input = {16, 64, 64, 3};
  const int64_t chans[4] = {64, 128, 256, 512};
  for (int i = 0; i < 4; ++i) {
    const std::string label = "c" + std::to_string(i);
    const NormKind norm = i == 0 ? NormKind::kNone : NormKind::kBatch;
    n.layers.push_back(
        conv(LayerKind::kConv2d, label, chans[i], {1, 4, 4}, {1, 2, 2}, {0, 1, 1}, norm, ActKind::kLeakyRelu));
    if (i <= upto) n.layers.push_back(shift("tsm" + std::to_string(i)));
  }
  n.layers.push_back(
      conv(LayerKind::kConv2d, "c4", 1, {1, 4, 4}, {1, 1, 1}, {0, 0, 0}, NormKind::kNone, ActKind::kNone));
  return n;
}

NetSpec mocogan_tsm(int upto) {
  NetSpec n = mocogan_image(1, 4);
  n.name = "mocogan-tsm-c0";
  for (int i = 1; i <= upto; ++i) n.name += "c" + std::to_string(i);
  std::vector<LayerSpec> layers;
  for (int i = 0; i < 4; ++i) {
    layers.push_back(n.layers[static_cast<size_t>(i)]);
    if (i <= upto && i < 3) layers.push_back(shift("tsm" + std::to_string(i)));
  }
  n.layers = std::move(layers);
  return n;
}

// Desk-scale TGAN-shaped pair used by the curvature experiments; the two
// variants share every block-boundary output shape. No batch-norm: its
// batch-statistic rescaling would undo the 1-Lipschitz weight constraint
// the SVC comparison measures.
NetSpec tgan_toy() {
  NetSpec n;
  n.name = "tgan-toy-d";
  n.input = {16, 16, 16, 1};
  n.layers = {
      conv(LayerKind::kConv3d, "c0", 8, {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, NormKind::kNone, ActKind::kLeakyRelu),
      conv(LayerKind::kConv3d, "c1", 16, {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, NormKind::kNone, ActKind::kLeakyRelu),
      conv(LayerKind::kConv2d, "c2", 1, {1, 4, 4}, {1, 1, 1}, {0, 0, 0}, NormKind::kNone, ActKind::kNone),
  };
  return n;
}

NetSpec tgan_toy_f() {
  NetSpec n;
  n.name = "tgan-toy-d-f";
  n.input = {16, 16, 16, 1};
  n.layers = {
      conv(LayerKind::kFactorizedConv, "c0", 8, {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, NormKind::kNone,
           ActKind::kLeakyRelu),
      conv(LayerKind::kFactorizedConv, "c1", 16, {4, 4, 4}, {2, 2, 2}, {1, 1, 1}, NormKind::kNone,
           ActKind::kLeakyRelu),
      conv(LayerKind::kConv2d, "c2", 1, {1, 4, 4}, {1, 1, 1}, {0, 0, 0}, NormKind::kNone, ActKind::kNone),
  };
  return n;
}

NetSpec tgan_toy_tsm() {
  NetSpec n;
  n.name = "tgan-toy-d-tsm";
  n.input = {16, 16, 16, 1};
  n.layers = {
      conv(LayerKind::kConv2d, "c0", 8, {1, 4, 4}, {1, 2, 2}, {0, 1, 1}, NormKind::kNone, ActKind::kLeakyRelu),
      shift("tsm0"),
      conv(LayerKind::kConv2d, "c1", 16, {1, 4, 4}, {1, 2, 2}, {0, 1, 1}, NormKind::kNone, ActKind::kLeakyRelu),
      shift("tsm1"),
      conv(LayerKind::kConv2d, "c2", 1, {1, 4, 4}, {1, 1, 1}, {0, 0, 0}, NormKind::kNone, ActKind::kNone),
  };
  return n;
}

NetSpec renamed(NetSpec n, const std::string& name) {
  n.name = name;
  return n;
}

struct Entry {
  std::string name;
  std::string summary;
  std::vector<NetSpec> (*make)();
};

std::vector<NetSpec> one(NetSpec n) { return {std::move(n)}; }

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"mocogan-image-d", "MoCoGAN 2D image discriminator", [] { return one(mocogan_image(1, 4)); }},
      {"mocogan-video-d", "MoCoGAN 3D video discriminator", [] { return one(mocogan_video(1, 4)); }},
      {"mocogan-dual-d", "MoCoGAN dual discriminator (image + video)",
       [] { return std::vector<NetSpec>{mocogan_image(1, 4), mocogan_video(1, 4)}; }},
      {"mocogan-image-d-2x", "image discriminator, channels doubled",
       [] { return one(renamed(mocogan_image(2, 4), "mocogan-image-d-2x")); }},
      {"mocogan-video-d-2x", "video discriminator, channels doubled",
       [] { return one(renamed(mocogan_video(2, 4), "mocogan-video-d-2x")); }},
      {"mocogan-dual-d-2x", "dual discriminator, channels doubled",
       [] {
         return std::vector<NetSpec>{renamed(mocogan_image(2, 4), "mocogan-image-d-2x"),
                                     renamed(mocogan_video(2, 4), "mocogan-video-d-2x")};
       }},
      {"mocogan-video-d-ksize2", "video discriminator, kernel size 2",
       [] { return one(renamed(mocogan_video(1, 2), "mocogan-video-d-ksize2")); }},
      {"mocogan-image-d-ksize8", "image discriminator, kernel size 8",
       [] { return one(renamed(mocogan_image(1, 8), "mocogan-image-d-ksize8")); }},
      {"tgan-d", "TGAN 3D discriminator", [] { return one(tgan_d()); }},
      {"tgan-f-c0", "TGAN, c0 factorized", [] { return one(tgan_f(0)); }},
      {"tgan-f-c0c1", "TGAN, c0-c1 factorized (TGAN-F)", [] { return one(tgan_f(1)); }},
      {"tgan-f-c0c2", "TGAN, c0-c2 factorized", [] { return one(tgan_f(2)); }},
      {"tgan-f-c0c3", "TGAN, c0-c3 factorized", [] { return one(tgan_f(3)); }},
      {"tgan-f", "alias of tgan-f-c0c1", [] { return one(renamed(tgan_f(1), "tgan-f")); }},
      {"mocogan-f-c0", "MoCoGAN video D, c0 factorized", [] { return one(mocogan_f(0)); }},
      {"mocogan-f-c0c1", "MoCoGAN video D, c0-c1 factorized (MoCoGAN-F)", [] { return one(mocogan_f(1)); }},
      {"mocogan-f-c0c2", "MoCoGAN video D, c0-c2 factorized", [] { return one(mocogan_f(2)); }},
      {"mocogan-f-c0c3", "MoCoGAN video D, c0-c3 factorized", [] { return one(mocogan_f(3)); }},
      {"mocogan-f", "alias of mocogan-f-c0c1", [] { return one(renamed(mocogan_f(1), "mocogan-f")); }},
      {"tgan-tsm-c0", "2D TGAN with shifts after c0", [] { return one(tgan_tsm(0)); }},
      {"tgan-tsm-c0c1", "2D TGAN with shifts after c0-c1", [] { return one(tgan_tsm(1)); }},
      {"tgan-tsm-c0c2", "2D TGAN with shifts after c0-c2 (TGAN-TSM)", [] { return one(tgan_tsm(2)); }},
      {"tgan-tsm", "alias of tgan-tsm-c0c2", [] { return one(renamed(tgan_tsm(2), "tgan-tsm")); }},
      {"mocogan-tsm-c0", "image D with shifts after c0", [] { return one(mocogan_tsm(0)); }},
      {"mocogan-tsm-c0c1", "image D with shifts after c0-c1 (MoCoGAN-TSM)", [] { return one(mocogan_tsm(1)); }},
      {"mocogan-tsm-c0c2", "image D with shifts after c0-c2", [] { return one(mocogan_tsm(2)); }},
      {"mocogan-tsm", "alias of mocogan-tsm-c0c1", [] { return one(renamed(mocogan_tsm(1), "mocogan-tsm")); }},
      {"tgan-toy-d", "desk-scale 3D discriminator (16x16x16x1)", [] { return one(tgan_toy()); }},
      {"tgan-toy-d-f", "desk-scale factorized counterpart", [] { return one(tgan_toy_f()); }},
      {"tgan-toy-d-tsm", "desk-scale temporal-shift counterpart", [] { return one(tgan_toy_tsm()); }},
  };
  return entries;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : registry()) v.push_back(e.name);
    return v;
  }();
  return names;
}

bool is_preset(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return true;
  return false;
}

Preset get_preset(const std::string& name) {
  for (const auto& e : registry()) {
    if (e.name == name) return {e.name, e.summary, e.make()};
  }
  std::ostringstream os;
  os << "unknown preset '" << name << "'; available:";
  for (const auto& e : registry()) os << " " << e.name;
  throw std::invalid_argument(os.str());
}

int64_t preset_param_count(const Preset& p) {
  int64_t total = 0;
  for (const auto& part : p.parts) total += count_params(part);
  return total;
}

const std::vector<CountConformanceRow>& published_count_table() {
  static const std::vector<CountConformanceRow> rows = {
      {"mocogan-image-d", 0.7},        {"mocogan-video-d", 2.7},
      {"mocogan-dual-d", 3.3},         {"mocogan-dual-d-2x", 13.2},
      {"mocogan-video-d-2x", 10.5},    {"mocogan-video-d-ksize2", 0.3},
      {"mocogan-image-d-ksize8", 2.7}, {"tgan-d", 11.0},
      {"tgan-f-c0", 2.8},              {"tgan-f-c0c1", 2.8},
      {"tgan-f-c0c2", 3.1},            {"tgan-f-c0c3", 4.2},
      {"mocogan-f-c0", 0.7},           {"mocogan-f-c0c1", 0.7},
      {"mocogan-f-c0c2", 1.0},         {"mocogan-f-c0c3", 1.0},
      {"tgan-tsm-c0c2", 2.8},          {"mocogan-tsm-c0c1", 0.7},
  };
  return rows;
}

const std::vector<ReductionConformanceRow>& published_reduction_table() {
  static const std::vector<ReductionConformanceRow> rows = {
      {"TGAN-F", "tgan-d", "tgan-f-c0c1", 74.19},
      {"TGAN-TSM", "tgan-d", "tgan-tsm-c0c2", 74.93},
      {"MoCoGAN-F", "mocogan-dual-d", "mocogan-f-c0c2", 69.61},
      {"MoCoGAN-TSM", "mocogan-dual-d", "mocogan-tsm-c0c1", 79.99},
  };
  return rows;
}

}  // namespace ldvd
