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

#include "ldvd/netspec.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ldvd {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kConv3d: return "conv3d";
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kConv1dTemporal: return "conv1d-temporal";
    case LayerKind::kFactorizedConv: return "factorized-conv";
    case LayerKind::kTemporalShift: return "temporal-shift";
    case LayerKind::kBatchNorm: return "batch-norm";
    case LayerKind::kLeakyRelu: return "leaky-relu";
    case LayerKind::kLinear: return "linear";
    case LayerKind::kGru: return "gru";
  }
  return "?";
}

const char* norm_kind_name(NormKind k) { return k == NormKind::kBatch ? "batch" : "none"; }
const char* act_kind_name(ActKind k) { return k == ActKind::kLeakyRelu ? "lrelu" : "none"; }
const char* bias_mode_name(BiasMode m) {
  switch (m) {
    case BiasMode::kAuto: return "auto";
    case BiasMode::kOn: return "on";
    case BiasMode::kOff: return "off";
  }
  return "?";
}

namespace {

int64_t out_extent(int64_t in, int64_t pad, int64_t k, int64_t stride) { return (in + 2 * pad - k) / stride + 1; }

void check_conv_arity(const LayerSpec& l, size_t idx) {
  auto bad = [&](const std::string& what) {
    throw std::invalid_argument("layer " + std::to_string(idx) + " (" + layer_kind_name(l.kind) + "): " + what);
  };
  if (l.channels_out < 1) bad("channels must be >= 1");
  switch (l.kind) {
    case LayerKind::kConv2d:
      if (l.kernel[0] != 1 || l.stride[0] != 1 || l.pad[0] != 0) bad("temporal kernel/stride/pad must be 1/1/0");
      break;
    case LayerKind::kConv1dTemporal:
      if (l.kernel[1] != 1 || l.kernel[2] != 1) bad("spatial kernel extents must be 1");
      break;
    default:
      break;
  }
  for (int a = 0; a < 3; ++a) {
    if (l.kernel[static_cast<size_t>(a)] < 1 || l.stride[static_cast<size_t>(a)] < 1 ||
        l.pad[static_cast<size_t>(a)] < 0) {
      bad("kernel/stride must be >= 1 and pad >= 0");
    }
  }
}

}  // namespace

std::vector<Shape> chain_shapes(const NetSpec& spec) {
  if (spec.layers.empty()) throw std::invalid_argument("net '" + spec.name + "': empty layer list");
  Shape cur = {1, spec.input[0], spec.input[1], spec.input[2], spec.input[3]};
  std::vector<Shape> out;
  out.reserve(spec.layers.size());
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    auto bad = [&](const std::string& what) {
      throw std::invalid_argument("net '" + spec.name + "' layer " + std::to_string(i) + " (" +
                                  (l.label.empty() ? layer_kind_name(l.kind) : l.label) + "): " + what);
    };
    switch (l.kind) {
      case LayerKind::kConv3d:
      case LayerKind::kConv2d:
      case LayerKind::kConv1dTemporal: {
        check_conv_arity(l, i);
        const int64_t t = out_extent(cur[1], l.pad[0], l.kernel[0], l.stride[0]);
        const int64_t h = out_extent(cur[2], l.pad[1], l.kernel[1], l.stride[1]);
        const int64_t w = out_extent(cur[3], l.pad[2], l.kernel[2], l.stride[2]);
        if (t < 1 || h < 1 || w < 1) {
          bad("kernel " + std::to_string(l.kernel[0]) + "x" + std::to_string(l.kernel[1]) + "x" +
              std::to_string(l.kernel[2]) + " does not fit input " + shape_str(cur));
        }
        cur = {cur[0], t, h, w, l.channels_out};
        break;
      }
      case LayerKind::kFactorizedConv: {
        check_conv_arity(l, i);
        const int64_t h = out_extent(cur[2], l.pad[1], l.kernel[1], l.stride[1]);
        const int64_t w = out_extent(cur[3], l.pad[2], l.kernel[2], l.stride[2]);
        if (h < 1 || w < 1) bad("spatial stage does not fit input " + shape_str(cur));
        const int64_t t = out_extent(cur[1], l.pad[0], l.kernel[0], l.stride[0]);
        if (t < 1) bad("temporal stage does not fit input " + shape_str(cur));
        cur = {cur[0], t, h, w, l.channels_out};
        break;
      }
      case LayerKind::kTemporalShift:
      case LayerKind::kLeakyRelu:
        break;
      case LayerKind::kBatchNorm:
        break;
      case LayerKind::kLinear:
        if (l.channels_out < 1) bad("channels must be >= 1");
        cur = {cur[0], l.channels_out};
        break;
      case LayerKind::kGru: {
        if (cur.size() != 5 || cur[2] != 1 || cur[3] != 1) bad("gru expects (B,T,1,1,C) input, got " + shape_str(cur));
        cur = {cur[0], cur[1], 1, 1, l.channels_out};
        break;
      }
    }
    out.push_back(cur);
  }
  return out;
}

int64_t count_params(const LayerSpec& l, int64_t channels_in) {
  const int64_t co = l.channels_out;
  const int64_t bn = l.norm == NormKind::kBatch ? 2 * co : 0;
  switch (l.kind) {
    case LayerKind::kConv3d:
    case LayerKind::kConv2d:
    case LayerKind::kConv1dTemporal: {
      const int64_t w = co * channels_in * l.kernel[0] * l.kernel[1] * l.kernel[2];
      return w + (l.conv_bias() ? co : 0) + bn;
    }
    case LayerKind::kFactorizedConv: {
      // Spatial stage always carries a bias (no norm sits between stages);
      // the temporal stage follows the block's bias/norm convention.
      const int64_t ws = co * channels_in * l.kernel[1] * l.kernel[2] + co;
      const int64_t wt = co * co * l.kernel[0] + (l.conv_bias() ? co : 0);
      return ws + wt + bn;
    }
    case LayerKind::kTemporalShift:
    case LayerKind::kLeakyRelu:
      return 0;
    case LayerKind::kBatchNorm:
      return 2 * channels_in;
    case LayerKind::kLinear:
      return 0;  // resolved in count_params(NetSpec) where the flattened width is known
    case LayerKind::kGru:
      return 3 * (channels_in * co + co * co + co);
  }
  return 0;
}

int64_t count_params(const NetSpec& spec) {
  const auto shapes = chain_shapes(spec);
  int64_t total = 0;
  Shape cur = {1, spec.input[0], spec.input[1], spec.input[2], spec.input[3]};
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    if (l.kind == LayerKind::kLinear) {
      int64_t d = 1;
      for (size_t a = 1; a < cur.size(); ++a) d *= cur[a];
      total += d * l.channels_out + (l.conv_bias() ? l.channels_out : 0) +
               (l.norm == NormKind::kBatch ? 2 * l.channels_out : 0);
    } else {
      total += count_params(l, cur.back());
    }
    cur = shapes[i];
  }
  return total;
}

namespace {

std::string ints3(const std::array<int64_t, 3>& v) {
  std::ostringstream os;
  os << v[0] << "," << v[1] << "," << v[2];
  return os.str();
}

std::array<int64_t, 3> parse_ints3(const std::string& s, const std::string& key, int line) {
  std::array<int64_t, 3> out{1, 1, 1};
  std::istringstream is(s);
  std::string tok;
  size_t i = 0;
  while (std::getline(is, tok, ',')) {
    if (i >= 3) throw std::invalid_argument("line " + std::to_string(line) + ": key '" + key + "' takes 3 values");
    out[i++] = std::stoll(tok);
  }
  if (i == 1) out[1] = out[2] = out[0];
  if (i == 2) throw std::invalid_argument("line " + std::to_string(line) + ": key '" + key + "' takes 1 or 3 values");
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string dump_netspec(const NetSpec& spec) {
  std::ostringstream os;
  os << "[net]\n";
  os << "name = " << spec.name << "\n";
  os << "input = " << spec.input[0] << "x" << spec.input[1] << "x" << spec.input[2] << "x" << spec.input[3] << "\n";
  for (const LayerSpec& l : spec.layers) {
    os << "\n[layer]\n";
    if (!l.label.empty()) os << "label = " << l.label << "\n";
    os << "kind = " << layer_kind_name(l.kind) << "\n";
    os << "channels = " << l.channels_out << "\n";
    os << "kernel = " << ints3(l.kernel) << "\n";
    os << "stride = " << ints3(l.stride) << "\n";
    os << "pad = " << ints3(l.pad) << "\n";
    os << "norm = " << norm_kind_name(l.norm) << "\n";
    os << "act = " << act_kind_name(l.act) << "\n";
    os << "bias = " << bias_mode_name(l.bias) << "\n";
    if (l.kind == LayerKind::kTemporalShift) {
      os << "fraction = " << l.fraction << "\n";
      os << "steps = " << l.steps << "\n";
    }
  }
  return os.str();
}

NetSpec parse_netspec(const std::string& text) {
  NetSpec spec;
  spec.layers.clear();
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  enum { kNowhere, kNet, kLayer } sec = kNowhere;
  LayerSpec cur;
  bool have_layer = false;
  auto flush = [&]() {
    if (have_layer) spec.layers.push_back(cur);
    cur = LayerSpec{};
    have_layer = false;
  };
  while (std::getline(is, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s == "[net]") {
        flush();
        sec = kNet;
      } else if (s == "[layer]") {
        flush();
        sec = kLayer;
        have_layer = true;
      } else {
        throw std::invalid_argument("line " + std::to_string(line) + ": unknown section " + s);
      }
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (sec == kNet) {
      if (key == "name") {
        spec.name = val;
      } else if (key == "input") {
        std::array<int64_t, 4> in{};
        size_t i = 0;
        std::istringstream vs(val);
        std::string tok;
        while (std::getline(vs, tok, 'x')) {
          if (i >= 4) throw std::invalid_argument("line " + std::to_string(line) + ": input takes TxHxWxC");
          in[i++] = std::stoll(tok);
        }
        if (i != 4) throw std::invalid_argument("line " + std::to_string(line) + ": input takes TxHxWxC");
        spec.input = in;
      } else {
        throw std::invalid_argument("line " + std::to_string(line) + ": unknown key '" + key + "' in [net]");
      }
    } else if (sec == kLayer) {
      if (key == "label") {
        cur.label = val;
      } else if (key == "kind") {
        bool ok = false;
        for (LayerKind k : {LayerKind::kConv3d, LayerKind::kConv2d, LayerKind::kConv1dTemporal,
                            LayerKind::kFactorizedConv, LayerKind::kTemporalShift, LayerKind::kBatchNorm,
                            LayerKind::kLeakyRelu, LayerKind::kLinear, LayerKind::kGru}) {
          if (val == layer_kind_name(k)) {
            cur.kind = k;
            ok = true;
          }
        }
        if (!ok) throw std::invalid_argument("line " + std::to_string(line) + ": unknown layer kind '" + val + "'");
      } else if (key == "channels") {
        cur.channels_out = std::stoll(val);
      } else if (key == "kernel") {
        cur.kernel = parse_ints3(val, key, line);
      } else if (key == "stride") {
        cur.stride = parse_ints3(val, key, line);
      } else if (key == "pad") {
        cur.pad = parse_ints3(val, key, line);
      } else if (key == "norm") {
        if (val == "none") cur.norm = NormKind::kNone;
        else if (val == "batch") cur.norm = NormKind::kBatch;
        else throw std::invalid_argument("line " + std::to_string(line) + ": unknown norm '" + val + "'");
      } else if (key == "act") {
        if (val == "none") cur.act = ActKind::kNone;
        else if (val == "lrelu") cur.act = ActKind::kLeakyRelu;
        else throw std::invalid_argument("line " + std::to_string(line) + ": unknown act '" + val + "'");
      } else if (key == "bias") {
        if (val == "auto") cur.bias = BiasMode::kAuto;
        else if (val == "on") cur.bias = BiasMode::kOn;
        else if (val == "off") cur.bias = BiasMode::kOff;
        else throw std::invalid_argument("line " + std::to_string(line) + ": unknown bias mode '" + val + "'");
      } else if (key == "fraction") {
        cur.fraction = std::stod(val);
      } else if (key == "steps") {
        cur.steps = std::stoll(val);
      } else {
        throw std::invalid_argument("line " + std::to_string(line) + ": unknown key '" + key + "' in [layer]");
      }
    } else {
      throw std::invalid_argument("line " + std::to_string(line) + ": key outside any section");
    }
  }
  flush();
  if (spec.layers.empty()) throw std::invalid_argument("netspec has no [layer] sections");
  return spec;
}

NetSpec load_netspec_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open netspec file: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_netspec(text);
}

}  // namespace ldvd
