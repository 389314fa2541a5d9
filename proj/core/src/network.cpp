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

#include "ldvd/network.hpp"

#include <cmath>
#include <stdexcept>

#include "ldvd/lipschitz.hpp"

namespace ldvd {

namespace {

Tensor init_weight(Shape shape, int64_t fan_in, Rng& rng) {
  // Fan-in scaled uniform with leaky-relu gain.
  const double gain = std::sqrt(2.0 / (1.0 + kLreluSlope * kLreluSlope));
  const double limit = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  rng.fill_uniform(t, -limit, limit);
  return t;
}

std::string lname(size_t i, const LayerSpec& l, const char* suffix) {
  std::string base = l.label.empty() ? "l" + std::to_string(i) : l.label;
  return base + "." + suffix;
}

}  // namespace

Network Network::build(const NetSpec& spec, uint64_t seed) {
  chain_shapes(spec);  // validates, throws naming the first bad layer
  Network net;
  net.spec_ = spec;
  Rng rng = Rng(seed).stream("init");

  Shape cur = {1, spec.input[0], spec.input[1], spec.input[2], spec.input[3]};
  const auto shapes = chain_shapes(spec);
  net.layer_params_.resize(spec.layers.size());
  net.bn_.resize(spec.layers.size());
  net.sn_.resize(spec.layers.size());
  net.sn_t_.resize(spec.layers.size());

  auto add_param = [&](const std::string& name, Tensor t) {
    net.params_.add(name, std::move(t));
    return static_cast<int>(net.params_.size()) - 1;
  };

  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    LayerParams& lp = net.layer_params_[i];
    const int64_t ci = cur.back();
    const int64_t co = l.channels_out;
    switch (l.kind) {
      case LayerKind::kConv3d:
      case LayerKind::kConv2d:
      case LayerKind::kConv1dTemporal: {
        const int64_t fan_in = ci * l.kernel[0] * l.kernel[1] * l.kernel[2];
        lp.w = add_param(lname(i, l, "w"),
                         init_weight({co, l.kernel[0], l.kernel[1], l.kernel[2], ci}, fan_in, rng));
        if (l.conv_bias()) lp.b = add_param(lname(i, l, "b"), Tensor({co}));
        break;
      }
      case LayerKind::kFactorizedConv: {
        const int64_t fan_sp = ci * l.kernel[1] * l.kernel[2];
        lp.hw_w = add_param(lname(i, l, "hw.w"), init_weight({co, 1, l.kernel[1], l.kernel[2], ci}, fan_sp, rng));
        lp.hw_b = add_param(lname(i, l, "hw.b"), Tensor({co}));
        const int64_t fan_t = co * l.kernel[0];
        lp.t_w = add_param(lname(i, l, "t.w"), init_weight({co, l.kernel[0], 1, 1, co}, fan_t, rng));
        if (l.conv_bias()) lp.t_b = add_param(lname(i, l, "t.b"), Tensor({co}));
        break;
      }
      case LayerKind::kLinear: {
        int64_t d = 1;
        for (size_t a = 1; a < cur.size(); ++a) d *= cur[a];
        lp.w = add_param(lname(i, l, "w"), init_weight({d, co}, d, rng));
        if (l.conv_bias()) lp.b = add_param(lname(i, l, "b"), Tensor({co}));
        break;
      }
      case LayerKind::kGru: {
        lp.wz = add_param(lname(i, l, "wz"), init_weight({ci, co}, ci, rng));
        lp.uz = add_param(lname(i, l, "uz"), init_weight({co, co}, co, rng));
        lp.bz = add_param(lname(i, l, "bz"), Tensor({co}));
        lp.wr = add_param(lname(i, l, "wr"), init_weight({ci, co}, ci, rng));
        lp.ur = add_param(lname(i, l, "ur"), init_weight({co, co}, co, rng));
        lp.br = add_param(lname(i, l, "br"), Tensor({co}));
        lp.wh = add_param(lname(i, l, "wh"), init_weight({ci, co}, ci, rng));
        lp.uh = add_param(lname(i, l, "uh"), init_weight({co, co}, co, rng));
        lp.bh = add_param(lname(i, l, "bh"), Tensor({co}));
        break;
      }
      case LayerKind::kTemporalShift:
      case LayerKind::kLeakyRelu:
        break;
      case LayerKind::kBatchNorm:
        break;
    }
    const int64_t norm_c = l.kind == LayerKind::kBatchNorm ? ci : co;
    if (l.norm == NormKind::kBatch || l.kind == LayerKind::kBatchNorm) {
      lp.gamma = add_param(lname(i, l, "gamma"), Tensor::full({norm_c}, 1.0));
      lp.beta = add_param(lname(i, l, "beta"), Tensor({norm_c}));
      net.bn_[i].running_mean = Tensor({norm_c});
      net.bn_[i].running_var = Tensor::full({norm_c}, 1.0);
      net.bn_[i].frozen_mean = Tensor({norm_c});
      net.bn_[i].frozen_var = Tensor::full({norm_c}, 1.0);
    }
    cur = shapes[i];
  }
  if (count_params(spec) != net.params_.total_dim()) {
    throw std::logic_error("network build disagrees with count_params for '" + spec.name + "'");
  }
  return net;
}

std::vector<NodeId> Network::bind(Graph& g) const {
  std::vector<NodeId> leaves;
  leaves.reserve(params_.size());
  for (size_t i = 0; i < params_.size(); ++i) leaves.push_back(g.leaf(params_.tensor(i)));
  return leaves;
}

NodeId Network::weight_node(Graph& g, NodeId leaf, const Tensor& raw, SpectralState& state, ForwardInfo* info) {
  if (lipschitz.kind != LipschitzKind::kSn) return leaf;
  const int iters = state.iterations == 0 ? lipschitz.first_power_iters : lipschitz.power_iters;
  auto [sigma, flagged] = spectral_sigma_estimate(reshape_to_matrix(raw), state, iters);
  if (flagged && info) ++info->sn_floor_hits;
  // sigma is treated as a constant scale; the raw weight stays trainable.
  return g.scale(leaf, 1.0 / sigma);
}

namespace {

struct BnNodes {
  NodeId out, mean, var;
};

BnNodes emit_batchnorm_train(Graph& g, NodeId x, NodeId gamma, NodeId beta) {
  const Tensor& vx = g.value(x);
  const double inv_n = static_cast<double>(vx.dim(vx.rank() - 1)) / static_cast<double>(vx.numel());
  NodeId mean = g.scale(g.sum_to_channel(x), inv_n);
  NodeId xc = g.add_channel(x, g.scale(mean, -1.0));
  NodeId var = g.scale(g.sum_to_channel(g.mul(xc, xc)), inv_n);
  NodeId inv = g.rsqrt(g.add_scalar(var, kBnEpsilon));
  NodeId xh = g.scale_channel(xc, inv);
  NodeId out = g.add_channel(g.scale_channel(xh, gamma), beta);
  return {out, mean, var};
}

NodeId emit_batchnorm_frozen(Graph& g, NodeId x, NodeId gamma, NodeId beta, const Network::BnState& st) {
  Tensor neg_mean(st.frozen_mean.shape());
  Tensor inv(st.frozen_var.shape());
  for (int64_t c = 0; c < neg_mean.numel(); ++c) {
    neg_mean[c] = -st.frozen_mean[c];
    inv[c] = 1.0 / std::sqrt(st.frozen_var[c] + kBnEpsilon);
  }
  NodeId xc = g.add_channel(x, g.constant(neg_mean));
  NodeId xh = g.scale_channel(xc, g.constant(inv));
  return g.add_channel(g.scale_channel(xh, gamma), beta);
}

}  // namespace

NodeId Network::forward(Graph& g, NodeId input, const std::vector<NodeId>& leaves, BnMode mode, ForwardInfo* info) {
  if (leaves.size() != params_.size()) {
    throw std::invalid_argument("forward: leaf count " + std::to_string(leaves.size()) + " != parameter count " +
                                std::to_string(params_.size()));
  }
  NodeId x = input;
  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& l = spec_.layers[i];
    const LayerParams& lp = layer_params_[i];
    switch (l.kind) {
      case LayerKind::kConv3d:
      case LayerKind::kConv2d:
      case LayerKind::kConv1dTemporal: {
        NodeId w = weight_node(g, leaves[static_cast<size_t>(lp.w)], params_.tensor(static_cast<size_t>(lp.w)),
                               sn_[i], info);
        x = g.conv(x, w, l.stride, l.pad);
        if (lp.b >= 0) x = g.add_channel(x, leaves[static_cast<size_t>(lp.b)]);
        break;
      }
      case LayerKind::kFactorizedConv: {
        NodeId ws = weight_node(g, leaves[static_cast<size_t>(lp.hw_w)],
                                params_.tensor(static_cast<size_t>(lp.hw_w)), sn_[i], info);
        x = g.conv(x, ws, {1, l.stride[1], l.stride[2]}, {0, l.pad[1], l.pad[2]});
        x = g.add_channel(x, leaves[static_cast<size_t>(lp.hw_b)]);
        x = g.leaky_relu(x, kLreluSlope);  // mid-stage activation
        NodeId wt = weight_node(g, leaves[static_cast<size_t>(lp.t_w)],
                                params_.tensor(static_cast<size_t>(lp.t_w)), sn_t_[i], info);
        x = g.conv(x, wt, {l.stride[0], 1, 1}, {l.pad[0], 0, 0});
        if (lp.t_b >= 0) x = g.add_channel(x, leaves[static_cast<size_t>(lp.t_b)]);
        break;
      }
      case LayerKind::kTemporalShift:
        x = g.temporal_shift(x, l.fraction, l.steps);
        break;
      case LayerKind::kLeakyRelu:
        x = g.leaky_relu(x, kLreluSlope);
        break;
      case LayerKind::kBatchNorm:
        break;  // handled by the shared norm path below
      case LayerKind::kLinear: {
        const Tensor& vx = g.value(x);
        int64_t d = 1;
        for (int a = 1; a < vx.rank(); ++a) d *= vx.dim(a);
        x = g.reshape(x, {vx.dim(0), d});
        NodeId w = weight_node(g, leaves[static_cast<size_t>(lp.w)], params_.tensor(static_cast<size_t>(lp.w)),
                               sn_[i], info);
        x = g.matmul(x, w);
        if (lp.b >= 0) x = g.add_channel(x, leaves[static_cast<size_t>(lp.b)]);
        break;
      }
      case LayerKind::kGru: {
        const Tensor& vx = g.value(x);
        const int64_t B = vx.dim(0), T = vx.dim(1), C = vx.dim(4);
        const int64_t H = l.channels_out;
        NodeId h = g.constant(Tensor({B, H}));
        NodeId seq = kNoNode;
        for (int64_t t = 0; t < T; ++t) {
          NodeId xt = g.reshape(g.slice(x, {0, t, 0, 0, 0}, {B, 1, 1, 1, C}), {B, C});
          NodeId zt = g.sigmoid(g.add_channel(
              g.add(g.matmul(xt, leaves[static_cast<size_t>(lp.wz)]), g.matmul(h, leaves[static_cast<size_t>(lp.uz)])),
              leaves[static_cast<size_t>(lp.bz)]));
          NodeId rt = g.sigmoid(g.add_channel(
              g.add(g.matmul(xt, leaves[static_cast<size_t>(lp.wr)]), g.matmul(h, leaves[static_cast<size_t>(lp.ur)])),
              leaves[static_cast<size_t>(lp.br)]));
          NodeId cand = g.tanh(g.add_channel(g.add(g.matmul(xt, leaves[static_cast<size_t>(lp.wh)]),
                                                   g.matmul(g.mul(rt, h), leaves[static_cast<size_t>(lp.uh)])),
                                             leaves[static_cast<size_t>(lp.bh)]));
          // Update gate multiplies the carried state: z -> 1 keeps h.
          NodeId keep = g.mul(zt, h);
          NodeId blend = g.mul(g.add_scalar(g.scale(zt, -1.0), 1.0), cand);
          h = g.add(keep, blend);
          NodeId ht = g.reshape(h, {B, 1, 1, 1, H});
          seq = (seq == kNoNode) ? ht : g.concat(seq, ht, 1);
        }
        x = seq;
        break;
      }
    }
    if (l.norm == NormKind::kBatch || l.kind == LayerKind::kBatchNorm) {
      NodeId gamma = leaves[static_cast<size_t>(lp.gamma)];
      NodeId beta = leaves[static_cast<size_t>(lp.beta)];
      if (mode == BnMode::kTrain) {
        BnNodes bn = emit_batchnorm_train(g, x, gamma, beta);
        x = bn.out;
        if (info) info->bn_batch_stats.emplace_back(static_cast<int>(i), bn.mean, bn.var);
      } else {
        x = emit_batchnorm_frozen(g, x, gamma, beta, bn_[i]);
      }
    }
    if (l.act == ActKind::kLeakyRelu && l.kind != LayerKind::kLeakyRelu) {
      x = g.leaky_relu(x, kLreluSlope);
    }
  }
  return x;
}

void Network::update_running_stats(const Graph& g, const ForwardInfo& info) {
  for (const auto& [layer, mean_node, var_node] : info.bn_batch_stats) {
    BnState& st = bn_[static_cast<size_t>(layer)];
    const Tensor& m = g.value(mean_node);
    const Tensor& v = g.value(var_node);
    for (int64_t c = 0; c < m.numel(); ++c) {
      st.running_mean[c] = kBnMomentum * st.running_mean[c] + (1.0 - kBnMomentum) * m[c];
      st.running_var[c] = kBnMomentum * st.running_var[c] + (1.0 - kBnMomentum) * v[c];
    }
  }
}

void Network::freeze_stats_from_batch(const Tensor& batch) {
  Graph g;
  NodeId in = g.constant(batch);
  auto leaves = bind(g);
  ForwardInfo info;
  forward(g, in, leaves, BnMode::kTrain, &info);
  for (const auto& [layer, mean_node, var_node] : info.bn_batch_stats) {
    bn_[static_cast<size_t>(layer)].frozen_mean = g.value(mean_node);
    bn_[static_cast<size_t>(layer)].frozen_var = g.value(var_node);
  }
}

}  // namespace ldvd
