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

#include "ldvd/curvature.hpp"

#include <cmath>
#include <stdexcept>

#include "ldvd/lanczos.hpp"

namespace ldvd {

std::vector<double> select_extremal(const std::vector<double>& ritz, int k) {
  const int n = static_cast<int>(ritz.size());
  if (n <= 2 * k) return ritz;
  std::vector<double> out;
  out.reserve(static_cast<size_t>(2 * k));
  for (int i = 0; i < k; ++i) out.push_back(ritz[static_cast<size_t>(i)]);
  for (int i = n - k; i < n; ++i) out.push_back(ritz[static_cast<size_t>(i)]);
  return out;
}

SpectrumRecord discriminator_spectrum(Network& d, const Tensor& real_batch, const Tensor& fake_batch,
                                      const SpectrumOptions& opts) {
  if (d.params().total_dim() == 0) {
    throw std::invalid_argument("discriminator_spectrum: discriminator has no trainable parameters");
  }
  if (real_batch.rank() != 5 || fake_batch.rank() != 5) {
    throw std::invalid_argument("discriminator_spectrum: batches must be rank 5 (B,T,H,W,C)");
  }
  const int64_t br = real_batch.dim(0);

  // One combined forward keeps a single frozen-statistics set for both terms.
  Tensor combined;
  {
    Graph tmp;
    NodeId r = tmp.constant(real_batch);
    NodeId f = tmp.constant(fake_batch);
    combined = tmp.value(tmp.concat(r, f, 0));
  }
  d.freeze_stats_from_batch(combined);

  Graph g;
  NodeId in = g.constant(combined);
  auto leaves = d.bind(g);
  NodeId out = d.forward(g, in, leaves, BnMode::kFrozen);
  const Tensor& vout = g.value(out);
  Shape rs(vout.shape());
  std::vector<int64_t> start(static_cast<size_t>(vout.rank()), 0);
  std::vector<int64_t> len(rs);
  len[0] = br;
  NodeId logits_real = g.slice(out, start, len);
  start[0] = br;
  len[0] = vout.dim(0) - br;
  NodeId logits_fake = g.slice(out, start, len);

  // V(G, D) = E log sigma(D(x)) + E log(1 - sigma(D(G(z)))).
  NodeId v_real = g.scale(g.mean_all(g.softplus(g.scale(logits_real, -1.0))), -1.0);
  NodeId v_fake = g.scale(g.mean_all(g.softplus(logits_fake)), -1.0);
  NodeId value_fn = g.add(v_real, v_fake);
  const double v = g.value(value_fn)[0];
  if (!std::isfinite(v)) {
    throw std::runtime_error("discriminator_spectrum: non-finite value function (" + std::to_string(v) + ")");
  }

  HvpOperator hvp(g, value_fn, leaves);
  const int max_iters = opts.max_iters > 0 ? opts.max_iters : 4 * opts.k + 20;
  auto op = [&hvp](std::span<const double> x) { return hvp.apply(x); };
  LanczosResult lr = lanczos_extremal(op, hvp.dim(), opts.k, max_iters, opts.seed);

  SpectrumRecord rec;
  rec.eigenvalues = select_extremal(lr.ritz_values, opts.k);
  rec.breakdown = lr.breakdown;
  if (!lr.ritz_values.empty()) {
    rec.lambda_plus = lr.ritz_values.front();
    rec.lambda_minus = lr.ritz_values.back();
  }
  return rec;
}

std::vector<GradNormRecord> gradient_norm_probe(const Graph& g, const Graph::Backward& bw,
                                                const std::string& batch_kind) {
  bool any = false;
  for (NodeId a : bw.adjoints) {
    if (a != kNoNode) {
      any = true;
      break;
    }
  }
  if (!any) throw std::invalid_argument("gradient_norm_probe: backward pass has not produced adjoints");
  std::vector<GradNormRecord> out;
  for (size_t i = 0; i < bw.adjoints.size(); ++i) {
    const NodeId a = bw.adjoints[i];
    if (a == kNoNode) continue;
    GradNormRecord r;
    r.node_id = static_cast<int>(i);
    r.op_kind = op_name(g.node(static_cast<NodeId>(i)).op);
    r.adjoint_norm = g.value(a).norm2();
    r.batch_kind = batch_kind;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ldvd
