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

#include <string>
#include <vector>

#include "ldvd/graph.hpp"
#include "ldvd/network.hpp"

namespace ldvd {

/// Leading eigenvalues of the value-function Hessian at one training
/// iteration. lambda_plus / lambda_minus are the running extremes over the
/// run up to and including this record.
struct SpectrumRecord {
  int64_t iteration = 0;
  std::vector<double> eigenvalues;  // descending: top-k then bottom-k of the Ritz list
  double lambda_plus = 0;
  double lambda_minus = 0;
  bool breakdown = false;
};

struct GradNormRecord {
  int node_id = 0;
  std::string op_kind;
  double adjoint_norm = 0;
  std::string batch_kind;  // "real" | "fake"
};

struct SpectrumOptions {
  int k = 10;
  int max_iters = 0;  // 0 -> 4k + 20
  uint64_t seed = 0;  // Lanczos start vector
};

/// Hessian spectrum of V(G, D) with respect to the discriminator
/// parameters, at a frozen (theta, batch). The fake batch stands in for
/// G(z) with theta frozen; batch-norm runs on frozen statistics captured
/// from the combined batch so the loss is twice-differentiable in psi.
/// Returns the k most-positive and k most-negative Ritz values merged into
/// one descending list.
SpectrumRecord discriminator_spectrum(Network& d, const Tensor& real_batch, const Tensor& fake_batch,
                                      const SpectrumOptions& opts);

/// Euclidean norm of every node adjoint after a completed backward pass,
/// in topological order. Rejects a Backward with no adjoints.
std::vector<GradNormRecord> gradient_norm_probe(const Graph& g, const Graph::Backward& bw,
                                                const std::string& batch_kind);

/// Merges the two ends of a descending Ritz list into the record layout:
/// top k then bottom k (deduplicated when the list is short).
std::vector<double> select_extremal(const std::vector<double>& ritz_descending, int k);

}  // namespace ldvd
