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

#include <utility>

#include "ldvd/network.hpp"
#include "ldvd/tensor.hpp"

namespace ldvd {

/// Kernel -> (out_channels, everything_else). Rank-2 weights are returned
/// as-is; rank-5 conv kernels flatten their trailing axes. Bijective with
/// matrix_to_kernel.
Tensor reshape_to_matrix(const Tensor& kernel);
Tensor matrix_to_kernel(const Tensor& matrix, const Shape& kernel_shape);

/// Projects W to the Frobenius-nearest matrix with spectral norm <= cap:
/// U min(S, cap) V^T. Returns W unchanged (bit-exact) when already within
/// the cap, which also makes repeated application idempotent.
Tensor svd_clip(const Tensor& w, double cap = 1.0);

/// Singular values of W, descending (via the Gram matrix of the smaller
/// side). Exposed for audits.
std::vector<double> singular_values(const Tensor& w);

/// Clips every conv/linear weight matrix in-place when
/// iteration % every_n == 0. Batch-norm scales are treated as diagonal
/// operators and clipped elementwise unless clip_bn is off.
void apply_svc(Network& d, double cap, int64_t every_n, int64_t iteration, bool clip_bn = true);

/// Power-iteration estimate of sigma_max with warm-started state. A zero
/// matrix floors the estimate at 1e-12 and reports it via the flag.
std::pair<double, bool> spectral_sigma_estimate(const Tensor& w_matrix, SpectralState& state, int power_iters);

/// W / sigma_hat with the state persisting across steps.
std::pair<Tensor, double> spectral_normalize(const Tensor& w_matrix, SpectralState& state, int power_iters);

}  // namespace ldvd
