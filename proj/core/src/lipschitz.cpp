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

#include "ldvd/lipschitz.hpp"

#include <cmath>
#include <stdexcept>

#include "ldvd/linalg.hpp"

namespace ldvd {

Tensor reshape_to_matrix(const Tensor& kernel) {
  if (kernel.rank() == 2) return kernel;
  if (kernel.rank() < 2) throw std::invalid_argument("reshape_to_matrix: rank >= 2 required");
  const int64_t out_ch = kernel.dim(0);
  const int64_t rest = kernel.numel() / out_ch;
  return Tensor({out_ch, rest}, kernel.vec());
}

Tensor matrix_to_kernel(const Tensor& matrix, const Shape& kernel_shape) {
  if (matrix.numel() != shape_numel(kernel_shape)) {
    throw std::invalid_argument("matrix_to_kernel: element count mismatch");
  }
  return Tensor(kernel_shape, matrix.vec());
}

namespace {

void check_finite(const Tensor& w) {
  for (int64_t i = 0; i < w.numel(); ++i) {
    if (!std::isfinite(w[i])) {
      throw std::invalid_argument("svd_clip: non-finite entry at index " + std::to_string(i));
    }
  }
}

// Eigendecomposition of the smaller Gram matrix. For m <= n the clip is
// U f(S) U^T W, otherwise W V f(S) V^T; the per-value factor
// min(sigma, cap)/sigma is 1 for every sigma <= cap, so small singular
// values never enter a division.
Tensor clip_via_gram(const Tensor& w, double cap) {
  const int64_t m = w.dim(0), n = w.dim(1);
  const bool left = m <= n;
  const Tensor wt = transpose_dense(w);
  const Tensor gram = left ? matmul_dense(w, wt) : matmul_dense(wt, w);
  EighResult eig = jacobi_eigh(gram);
  const int64_t r = left ? m : n;
  std::vector<double> factor(static_cast<size_t>(r));
  for (int64_t i = 0; i < r; ++i) {
    const double lam = std::max(0.0, eig.eigenvalues[static_cast<size_t>(i)]);
    const double sigma = std::sqrt(lam);
    factor[static_cast<size_t>(i)] = sigma > cap ? cap / sigma : 1.0;
  }
  // Q diag(factor) Q^T
  Tensor proj({r, r});
  for (int64_t i = 0; i < r; ++i)
    for (int64_t j = 0; j < r; ++j) {
      double s = 0;
      for (int64_t k = 0; k < r; ++k)
        s += eig.eigenvectors[i * r + k] * factor[static_cast<size_t>(k)] * eig.eigenvectors[j * r + k];
      proj[i * r + j] = s;
    }
  return left ? matmul_dense(proj, w) : matmul_dense(w, proj);
}

}  // namespace

std::vector<double> singular_values(const Tensor& w) {
  if (w.rank() != 2) throw std::invalid_argument("singular_values: matrix required");
  const int64_t m = w.dim(0), n = w.dim(1);
  const Tensor wt = transpose_dense(w);
  const Tensor gram = m <= n ? matmul_dense(w, wt) : matmul_dense(wt, w);
  EighResult eig = jacobi_eigh(gram);
  std::vector<double> sv;
  sv.reserve(eig.eigenvalues.size());
  for (auto it = eig.eigenvalues.rbegin(); it != eig.eigenvalues.rend(); ++it) {
    sv.push_back(std::sqrt(std::max(0.0, *it)));
  }
  return sv;
}

Tensor svd_clip(const Tensor& w, double cap) {
  if (w.rank() != 2) throw std::invalid_argument("svd_clip: matrix required, got " + shape_str(w.shape()));
  if (!(cap > 0)) throw std::invalid_argument("svd_clip: cap must be positive");
  check_finite(w);
  if (std::isinf(cap)) return w;
  const auto sv = singular_values(w);
  // Slack keeps clip(clip(W)) bit-identical to clip(W).
  if (sv.empty() || sv.front() <= cap * (1.0 + 1e-12)) return w;
  return clip_via_gram(w, cap);
}

void apply_svc(Network& d, double cap, int64_t every_n, int64_t iteration, bool clip_bn) {
  if (every_n < 1) throw std::invalid_argument("apply_svc: every_n must be >= 1");
  if (iteration % every_n != 0) return;
  ParamSet& ps = d.params();
  const auto& layers = d.layer_params();
  auto clip_entry = [&](int idx) {
    if (idx < 0) return;
    Tensor& t = ps.tensor(static_cast<size_t>(idx));
    Tensor clipped = svd_clip(reshape_to_matrix(t), cap);
    t = matrix_to_kernel(clipped, t.shape());
  };
  for (const auto& lp : layers) {
    clip_entry(lp.w);
    clip_entry(lp.hw_w);
    clip_entry(lp.t_w);
    if (clip_bn && lp.gamma >= 0) {
      Tensor& gamma = ps.tensor(static_cast<size_t>(lp.gamma));
      for (int64_t c = 0; c < gamma.numel(); ++c) {
        const double mag = std::fabs(gamma[c]);
        if (mag > cap) gamma[c] = gamma[c] > 0 ? cap : -cap;
      }
    }
  }
}

std::pair<double, bool> spectral_sigma_estimate(const Tensor& w, SpectralState& state, int power_iters) {
  if (w.rank() != 2) throw std::invalid_argument("spectral_sigma_estimate: matrix required");
  if (power_iters < 1) throw std::invalid_argument("spectral_sigma_estimate: power_iters must be >= 1");
  const int64_t m = w.dim(0), n = w.dim(1);
  if (state.u.numel() != m) {
    Rng rng(0x5eedull ^ (static_cast<uint64_t>(m) << 20) ^ static_cast<uint64_t>(n));
    state.u = Tensor({m});
    rng.fill_normal(state.u);
  }
  std::vector<double> u(state.u.vec());
  std::vector<double> v(static_cast<size_t>(n));
  auto normalize = [](std::vector<double>& x) {
    double s = 0;
    for (double z : x) s += z * z;
    s = std::sqrt(s);
    if (s < 1e-300) {
      // Direction lost (zero matrix); keep a unit vector so |u| = 1 holds.
      x.assign(x.size(), 0.0);
      x[0] = 1.0;
      return;
    }
    for (double& z : x) z /= s;
  };
  normalize(u);
  for (int it = 0; it < power_iters; ++it) {
    for (int64_t j = 0; j < n; ++j) {
      double s = 0;
      for (int64_t i = 0; i < m; ++i) s += w[i * n + j] * u[static_cast<size_t>(i)];
      v[static_cast<size_t>(j)] = s;
    }
    normalize(v);
    for (int64_t i = 0; i < m; ++i) {
      double s = 0;
      for (int64_t j = 0; j < n; ++j) s += w[i * n + j] * v[static_cast<size_t>(j)];
      u[static_cast<size_t>(i)] = s;
    }
    normalize(u);
  }
  double sigma = 0;
  for (int64_t i = 0; i < m; ++i) {
    double s = 0;
    for (int64_t j = 0; j < n; ++j) s += w[i * n + j] * v[static_cast<size_t>(j)];
    sigma += u[static_cast<size_t>(i)] * s;
  }
  sigma = std::fabs(sigma);
  state.u = Tensor({m}, u);
  state.iterations += power_iters;
  bool flagged = false;
  if (sigma < 1e-12) {
    sigma = 1e-12;
    flagged = true;
  }
  return {sigma, flagged};
}

std::pair<Tensor, double> spectral_normalize(const Tensor& w, SpectralState& state, int power_iters) {
  auto [sigma, flagged] = spectral_sigma_estimate(w, state, power_iters);
  (void)flagged;
  Tensor out(w.shape());
  for (int64_t i = 0; i < w.numel(); ++i) out[i] = w[i] / sigma;
  return {std::move(out), sigma};
}

}  // namespace ldvd
