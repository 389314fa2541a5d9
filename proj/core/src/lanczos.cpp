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

#include "ldvd/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ldvd/linalg.hpp"
#include "ldvd/rng.hpp"

namespace ldvd {

LanczosResult lanczos_extremal(const LinearOperator& op, int64_t dim, int k, int max_iters, uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("lanczos: operator dimension must be >= 1");
  max_iters = static_cast<int>(std::min<int64_t>(max_iters, dim));
  if (k < 1 || k > max_iters) {
    throw std::invalid_argument("lanczos: need 1 <= k <= max_iters <= dim, got k=" + std::to_string(k) +
                                " max_iters=" + std::to_string(max_iters));
  }

  const size_t n = static_cast<size_t>(dim);
  std::vector<std::vector<double>> q;  // kept for full reorthogonalization
  q.reserve(static_cast<size_t>(max_iters));

  std::vector<double> v(n);
  Rng rng(seed);
  for (auto& x : v) x = rng.normal();
  double nv = 0;
  for (double x : v) nv += x * x;
  nv = std::sqrt(nv);
  for (auto& x : v) x /= nv;

  std::vector<double> alpha, beta;
  double scale = 1.0;
  LanczosResult res;

  for (int j = 0; j < max_iters; ++j) {
    q.push_back(v);
    std::vector<double> w = op(std::span<const double>(v));
    if (w.size() != n) throw std::runtime_error("lanczos: operator returned wrong dimension");
    if (j > 0) {
      const double b = beta.back();
      const auto& qm = q[static_cast<size_t>(j - 1)];
      for (size_t i = 0; i < n; ++i) w[i] -= b * qm[i];
    }
    double a = 0;
    for (size_t i = 0; i < n; ++i) a += w[i] * v[i];
    alpha.push_back(a);
    for (size_t i = 0; i < n; ++i) w[i] -= a * v[i];
    // Full reorthogonalization, two passes of classical Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& qi : q) {
        double dot = 0;
        for (size_t i = 0; i < n; ++i) dot += w[i] * qi[i];
        for (size_t i = 0; i < n; ++i) w[i] -= dot * qi[i];
      }
    }
    double b = 0;
    for (double x : w) b += x * x;
    b = std::sqrt(b);
    scale = std::max({scale, std::fabs(a), b});
    res.iterations = j + 1;
    if (j + 1 == max_iters) break;
    if (b <= 1e-12 * scale) {
      res.breakdown = true;  // Krylov space is invariant; Ritz values are exact on it
      break;
    }
    beta.push_back(b);
    for (size_t i = 0; i < n; ++i) v[i] = w[i] / b;
  }

  res.ritz_values = tridiag_eigenvalues(alpha, beta);
  std::reverse(res.ritz_values.begin(), res.ritz_values.end());
  (void)k;
  return res;
}

}  // namespace ldvd
