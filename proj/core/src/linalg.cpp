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

#include "ldvd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldvd {

Tensor matmul_dense(const Tensor& a, const Tensor& b) {
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) throw std::invalid_argument("matmul_dense: inner dims differ");
  Tensor c({m, n});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t l = 0; l < k; ++l) {
      const double av = a[i * k + l];
      for (int64_t j = 0; j < n; ++j) c[i * n + j] += av * b[l * n + j];
    }
  return c;
}

Tensor transpose_dense(const Tensor& a) {
  const int64_t m = a.dim(0), n = a.dim(1);
  Tensor t({n, m});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) t[j * m + i] = a[i * n + j];
  return t;
}

EighResult jacobi_eigh(const Tensor& a_in) {
  if (a_in.rank() != 2 || a_in.dim(0) != a_in.dim(1)) {
    throw std::invalid_argument("jacobi_eigh: square matrix required, got " + shape_str(a_in.shape()));
  }
  const int64_t n = a_in.dim(0);
  Tensor a({n, n});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < n; ++j) a[i * n + j] = 0.5 * (a_in[i * n + j] + a_in[j * n + i]);
  Tensor v({n, n});
  for (int64_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto off_norm = [&]() {
    double s = 0;
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
    return std::sqrt(2 * s);
  };

  const double scale = std::max(1.0, a.abs_max());
  const double tol = 1e-14 * scale * static_cast<double>(n);
  for (int sweep = 0; sweep < 100 && off_norm() > tol; ++sweep) {
    for (int64_t p = 0; p < n - 1; ++p) {
      for (int64_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::fabs(apq) <= 1e-300) continue;
        const double app = a[p * n + p], aqq = a[q * n + q];
        const double theta = (aqq - app) / (2 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int64_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int64_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (int64_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int64_t> order(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int64_t x, int64_t y) { return a[x * n + x] < a[y * n + y]; });

  EighResult r;
  r.eigenvalues.resize(static_cast<size_t>(n));
  r.eigenvectors = Tensor({n, n});
  for (int64_t j = 0; j < n; ++j) {
    const int64_t src = order[static_cast<size_t>(j)];
    r.eigenvalues[static_cast<size_t>(j)] = a[src * n + src];
    for (int64_t i = 0; i < n; ++i) r.eigenvectors[i * n + j] = v[i * n + src];
  }
  return r;
}

std::vector<double> tridiag_eigenvalues(std::vector<double> d, std::vector<double> e) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return {};
  if (static_cast<int>(e.size()) != n - 1 && !(n == 1 && e.empty())) {
    throw std::invalid_argument("tridiag_eigenvalues: offdiag must have n-1 entries");
  }
  e.push_back(0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw std::runtime_error("tridiag_eigenvalues: no convergence");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

double power_iteration_sigma(const Tensor& w, int iters, Rng& rng) {
  const int64_t m = w.dim(0), n = w.dim(1);
  std::vector<double> u(static_cast<size_t>(m)), v(static_cast<size_t>(n));
  for (auto& x : u) x = rng.normal();
  auto normalize = [](std::vector<double>& x) {
    double s = 0;
    for (double z : x) s += z * z;
    s = std::sqrt(s);
    if (s < 1e-300) s = 1.0;
    for (double& z : x) z /= s;
  };
  normalize(u);
  for (int it = 0; it < iters; ++it) {
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
  return std::fabs(sigma);
}

}  // namespace ldvd
