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

// Independent reference implementations the engine is tested against.
// Nothing in here may call into the code paths it checks.

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ldvd/graph.hpp"
#include "ldvd/rng.hpp"
#include "ldvd/tensor.hpp"

namespace oracles {

using ldvd::Tensor;

// Seven nested loops, textbook correlation.
inline Tensor naive_conv(const Tensor& x, const Tensor& k, std::array<int64_t, 3> stride,
                         std::array<int64_t, 3> pad) {
  const auto& xs = x.shape();
  const auto& ks = k.shape();
  const int64_t B = xs[0], T = xs[1], H = xs[2], W = xs[3], Ci = xs[4];
  const int64_t Co = ks[0], kt = ks[1], kh = ks[2], kw = ks[3];
  const int64_t To = (T + 2 * pad[0] - kt) / stride[0] + 1;
  const int64_t Ho = (H + 2 * pad[1] - kh) / stride[1] + 1;
  const int64_t Wo = (W + 2 * pad[2] - kw) / stride[2] + 1;
  Tensor out({B, To, Ho, Wo, Co});
  for (int64_t b = 0; b < B; ++b)
    for (int64_t to = 0; to < To; ++to)
      for (int64_t ho = 0; ho < Ho; ++ho)
        for (int64_t wo = 0; wo < Wo; ++wo)
          for (int64_t co = 0; co < Co; ++co) {
            double acc = 0;
            for (int64_t dt = 0; dt < kt; ++dt)
              for (int64_t dh = 0; dh < kh; ++dh)
                for (int64_t dw = 0; dw < kw; ++dw) {
                  const int64_t ti = to * stride[0] - pad[0] + dt;
                  const int64_t hi = ho * stride[1] - pad[1] + dh;
                  const int64_t wi = wo * stride[2] - pad[2] + dw;
                  if (ti < 0 || ti >= T || hi < 0 || hi >= H || wi < 0 || wi >= W) continue;
                  for (int64_t ci = 0; ci < Ci; ++ci)
                    acc += x.at({b, ti, hi, wi, ci}) * k.at({co, dt, dh, dw, ci});
                }
            out.at({b, to, ho, wo, co}) = acc;
          }
  return out;
}

// Central finite differences of a scalar function of a flat vector.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double eps = 1e-5) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + eps;
    const double fp = f(x);
    x[i] = x0 - eps;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2 * eps);
  }
  return g;
}

// (grad(x + eps v) - grad(x - eps v)) / (2 eps), the Hessian-vector oracle.
inline std::vector<double> fd_hvp(const std::function<std::vector<double>(const std::vector<double>&)>& grad,
                                  const std::vector<double>& x, const std::vector<double>& v, double eps = 1e-4) {
  std::vector<double> xp = x, xm = x;
  for (size_t i = 0; i < x.size(); ++i) {
    xp[i] += eps * v[i];
    xm[i] -= eps * v[i];
  }
  const auto gp = grad(xp);
  const auto gm = grad(xm);
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = (gp[i] - gm[i]) / (2 * eps);
  return out;
}

inline double rel_err(const std::vector<double>& got, const std::vector<double>& want) {
  double num = 0, den = 0;
  for (size_t i = 0; i < got.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

// Plain transcription of the GRU equations (update gate carries the state).
inline std::vector<double> gru_step_reference(const std::vector<double>& h, const std::vector<double>& x,
                                              const Tensor& wz, const Tensor& uz, const Tensor& bz,
                                              const Tensor& wr, const Tensor& ur, const Tensor& br,
                                              const Tensor& wh, const Tensor& uh, const Tensor& bh) {
  const int64_t H = static_cast<int64_t>(h.size());
  const int64_t D = static_cast<int64_t>(x.size());
  auto gate = [&](const Tensor& w, const Tensor& u, const Tensor& b, int64_t j) {
    double s = b[j];
    for (int64_t i = 0; i < D; ++i) s += x[static_cast<size_t>(i)] * w[i * H + j];
    for (int64_t i = 0; i < H; ++i) s += h[static_cast<size_t>(i)] * u[i * H + j];
    return s;
  };
  std::vector<double> out(static_cast<size_t>(H));
  for (int64_t j = 0; j < H; ++j) {
    const double z = 1.0 / (1.0 + std::exp(-gate(wz, uz, bz, j)));
    const double r = 1.0 / (1.0 + std::exp(-gate(wr, ur, br, j)));
    double c = bh[j];
    for (int64_t i = 0; i < D; ++i) c += x[static_cast<size_t>(i)] * wh[i * H + j];
    for (int64_t i = 0; i < H; ++i) {
      const double ri = 1.0 / (1.0 + std::exp(-gate(wr, ur, br, i)));
      c += ri * h[static_cast<size_t>(i)] * uh[i * H + j];
    }
    (void)r;
    const double cand = std::tanh(c);
    out[static_cast<size_t>(j)] = z * h[static_cast<size_t>(j)] + (1.0 - z) * cand;
  }
  return out;
}

inline Eigen::MatrixXd to_eigen(const Tensor& t) {
  Eigen::MatrixXd m(t.dim(0), t.dim(1));
  for (int64_t i = 0; i < t.dim(0); ++i)
    for (int64_t j = 0; j < t.dim(1); ++j) m(i, j) = t[i * t.dim(1) + j];
  return m;
}

// Dense Hessian assembled column by column from an hvp operator.
inline Eigen::MatrixXd dense_hessian(const std::function<std::vector<double>(std::span<const double>)>& hvp,
                                     int64_t dim) {
  Eigen::MatrixXd h(dim, dim);
  std::vector<double> e(static_cast<size_t>(dim), 0.0);
  for (int64_t j = 0; j < dim; ++j) {
    e[static_cast<size_t>(j)] = 1.0;
    const auto col = hvp(e);
    e[static_cast<size_t>(j)] = 0.0;
    for (int64_t i = 0; i < dim; ++i) h(i, j) = col[static_cast<size_t>(i)];
  }
  return h;
}

inline Tensor random_tensor(ldvd::Shape shape, ldvd::Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  rng.fill_uniform(t, lo, hi);
  return t;
}

}  // namespace oracles
