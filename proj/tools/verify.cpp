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

#include "verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "ldvd/gan.hpp"
#include "ldvd/graph.hpp"
#include "ldvd/lanczos.hpp"
#include "ldvd/linalg.hpp"
#include "ldvd/lipschitz.hpp"
#include "ldvd/metrics.hpp"
#include "ldvd/presets.hpp"

namespace {

using namespace ldvd;

// Independent 7-loop correlation reference, deliberately sharing nothing
// with the engine's kernels.
Tensor naive_conv(const Tensor& x, const Tensor& k, std::array<int64_t, 3> stride, std::array<int64_t, 3> pad) {
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
                  for (int64_t ci = 0; ci < Ci; ++ci) {
                    acc += x.at({b, ti, hi, wi, ci}) * k.at({co, dt, dh, dw, ci});
                  }
                }
            out.at({b, to, ho, wo, co}) = acc;
          }
  return out;
}

struct Check {
  const char* name;
  std::function<bool(std::string&)> fn;
};

bool check_finite_difference(std::string& detail) {
  // A conv + lrelu + linear head so the conv kernel-gradient rule is on the
  // path a fault injection perturbs.
  Rng rng(41);
  Tensor x({2, 4, 5, 5, 2});
  rng.fill_normal(x);
  Tensor k({3, 2, 3, 3, 2});
  rng.fill_uniform(k, -0.4, 0.4);
  Tensor w({3, 1});
  rng.fill_uniform(w, -0.5, 0.5);

  auto loss_of = [&](const Tensor& kt, const Tensor& wt, Graph& g, std::vector<NodeId>& leaves) {
    NodeId kk = g.leaf(kt);
    NodeId ww = g.leaf(wt);
    leaves = {kk, ww};
    NodeId y = g.conv(g.constant(x), kk, {1, 1, 1}, {0, 1, 1});
    y = g.leaky_relu(y, 0.2);
    NodeId pooled = g.reshape(g.sum_to_channel(y), {1, 3});
    return g.mean_all(g.mul(g.matmul(pooled, ww), g.matmul(pooled, ww)));
  };

  Graph g;
  std::vector<NodeId> leaves;
  NodeId loss = loss_of(k, w, g, leaves);
  auto grad = gradient_flat(g, loss, leaves);

  const double eps = 1e-5;
  auto flat_eval = [&](const std::vector<double>& delta) {
    Tensor kt = k, wt = w;
    size_t p = 0;
    for (int64_t i = 0; i < kt.numel(); ++i, ++p) kt[i] += delta[p];
    for (int64_t i = 0; i < wt.numel(); ++i, ++p) wt[i] += delta[p];
    Graph gg;
    std::vector<NodeId> ll;
    return gg.value(loss_of(kt, wt, gg, ll))[0];
  };
  const size_t dim = grad.size();
  double num = 0, den = 0;
  for (size_t i = 0; i < dim; ++i) {
    std::vector<double> d(dim, 0.0);
    d[i] = eps;
    const double fp = flat_eval(d);
    d[i] = -eps;
    const double fm = flat_eval(d);
    const double fd = (fp - fm) / (2 * eps);
    num += (grad[i] - fd) * (grad[i] - fd);
    den += fd * fd;
  }
  const double rel = std::sqrt(num / std::max(den, 1e-300));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "rel err %.3e", rel);
  detail = buf;
  return rel < 1e-6;
}

bool check_dense_conv(std::string& detail) {
  Rng rng(42);
  double worst = 0;
  for (int trial = 0; trial < 6; ++trial) {
    Tensor x({2, 4, 5, 5, 2});
    rng.fill_normal(x);
    Tensor k({3, 2, 2, 3, 2});
    rng.fill_normal(k);
    const std::array<int64_t, 3> st{1 + trial % 2, 1, 2};
    const std::array<int64_t, 3> pd{1, 0, 1};
    Graph g;
    Tensor got = g.value(g.conv(g.constant(x), g.constant(k), st, pd));
    Tensor want = naive_conv(x, k, st, pd);
    for (int64_t i = 0; i < got.numel(); ++i) worst = std::max(worst, std::fabs(got[i] - want[i]));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max abs diff %.3e", worst);
  detail = buf;
  return worst < 1e-10;
}

bool check_factorization(std::string& detail) {
  Rng rng(43);
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Tensor a({1, 1, 3, 3, 1});
    rng.fill_normal(a);
    Tensor b({1, 2, 1, 1, 1});
    rng.fill_normal(b);
    Tensor kron({1, 2, 3, 3, 1});
    for (int64_t t = 0; t < 2; ++t)
      for (int64_t i = 0; i < 9; ++i) kron[t * 9 + i] = a[i] * b[t];
    Tensor x({1, 5, 6, 6, 1});
    rng.fill_normal(x);
    Graph g;
    Tensor dense = g.value(g.conv(g.constant(x), g.constant(kron), {1, 1, 1}, {0, 0, 0}));
    NodeId sp = g.conv(g.constant(x), g.constant(a), {1, 1, 1}, {0, 0, 0});
    Tensor seq = g.value(g.conv(sp, g.constant(b), {1, 1, 1}, {0, 0, 0}));
    for (int64_t i = 0; i < dense.numel(); ++i) worst = std::max(worst, std::fabs(dense[i] - seq[i]));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max abs diff %.3e", worst);
  detail = buf;
  return worst < 1e-9;
}

bool check_hvp(std::string& detail) {
  Rng rng(44);
  Tensor w1({4, 5}), b1({5}), w2({5, 1}), xin({3, 4});
  rng.fill_normal(w1);
  rng.fill_normal(b1);
  rng.fill_normal(w2);
  rng.fill_normal(xin);
  auto build = [&](const Tensor& a, const Tensor& b, const Tensor& c, Graph& g, std::vector<NodeId>& leaves) {
    NodeId l1 = g.leaf(a), l2 = g.leaf(b), l3 = g.leaf(c);
    leaves = {l1, l2, l3};
    NodeId h = g.tanh(g.add_channel(g.matmul(g.constant(xin), l1), l2));
    NodeId o = g.matmul(h, l3);
    return g.mean_all(g.mul(o, o));
  };
  Graph g;
  std::vector<NodeId> leaves;
  NodeId loss = build(w1, b1, w2, g, leaves);
  HvpOperator h(g, loss, leaves);
  std::vector<double> v(static_cast<size_t>(h.dim()));
  Rng vr(45);
  for (auto& z : v) z = vr.normal();
  auto hv = h.apply(v);
  const double eps = 1e-4;
  auto grad_at = [&](double sgn) {
    Tensor a = w1, b = b1, c = w2;
    size_t p = 0;
    for (auto* t : {&a, &b, &c})
      for (int64_t i = 0; i < t->numel(); ++i, ++p) (*t)[i] += sgn * eps * v[p];
    Graph gg;
    std::vector<NodeId> ll;
    NodeId l = build(a, b, c, gg, ll);
    return gradient_flat(gg, l, ll);
  };
  auto gp = grad_at(1.0), gm = grad_at(-1.0);
  double num = 0, den = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    const double fd = (gp[i] - gm[i]) / (2 * eps);
    num += (hv[i] - fd) * (hv[i] - fd);
    den += fd * fd;
  }
  const double rel = std::sqrt(num / std::max(den, 1e-300));
  std::vector<double> u(v.size());
  for (auto& z : u) z = vr.normal();
  auto hu = h.apply(u);
  double uhv = 0, vhu = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    uhv += u[i] * hv[i];
    vhu += v[i] * hu[i];
  }
  const double sym = std::fabs(uhv - vhu) / std::max(1.0, std::fabs(uhv));
  char buf[96];
  std::snprintf(buf, sizeof(buf), "fd rel %.3e, symmetry %.3e", rel, sym);
  detail = buf;
  return rel < 1e-4 && sym < 1e-8;
}

bool check_eigensolve(std::string& detail) {
  const int64_t n = 60;
  Rng rng(46);
  Tensor a({n, n});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = i; j < n; ++j) {
      const double v = rng.normal();
      a[i * n + j] = v;
      a[j * n + i] = v;
    }
  auto op = [&](std::span<const double> x) {
    std::vector<double> y(static_cast<size_t>(n), 0.0);
    for (int64_t i = 0; i < n; ++i) {
      double s = 0;
      for (int64_t j = 0; j < n; ++j) s += a[i * n + j] * x[static_cast<size_t>(j)];
      y[static_cast<size_t>(i)] = s;
    }
    return y;
  };
  LanczosResult lr = lanczos_extremal(op, n, 10, static_cast<int>(n), 47);
  EighResult dense = jacobi_eigh(a);
  double worst = 0;
  for (int i = 0; i < 10; ++i) {
    const double top_l = lr.ritz_values[static_cast<size_t>(i)];
    const double top_d = dense.eigenvalues[static_cast<size_t>(n - 1 - i)];
    const double bot_l = lr.ritz_values[lr.ritz_values.size() - 1 - static_cast<size_t>(i)];
    const double bot_d = dense.eigenvalues[static_cast<size_t>(i)];
    worst = std::max(worst, std::fabs(top_l - top_d) / std::max(1e-12, std::fabs(top_d)));
    worst = std::max(worst, std::fabs(bot_l - bot_d) / std::max(1e-12, std::fabs(bot_d)));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "worst rel %.3e", worst);
  detail = buf;
  return worst < 1e-8;
}

bool check_svd_clip(std::string& detail) {
  Rng rng(48);
  double worst_sigma = 0, worst_idem = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Tensor w({10, 20});
    rng.fill_normal(w);
    for (int64_t i = 0; i < w.numel(); ++i) w[i] *= 0.8;
    Tensor c = svd_clip(w, 1.0);
    Rng prng(49 + static_cast<uint64_t>(trial));
    worst_sigma = std::max(worst_sigma, power_iteration_sigma(c, 300, prng));
    Tensor c2 = svd_clip(c, 1.0);
    for (int64_t i = 0; i < c.numel(); ++i) worst_idem = std::max(worst_idem, std::fabs(c[i] - c2[i]));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "sigma_max %.9f, idempotence drift %.3e", worst_sigma, worst_idem);
  detail = buf;
  return worst_sigma <= 1.0 + 1e-9 && worst_idem == 0.0;
}

bool check_conformance(std::string& detail) {
  std::printf("  preset                      params       0.1M  published\n");
  bool ok = true;
  for (const auto& row : published_count_table()) {
    const Preset p = get_preset(row.preset);
    const int64_t count = preset_param_count(p);
    const double rounded = std::round(static_cast<double>(count) / 1e5) / 10.0;
    const bool match = rounded == row.published_millions;
    ok = ok && match;
    std::printf("  %-26s %10lld  %5.1fM  %5.1fM  %s\n", row.preset.c_str(), static_cast<long long>(count), rounded,
                row.published_millions, match ? "ok" : "MISMATCH");
  }
  for (const auto& row : published_reduction_table()) {
    const int64_t base = preset_param_count(get_preset(row.base));
    const int64_t variant = preset_param_count(get_preset(row.variant));
    const double pct = param_reduction_percent(base, variant);
    const bool match = std::fabs(pct - row.published_percent) <= 1.0;
    ok = ok && match;
    std::printf("  %-12s reduction %6.2f%%  published %6.2f%%  %s\n", row.label.c_str(), pct, row.published_percent,
                match ? "ok" : "MISMATCH");
  }
  detail = ok ? "all presets match" : "published counts not reproduced";
  return ok;
}

}  // namespace

int run_verify(const std::string& inject_fault) {
  if (!inject_fault.empty()) {
    ldvd::testing::inject_fault(inject_fault);
    std::printf("fault injected into rule '%s'\n", inject_fault.c_str());
  }
  const std::vector<Check> checks = {
      {"finite-difference", check_finite_difference},
      {"dense-conv", check_dense_conv},
      {"factorization", check_factorization},
      {"hvp", check_hvp},
      {"eigensolve", check_eigensolve},
      {"svd-clip", check_svd_clip},
      {"conformance", check_conformance},
  };
  int failures = 0;
  for (const auto& c : checks) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("check %-18s %s (%s)\n", c.name, ok ? "ok" : "FAIL", detail.c_str());
    if (!ok) ++failures;
  }
  ldvd::testing::clear_fault();
  if (failures > 0) {
    std::printf("%d check(s) failed\n", failures);
    return 1;
  }
  std::printf("all checks passed\n");
  return 0;
}
