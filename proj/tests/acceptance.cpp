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

// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Runs against the library plus the installed ldvd binary.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ldvd/artifacts.hpp"
#include "ldvd/config.hpp"
#include "ldvd/curvature.hpp"
#include "ldvd/figures.hpp"
#include "ldvd/gan.hpp"
#include "ldvd/lanczos.hpp"
#include "ldvd/lipschitz.hpp"
#include "ldvd/metrics.hpp"
#include "ldvd/presets.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace ldvd;

namespace {

const std::string kTool = LDVD_TOOL_PATH;
const std::string kTmp = std::string(LDVD_TEST_TMP) + "/acceptance";

struct Criterion {
  int number;
  const char* name;
  std::function<bool(std::string&)> fn;
};

// ---------------------------------------------------------------- 1
bool c1_param_counts(std::string& detail) {
  const std::vector<std::pair<const char*, double>> expected = {
      {"mocogan-image-d", 0.7}, {"mocogan-video-d", 2.7}, {"mocogan-dual-d", 3.3}, {"tgan-d", 11.0},
      {"tgan-f-c0", 2.8},       {"tgan-f-c0c1", 2.8},     {"tgan-f-c0c2", 3.1},    {"tgan-f-c0c3", 4.2},
      {"mocogan-f-c0", 0.7},    {"mocogan-f-c0c1", 0.7},  {"mocogan-f-c0c2", 1.0}, {"mocogan-f-c0c3", 1.0},
  };
  std::ostringstream os;
  bool ok = true;
  for (const auto& [name, want] : expected) {
    const int64_t count = preset_param_count(get_preset(name));
    const double rounded = std::round(static_cast<double>(count) / 1e5) / 10.0;
    if (rounded != want) {
      ok = false;
      os << " " << name << "=" << rounded << "M(want " << want << "M)";
    }
  }
  detail = ok ? "12/12 presets at the published 0.1M counts" : os.str();
  return ok;
}

// ---------------------------------------------------------------- 2
bool c2_param_reductions(std::string& detail) {
  std::ostringstream os;
  bool ok = true;
  for (const auto& row : published_reduction_table()) {
    const double pct = param_reduction_percent(preset_param_count(get_preset(row.base)),
                                               preset_param_count(get_preset(row.variant)));
    const double diff = std::fabs(pct - row.published_percent);
    os << " " << row.label << "=" << std::round(pct * 100) / 100 << "%";
    if (diff > 1.0) {
      ok = false;
      os << "(off by " << diff << ")";
    }
  }
  detail = os.str();
  return ok;
}

// ---------------------------------------------------------------- 3
bool c3_factorization_oracle(std::string& detail) {
  Rng rng(301);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int64_t kh = rng.uniform_int(2, 4), kw = rng.uniform_int(2, 4), kt = rng.uniform_int(2, 3);
    const int64_t ci = rng.uniform_int(1, 2);
    const std::array<int64_t, 3> stride{rng.uniform_int(1, 2), rng.uniform_int(1, 2), rng.uniform_int(1, 2)};
    const std::array<int64_t, 3> pad{rng.uniform_int(0, 1), rng.uniform_int(0, 1), rng.uniform_int(0, 1)};
    Tensor a({1, 1, kh, kw, ci});
    rng.fill_normal(a);
    Tensor b({1, kt, 1, 1, 1});
    rng.fill_normal(b);
    Tensor kron({1, kt, kh, kw, ci});
    for (int64_t t = 0; t < kt; ++t)
      for (int64_t i = 0; i < kh * kw * ci; ++i) kron[t * kh * kw * ci + i] = a[i] * b[t];
    Tensor x({2, 6, 7, 7, ci});
    rng.fill_normal(x);
    Graph g;
    const Tensor dense = g.value(g.conv(g.constant(x), g.constant(kron), stride, pad));
    NodeId sp = g.conv(g.constant(x), g.constant(a), {1, stride[1], stride[2]}, {0, pad[1], pad[2]});
    const Tensor seq = g.value(g.conv(sp, g.constant(b), {stride[0], 1, 1}, {pad[0], 0, 0}));
    if (dense.shape() != seq.shape()) {
      detail = "staged shapes diverge";
      return false;
    }
    for (int64_t i = 0; i < dense.numel(); ++i) worst = std::max(worst, std::fabs(dense[i] - seq[i]));
  }
  std::ostringstream os;
  os << "50 separable kernels, max abs diff " << worst;
  detail = os.str();
  return worst < 1e-9;
}

// ---------------------------------------------------------------- 4
struct SecondOrderNet {
  // conv + batch-norm-free head, 197 parameters
  Tensor k{{4, 2, 3, 3, 1}}, kb{{4}}, w{{16, 1}}, wb{{1}};
  Tensor input{{2, 3, 6, 6, 1}};

  explicit SecondOrderNet(uint64_t seed) {
    Rng rng(seed);
    rng.fill_uniform(k, -0.5, 0.5);
    rng.fill_uniform(kb, -0.1, 0.1);
    rng.fill_uniform(w, -0.5, 0.5);
    rng.fill_uniform(wb, -0.1, 0.1);
    rng.fill_uniform(input, -1, 1);
  }

  int64_t dim() const { return k.numel() + kb.numel() + w.numel() + wb.numel(); }

  std::vector<double> flat() const {
    std::vector<double> out;
    for (const Tensor* t : {&k, &kb, &w, &wb}) out.insert(out.end(), t->vec().begin(), t->vec().end());
    return out;
  }

  NodeId build_at(Graph& g, const std::vector<double>& p, std::vector<NodeId>& leaves) const {
    SecondOrderNet n = *this;
    size_t pos = 0;
    for (Tensor* t : {&n.k, &n.kb, &n.w, &n.wb})
      for (int64_t i = 0; i < t->numel(); ++i, ++pos) (*t)[i] = p[pos];
    NodeId lk = g.leaf(n.k), lkb = g.leaf(n.kb), lw = g.leaf(n.w), lwb = g.leaf(n.wb);
    leaves = {lk, lkb, lw, lwb};
    NodeId y = g.conv(g.constant(input), lk, {1, 2, 2}, {0, 1, 1});
    y = g.tanh(g.add_channel(y, lkb));
    // channel reduction then a small nonlinear head
    NodeId pooled = g.reshape(g.sum_to_channel(y), {1, 4});
    NodeId feats = g.concat(pooled, g.mul(pooled, pooled), 1);  // (1, 8)
    NodeId feats2 = g.concat(feats, g.tanh(feats), 1);          // (1, 16)
    NodeId out = g.add_channel(g.matmul(feats2, lw), lwb);
    return g.mean_all(g.mul(out, out));
  }

  std::vector<double> grad_at(const std::vector<double>& p) const {
    Graph g;
    std::vector<NodeId> leaves;
    NodeId loss = build_at(g, p, leaves);
    return gradient_flat(g, loss, leaves);
  }
};

bool c4_second_order(std::string& detail) {
  SecondOrderNet net(401);
  if (net.dim() > 200) {
    detail = "net larger than 200 parameters";
    return false;
  }
  Graph g;
  std::vector<NodeId> leaves;
  NodeId loss = net.build_at(g, net.flat(), leaves);
  HvpOperator h(g, loss, leaves);

  Rng rng(402);
  std::vector<double> v(static_cast<size_t>(h.dim()));
  for (auto& x : v) x = rng.normal();
  const auto hv = h.apply(v);
  const auto fd = oracles::fd_hvp([&](const std::vector<double>& p) { return net.grad_at(p); }, net.flat(), v, 1e-4);
  const double rel_fd = oracles::rel_err(hv, fd);

  auto op = [&](std::span<const double> x) { return h.apply(x); };
  Eigen::MatrixXd dense = oracles::dense_hessian(op, h.dim());
  std::vector<double> via_dense(v.size(), 0.0);
  for (int64_t i = 0; i < h.dim(); ++i)
    for (int64_t j = 0; j < h.dim(); ++j) via_dense[static_cast<size_t>(i)] += dense(i, j) * v[static_cast<size_t>(j)];
  const double rel_dense = oracles::rel_err(hv, via_dense);

  double worst_sym = 0;
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> u(v.size());
    for (auto& x : u) x = rng.normal();
    const auto hu = h.apply(u);
    double uhv = 0, vhu = 0;
    for (size_t i = 0; i < v.size(); ++i) {
      uhv += u[i] * hv[i];
      vhu += v[i] * hu[i];
    }
    worst_sym = std::max(worst_sym, std::fabs(uhv - vhu) / std::max(1.0, std::fabs(uhv)));
  }
  std::ostringstream os;
  os << "dim " << h.dim() << ": fd rel " << rel_fd << ", dense rel " << rel_dense << ", symmetry " << worst_sym;
  detail = os.str();
  return rel_fd < 1e-4 && rel_dense < 1e-6 && worst_sym <= 1e-8;
}

// ---------------------------------------------------------------- 5
bool c5_lanczos_oracle(std::string& detail) {
  double worst = 0;
  for (const int64_t n : {100, 150, 200}) {
    Rng rng(500 + static_cast<uint64_t>(n));
    Tensor a({n, n});
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = i; j < n; ++j) {
        const double val = rng.normal();
        a[i * n + j] = val;
        a[j * n + i] = val;
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
    const auto res = lanczos_extremal(op, n, 10, static_cast<int>(n), 501);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracles::to_eigen(a));
    for (int i = 0; i < 10; ++i) {
      const double tw = es.eigenvalues()(n - 1 - i);
      const double bw = es.eigenvalues()(i);
      worst = std::max(worst, std::fabs(res.ritz_values[static_cast<size_t>(i)] - tw) / std::max(1.0, std::fabs(tw)));
      worst = std::max(worst, std::fabs(res.ritz_values[res.ritz_values.size() - 1 - static_cast<size_t>(i)] - bw) /
                                  std::max(1.0, std::fabs(bw)));
    }
  }

  // A real tiny-GAN discriminator Hessian.
  NetSpec tiny;
  tiny.name = "tiny-d";
  tiny.input = {4, 6, 6, 1};
  {
    LayerSpec c0;
    c0.label = "c0";
    c0.kind = LayerKind::kConv3d;
    c0.channels_out = 2;
    c0.kernel = {2, 3, 3};
    c0.stride = {2, 2, 2};
    c0.pad = {0, 1, 1};
    c0.act = ActKind::kLeakyRelu;
    LayerSpec head;
    head.label = "head";
    head.kind = LayerKind::kLinear;
    head.channels_out = 1;
    tiny.layers = {c0, head};
  }
  Network d = Network::build(tiny, 502);
  Rng rng(503);
  Tensor real({3, 4, 6, 6, 1});
  rng.fill_uniform(real, -1, 1);
  // random fake batch standing in for G(z) values at frozen theta
  Tensor fake({3, 4, 6, 6, 1});
  rng.fill_uniform(fake, -1, 1);

  Tensor combined;
  {
    Graph tmp;
    combined = tmp.value(tmp.concat(tmp.constant(real), tmp.constant(fake), 0));
  }
  d.freeze_stats_from_batch(combined);
  Graph g;
  auto leaves = d.bind(g);
  NodeId out = d.forward(g, g.constant(combined), leaves, BnMode::kFrozen);
  const Shape os = g.value(out).shape();
  std::vector<int64_t> start(os.size(), 0), len(os);
  len[0] = 3;
  NodeId lr = g.slice(out, start, len);
  start[0] = 3;
  len[0] = os[0] - 3;
  NodeId lf = g.slice(out, start, len);
  NodeId v = g.add(g.scale(g.mean_all(g.softplus(g.scale(lr, -1.0))), -1.0),
                   g.scale(g.mean_all(g.softplus(lf)), -1.0));
  HvpOperator h(g, v, leaves);
  auto hvp_op = [&](std::span<const double> x) { return h.apply(x); };
  const auto res = lanczos_extremal(hvp_op, h.dim(), 10, static_cast<int>(h.dim()), 504);
  Eigen::MatrixXd dense = oracles::dense_hessian(hvp_op, h.dim());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (dense + dense.transpose()));
  for (int i = 0; i < 10; ++i) {
    const double tw = es.eigenvalues()(h.dim() - 1 - i);
    const double bw = es.eigenvalues()(i);
    worst = std::max(worst, std::fabs(res.ritz_values[static_cast<size_t>(i)] - tw) / std::max(1.0, std::fabs(tw)));
    worst = std::max(worst, std::fabs(res.ritz_values[res.ritz_values.size() - 1 - static_cast<size_t>(i)] - bw) /
                                std::max(1.0, std::fabs(bw)));
  }
  std::ostringstream det;
  det << "dims {100,150,200} + GAN Hessian dim " << h.dim() << ", worst rel " << worst;
  detail = det.str();
  return worst <= 1e-8;
}

// ---------------------------------------------------------------- 6
bool c6_lipschitz_contracts(std::string& detail) {
  Network d = Network::build(get_preset("tgan-toy-d").parts[0], 601);
  for (size_t i = 0; i < d.params().size(); ++i) {
    auto& t = d.params().tensor(i);
    for (int64_t j = 0; j < t.numel(); ++j) t[j] *= 9.0;
  }
  apply_svc(d, 1.0, 1, 0, true);
  double worst_sigma = 0;
  for (const auto& lp : d.layer_params()) {
    for (int idx : {lp.w, lp.hw_w, lp.t_w}) {
      if (idx < 0) continue;
      Eigen::BDCSVD<Eigen::MatrixXd> svd(
          oracles::to_eigen(reshape_to_matrix(d.params().tensor(static_cast<size_t>(idx)))));
      worst_sigma = std::max(worst_sigma, svd.singularValues()(0));
    }
  }

  Rng rng(602);
  Tensor w({12, 18});
  rng.fill_normal(w);
  Tensor c1 = svd_clip(w, 1.0);
  Tensor c2 = svd_clip(c1, 1.0);
  bool idempotent = true;
  for (int64_t i = 0; i < c1.numel(); ++i) idempotent = idempotent && c1[i] == c2[i];

  Tensor w2({20, 20});
  rng.fill_normal(w2);
  SpectralState st;
  spectral_sigma_estimate(w2, st, 50);
  auto [normed, sigma_hat] = spectral_normalize(w2, st, 50);
  (void)sigma_hat;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(oracles::to_eigen(normed));
  const double sn_sigma = svd.singularValues()(0);

  std::ostringstream os;
  os << "post-SVC sigma_max " << worst_sigma << ", idempotent " << (idempotent ? "yes" : "NO") << ", SN sigma "
     << sn_sigma;
  detail = os.str();
  return worst_sigma <= 1.0 + 1e-6 && idempotent && sn_sigma >= 0.99 && sn_sigma <= 1.01;
}

// ---------------------------------------------------------------- 7
struct CurvatureRun {
  double median_top10_abs = 0;
  double max_abs = 0;
};

CurvatureRun run_curvature(const std::string& preset, uint64_t seed, LipschitzKind lip) {
  SynthSceneConfig scene;
  scene.canvas = 16;
  scene.motion = MotionKind::kMix;
  PreprocessConfig prep;
  prep.clip_len = 16;
  prep.out_size = 16;
  SynthDataSource src(scene, prep, 0, Rng(seed).stream("data"));

  ToyGeneratorConfig gc;  // 16 frames, 16x16, matched across variants
  ToyGenerator gen = ToyGenerator::build(ToyGenerator::Kind::kTgan, gc, Rng(seed).stream("gen").seed());
  Network dis = Network::build(get_preset(preset).parts[0], Rng(seed).stream("dis").seed());

  TrainConfig tc;
  tc.iterations = 120;
  tc.batch_size = 4;
  tc.seed = seed;
  tc.lipschitz.kind = lip;
  tc.lipschitz.cap = 1.0;
  tc.lipschitz.every_n = 5;
  tc.spectrum.enabled = true;
  tc.spectrum.every = 30;
  tc.spectrum.k = 10;
  auto art = train(tc, gen, dis, [&src](int64_t b) { return src.next_batch(b); });
  if (art.halted) throw std::runtime_error("curvature run halted: " + art.halt_reason);

  CurvatureRun out;
  std::vector<double> pooled;
  for (const auto& rec : art.spectra) {
    std::vector<double> mags;
    for (double e : rec.eigenvalues) mags.push_back(std::fabs(e));
    std::sort(mags.rbegin(), mags.rend());
    for (size_t i = 0; i < std::min<size_t>(10, mags.size()); ++i) pooled.push_back(mags[i]);
    if (!mags.empty()) out.max_abs = std::max(out.max_abs, mags.front());
  }
  std::sort(pooled.begin(), pooled.end());
  out.median_top10_abs = pooled[pooled.size() / 2];
  return out;
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

bool c7_curvature_ordering(std::string& detail) {
  std::vector<double> med3d, medf, max_none, max_svc;
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto r3d = run_curvature("tgan-toy-d", seed, LipschitzKind::kNone);
    const auto rf = run_curvature("tgan-toy-d-f", seed, LipschitzKind::kNone);
    const auto rsvc = run_curvature("tgan-toy-d", seed, LipschitzKind::kSvc);
    med3d.push_back(r3d.median_top10_abs);
    medf.push_back(rf.median_top10_abs);
    max_none.push_back(r3d.max_abs);
    max_svc.push_back(rsvc.max_abs);
  }
  const double m3 = median3(med3d), mf = median3(medf);
  const double mn = median3(max_none), ms = median3(max_svc);
  std::ostringstream os;
  os << "median top-10 |eig|: 3D " << m3 << " vs factorized " << mf << "; max |eig|: plain " << mn << " vs SVC "
     << ms;
  detail = os.str();
  return m3 > mf && ms < mn;
}

// ---------------------------------------------------------------- 8
bool c8_saturating_pathology(std::string& detail) {
  ToyGeneratorConfig gc;
  gc.frames = 8;
  ToyGenerator gen = ToyGenerator::build(ToyGenerator::Kind::kTgan, gc, 801);
  Rng lat(802);
  LatentBatch z = gen.sample_latents(lat, 3);
  auto grad_norm = [&](LossKind kind) {
    Graph g;
    auto leaves = gen.bind(g);
    NodeId fake = gen.forward(g, z, leaves);
    NodeId logits = g.add_scalar(g.scale(g.mean_all(fake), 0.1), -14.0);  // perfect D margin
    NodeId loss = generator_loss(g, logits, kind);
    auto grads = gradient_flat(g, loss, leaves);
    double n = 0;
    for (double v : grads) n += v * v;
    return std::sqrt(n);
  };
  const double sat = grad_norm(LossKind::kSaturating);
  const double ns = grad_norm(LossKind::kNonSaturating);
  std::ostringstream os;
  os << "generator grad norm: saturating " << sat << " vs non-saturating " << ns;
  detail = os.str();
  return ns > 0 && sat <= 0.1 * ns;
}

// ---------------------------------------------------------------- 9
bool c9_metric_identities(std::string& detail) {
  Tensor constant({6, 4});
  for (int64_t i = 0; i < 6; ++i) {
    constant[i * 4 + 0] = 0.1;
    constant[i * 4 + 1] = 0.2;
    constant[i * 4 + 2] = 0.3;
    constant[i * 4 + 3] = 0.4;
  }
  const double is_const = inception_style_score(constant);

  const int64_t c = 5;
  Tensor onehots({10, c});
  for (int64_t i = 0; i < 10; ++i) onehots[i * c + (i % c)] = 1.0;
  const double is_onehot = inception_style_score(onehots);

  const int64_t n = 7;
  FeatureStats a, b;
  a.mean = Tensor({n});
  b.mean = Tensor::full({n}, 1.3);
  a.cov = Tensor({n, n});
  b.cov = Tensor({n, n});
  for (int64_t i = 0; i < n; ++i) {
    a.cov[i * n + i] = 0.6;
    b.cov[i * n + i] = 0.6;
  }
  a.count = b.count = 100;
  const double fd_shift = frechet_distance(a, b);
  const double want_shift = 1.3 * 1.3 * static_cast<double>(n);

  FeatureStats sa = a, sb = a;
  for (int64_t i = 0; i < n; ++i) {
    sa.cov[i * n + i] = 2.0;
    sb.cov[i * n + i] = 0.5;
  }
  sb.mean = a.mean;
  const double fd_cov = frechet_distance(sa, sb);
  const double want_cov = static_cast<double>(n) * std::pow(std::sqrt(2.0) - std::sqrt(0.5), 2);

  std::ostringstream os;
  os << "IS const " << is_const << ", IS one-hot " << is_onehot << ", FD shift err "
     << std::fabs(fd_shift - want_shift) << ", FD cov err " << std::fabs(fd_cov - want_cov);
  detail = os.str();
  return std::fabs(is_const - 1.0) < 1e-9 && std::fabs(is_onehot - static_cast<double>(c)) < 1e-9 &&
         std::fabs(fd_shift - want_shift) < 1e-8 && std::fabs(fd_cov - want_cov) < 1e-8;
}

// ---------------------------------------------------------------- 10
std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("missing artifact: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool c10_determinism_gate(std::string& detail) {
  fs::create_directories(kTmp);
  const std::string cfg_path = kTmp + "/determinism.cfg";
  {
    std::ofstream f(cfg_path, std::ios::trunc);
    f << "[data]\nframes = 8\nclip_len = 8\n\n[train]\niterations = 6\nbatch_size = 2\nseed = 7\n\n"
         "[analysis]\nspectrum_every = 3\nk = 4\nmax_iters = 20\ngradnorm_every = 3\n\n"
         "[metrics]\nenable = true\nsamples = 24\nrepeats = 2\n";
  }
  const std::string out1 = kTmp + "/det1";
  const std::string out2 = kTmp + "/det2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  auto shell = [](const std::string& cmd) { return std::system(cmd.c_str()); };
  if (shell(kTool + " run --config " + cfg_path + " --out " + out1 + " > " + kTmp + "/det1.log 2>&1") != 0) {
    detail = "first run failed";
    return false;
  }
  if (shell(kTool + " run --config " + cfg_path + " --out " + out2 + " > " + kTmp + "/det2.log 2>&1") != 0) {
    detail = "second run failed";
    return false;
  }
  for (const char* fig : {"spectra", "losses", "gradnorms"}) {
    for (const std::string& out : {out1, out2}) {
      if (shell(kTool + " plot --run " + out + " --figure " + fig + " > /dev/null 2>&1") != 0) {
        detail = std::string("plot failed for ") + fig;
        return false;
      }
    }
  }
  size_t checked = 0;
  for (const char* name : {"config.cfg", "losses.csv", "spectra.csv", "gradnorms.csv", "metrics.csv",
                           "spectra.svg", "losses.svg", "gradnorms.svg"}) {
    if (slurp(out1 + "/" + name) != slurp(out2 + "/" + name)) {
      detail = std::string("artifact differs between reruns: ") + name;
      return false;
    }
    ++checked;
  }
  std::ostringstream os;
  os << checked << " artifacts byte-identical across reruns";
  detail = os.str();
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 2 && std::string(argv[1]) == "--only") only = std::atoi(argv[2]);

  const std::vector<Criterion> criteria = {
      {1, "parameter-count conformance", c1_param_counts},
      {2, "parameter-reduction conformance", c2_param_reductions},
      {3, "factorization oracle", c3_factorization_oracle},
      {4, "second-order correctness", c4_second_order},
      {5, "lanczos oracle", c5_lanczos_oracle},
      {6, "svc/sn contracts", c6_lipschitz_contracts},
      {7, "curvature-ordering reproduction", c7_curvature_ordering},
      {8, "saturating-loss pathology", c8_saturating_pathology},
      {9, "metric identities", c9_metric_identities},
      {10, "determinism gate", c10_determinism_gate},
  };

  fs::create_directories(kTmp);
  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.number != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %2d. %-36s %s\n", ok ? "PASS" : "FAIL", c.number, c.name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
