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

#include "ldvd/gan.hpp"

#include <cmath>
#include <stdexcept>

#include "ldvd/lipschitz.hpp"

namespace ldvd {

const char* loss_kind_name(LossKind k) { return k == LossKind::kSaturating ? "saturating" : "non-saturating"; }

NodeId discriminator_loss(Graph& g, NodeId d_real, NodeId d_fake) {
  // -E log sigma(real) - E log(1 - sigma(fake)) in softplus form.
  NodeId lr = g.mean_all(g.softplus(g.scale(d_real, -1.0)));
  NodeId lf = g.mean_all(g.softplus(d_fake));
  return g.add(lr, lf);
}

NodeId generator_loss(Graph& g, NodeId d_fake, LossKind kind) {
  if (kind == LossKind::kNonSaturating) {
    // maximize log sigma(fake)  ->  minimize softplus(-fake)
    return g.mean_all(g.softplus(g.scale(d_fake, -1.0)));
  }
  // minimize log(1 - sigma(fake)) = -softplus(fake)
  return g.scale(g.mean_all(g.softplus(d_fake)), -1.0);
}

GanLosses gan_value(Graph& g, NodeId d_real, NodeId d_fake, LossKind kind) {
  return {discriminator_loss(g, d_real, d_fake), generator_loss(g, d_fake, kind)};
}

Adam::Adam(double lr, double beta1, double beta2, double eps) : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

void Adam::step(ParamSet& params, std::span<const double> grads) {
  const size_t n = static_cast<size_t>(params.total_dim());
  if (grads.size() != n) {
    throw std::invalid_argument("adam: gradient length " + std::to_string(grads.size()) + " != parameter dim " +
                                std::to_string(n));
  }
  if (m_.empty()) {
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
  }
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  std::vector<double> flat = params.flatten();
  for (size_t i = 0; i < n; ++i) {
    m_[i] = b1_ * m_[i] + (1.0 - b1_) * grads[i];
    v_[i] = b2_ * v_[i] + (1.0 - b2_) * grads[i] * grads[i];
    flat[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
  params.unflatten(flat);
}

namespace {

NodeId upsample2_time(Graph& g, NodeId x) {
  const Shape& s = g.value(x).shape();  // (B,T,1,1,C)
  NodeId b = g.broadcast_axis(x, 2, 2);
  return g.reshape(b, {s[0], 2 * s[1], 1, 1, s[4]});
}

NodeId upsample2_spatial(Graph& g, NodeId x) {
  Shape s = g.value(x).shape();  // (B,T,H,W,C)
  NodeId bh = g.reshape(g.broadcast_axis(x, 3, 2), {s[0], s[1], 2 * s[2], s[3], s[4]});
  s = g.value(bh).shape();
  return g.reshape(g.broadcast_axis(bh, 4, 2), {s[0], s[1], s[2], 2 * s[3], s[4]});
}

constexpr int64_t kHeadBase = 4;   // spatial edge entering the upscaler
constexpr int64_t kHeadChans = 8;  // channels per upscaler stage

int64_t head_stages(int64_t edge) {
  int64_t stages = 0;
  while (kHeadBase << stages < edge) ++stages;
  return stages;
}

}  // namespace

ToyGenerator ToyGenerator::build(Kind kind, const ToyGeneratorConfig& cfg, uint64_t seed) {
  if (cfg.frames % 4 != 0 || cfg.frames < 4) throw std::invalid_argument("toy generator: frames must be a multiple of 4");
  if (cfg.height != cfg.width) throw std::invalid_argument("toy generator: square frames required");
  if ((kHeadBase << head_stages(cfg.height)) != cfg.height) {
    throw std::invalid_argument("toy generator: height must be 4 * 2^k");
  }
  ToyGenerator gen;
  gen.kind_ = kind;
  gen.cfg_ = cfg;
  Rng rng = Rng(seed).stream("init");
  const double gain = std::sqrt(2.0 / (1.0 + kLreluSlope * kLreluSlope));
  auto uinit = [&](Shape shape, int64_t fan_in) {
    Tensor t(std::move(shape));
    const double lim = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
    rng.fill_uniform(t, -lim, lim);
    return t;
  };

  int64_t motion_dim;
  if (kind == Kind::kTgan) {
    // z_c -> (T/4, 8) -> two conv1d stages with x2 temporal upsampling
    const int64_t t0 = cfg.frames / 4;
    gen.params_.add("temporal.lin.w", uinit({cfg.d_content, t0 * 8}, cfg.d_content));
    gen.params_.add("temporal.lin.b", Tensor({t0 * 8}));
    gen.params_.add("temporal.c0.w", uinit({8, 3, 1, 1, 8}, 24));
    gen.params_.add("temporal.c0.b", Tensor({8}));
    gen.params_.add("temporal.c1.w", uinit({cfg.d_motion, 3, 1, 1, 8}, 24));
    gen.params_.add("temporal.c1.b", Tensor({cfg.d_motion}));
    motion_dim = cfg.d_motion;
  } else {
    gen.params_.add("gru.wz", uinit({cfg.d_motion, cfg.gru_hidden}, cfg.d_motion));
    gen.params_.add("gru.uz", uinit({cfg.gru_hidden, cfg.gru_hidden}, cfg.gru_hidden));
    gen.params_.add("gru.bz", Tensor({cfg.gru_hidden}));
    gen.params_.add("gru.wr", uinit({cfg.d_motion, cfg.gru_hidden}, cfg.d_motion));
    gen.params_.add("gru.ur", uinit({cfg.gru_hidden, cfg.gru_hidden}, cfg.gru_hidden));
    gen.params_.add("gru.br", Tensor({cfg.gru_hidden}));
    gen.params_.add("gru.wh", uinit({cfg.d_motion, cfg.gru_hidden}, cfg.d_motion));
    gen.params_.add("gru.uh", uinit({cfg.gru_hidden, cfg.gru_hidden}, cfg.gru_hidden));
    gen.params_.add("gru.bh", Tensor({cfg.gru_hidden}));
    motion_dim = cfg.gru_hidden;
  }

  // 1x1 conv over the concatenated latents to the 4x4 seed map.
  const int64_t zdim = cfg.d_content + motion_dim;
  gen.params_.add("head.lin.w", uinit({kHeadBase * kHeadBase * kHeadChans, 1, 1, 1, zdim}, zdim));
  gen.params_.add("head.lin.b", Tensor({kHeadBase * kHeadBase * kHeadChans}));
  const int64_t stages = head_stages(cfg.height);
  for (int64_t s = 0; s < stages; ++s) {
    const bool last = s + 1 == stages;
    const int64_t ch = last ? cfg.channels : kHeadChans;
    gen.params_.add("head.c" + std::to_string(s) + ".w", uinit({ch, 1, 3, 3, kHeadChans}, 9 * kHeadChans));
    gen.params_.add("head.c" + std::to_string(s) + ".b", Tensor({ch}));
  }
  return gen;
}

std::vector<NodeId> ToyGenerator::bind(Graph& g) const {
  std::vector<NodeId> leaves;
  leaves.reserve(params_.size());
  for (size_t i = 0; i < params_.size(); ++i) leaves.push_back(g.leaf(params_.tensor(i)));
  return leaves;
}

LatentBatch ToyGenerator::sample_latents(Rng& rng, int64_t batch) const {
  LatentBatch z;
  z.z_content = Tensor({batch, cfg_.d_content});
  rng.fill_normal(z.z_content);
  if (kind_ == Kind::kMocogan) {
    z.z_motion = Tensor({batch, cfg_.frames, cfg_.d_motion});
    rng.fill_normal(z.z_motion);
  }
  return z;
}

NodeId ToyGenerator::forward(Graph& g, const LatentBatch& z, const std::vector<NodeId>& leaves) const {
  if (leaves.size() != params_.size()) throw std::invalid_argument("toy generator: leaf/parameter count mismatch");
  auto leaf = [&](const char* name) {
    for (size_t i = 0; i < params_.size(); ++i)
      if (params_.entry(i).name == name) return leaves[i];
    throw std::logic_error(std::string("toy generator: missing parameter ") + name);
  };
  const int64_t B = z.z_content.dim(0);
  const int64_t T = cfg_.frames;
  NodeId zc = g.constant(z.z_content);

  NodeId motion;  // (B,T,1,1,motion_dim)
  if (kind_ == Kind::kTgan) {
    NodeId h = g.add_channel(g.matmul(zc, leaf("temporal.lin.w")), leaf("temporal.lin.b"));
    h = g.leaky_relu(h, kLreluSlope);
    h = g.reshape(h, {B, T / 4, 1, 1, 8});
    h = upsample2_time(g, h);
    h = g.leaky_relu(g.add_channel(g.conv(h, leaf("temporal.c0.w"), {1, 1, 1}, {1, 0, 0}), leaf("temporal.c0.b")),
                     kLreluSlope);
    h = upsample2_time(g, h);
    motion = g.leaky_relu(
        g.add_channel(g.conv(h, leaf("temporal.c1.w"), {1, 1, 1}, {1, 0, 0}), leaf("temporal.c1.b")), kLreluSlope);
  } else {
    if (z.z_motion.empty() || z.z_motion.dim(1) != T) {
      throw std::invalid_argument("toy generator: motion latents (B,T,d_motion) required");
    }
    NodeId zm = g.constant(z.z_motion);
    const int64_t H = cfg_.gru_hidden;
    NodeId h = g.constant(Tensor({B, H}));
    motion = kNoNode;
    for (int64_t t = 0; t < T; ++t) {
      NodeId xt = g.reshape(g.slice(zm, {0, t, 0}, {B, 1, cfg_.d_motion}), {B, cfg_.d_motion});
      NodeId zt = g.sigmoid(
          g.add_channel(g.add(g.matmul(xt, leaf("gru.wz")), g.matmul(h, leaf("gru.uz"))), leaf("gru.bz")));
      NodeId rt = g.sigmoid(
          g.add_channel(g.add(g.matmul(xt, leaf("gru.wr")), g.matmul(h, leaf("gru.ur"))), leaf("gru.br")));
      NodeId cand = g.tanh(g.add_channel(
          g.add(g.matmul(xt, leaf("gru.wh")), g.matmul(g.mul(rt, h), leaf("gru.uh"))), leaf("gru.bh")));
      h = g.add(g.mul(zt, h), g.mul(g.add_scalar(g.scale(zt, -1.0), 1.0), cand));
      NodeId ht = g.reshape(h, {B, 1, 1, 1, H});
      motion = motion == kNoNode ? ht : g.concat(motion, ht, 1);
    }
  }

  // [z_c ; motion_t] per frame, then the shared 2D upscaler.
  NodeId zc_seq = g.reshape(g.broadcast_axis(zc, 1, T), {B, T, 1, 1, cfg_.d_content});
  NodeId lat = g.concat(zc_seq, motion, 4);
  NodeId x = g.add_channel(g.conv(lat, leaf("head.lin.w"), {1, 1, 1}, {0, 0, 0}), leaf("head.lin.b"));
  x = g.leaky_relu(x, kLreluSlope);
  x = g.reshape(x, {B, T, kHeadBase, kHeadBase, kHeadChans});
  const int64_t stages = head_stages(cfg_.height);
  for (int64_t s = 0; s < stages; ++s) {
    x = upsample2_spatial(g, x);
    const std::string w = "head.c" + std::to_string(s) + ".w";
    const std::string b = "head.c" + std::to_string(s) + ".b";
    x = g.add_channel(g.conv(x, leaf(w.c_str()), {1, 1, 1}, {0, 1, 1}), leaf(b.c_str()));
    if (s + 1 < stages) x = g.leaky_relu(x, kLreluSlope);
  }
  return g.tanh(x);
}

Tensor ToyGenerator::generate(const LatentBatch& z) const {
  Graph g;
  auto leaves = bind(g);
  return g.value(forward(g, z, leaves));
}

namespace {

struct SpectrumTracker {
  double lambda_plus = 0;
  double lambda_minus = 0;
  bool first = true;

  void apply(SpectrumRecord& rec) {
    if (rec.eigenvalues.empty()) return;
    const double top = rec.eigenvalues.front();
    const double bottom = rec.eigenvalues.back();
    if (first) {
      lambda_plus = top;
      lambda_minus = bottom;
      first = false;
    } else {
      lambda_plus = std::max(lambda_plus, top);
      lambda_minus = std::min(lambda_minus, bottom);
    }
    rec.lambda_plus = lambda_plus;
    rec.lambda_minus = lambda_minus;
  }
};

}  // namespace

RunArtifacts train(const TrainConfig& cfg, ToyGenerator& gen, Network& dis, const BatchFn& next_batch) {
  if (cfg.iterations < 0 || cfg.batch_size < 1) throw std::invalid_argument("train: bad iteration/batch counts");
  if (cfg.d_steps < 1 || cfg.g_steps < 1) throw std::invalid_argument("train: d_steps and g_steps must be >= 1");
  RunArtifacts art;
  Rng latent_rng = Rng(cfg.seed).stream("latent");
  Rng probe_rng = Rng(cfg.seed).stream("probe");
  Adam adam_d(cfg.lr_d, cfg.beta1, cfg.beta2, cfg.adam_eps);
  Adam adam_g(cfg.lr_g, cfg.beta1, cfg.beta2, cfg.adam_eps);
  dis.lipschitz = cfg.lipschitz;
  if (cfg.lipschitz.kind == LipschitzKind::kSvc) {
    apply_svc(dis, cfg.lipschitz.cap, 1, 0, cfg.lipschitz.clip_bn);  // start inside the constraint set
  }

  SpectrumTracker tracker;
  Tensor fixed_real, fixed_fake;
  Tensor last_real, last_fake;

  auto record_spectrum = [&](int64_t iteration, const Tensor& real, const Tensor& fake) {
    Network snapshot = dis;
    SpectrumOptions opts;
    opts.k = cfg.spectrum.k;
    opts.max_iters = cfg.spectrum.max_iters;
    opts.seed = fnv1a(&iteration, sizeof(iteration), cfg.seed ^ 0xa11ce5ull);
    SpectrumRecord rec = discriminator_spectrum(snapshot, real, fake, opts);
    rec.iteration = iteration;
    tracker.apply(rec);
    art.spectra.push_back(std::move(rec));
  };

  auto record_gradnorms = [&](int64_t iteration, const Tensor& real, const Tensor& fake) {
    std::vector<GradNormRecord> recs;
    {
      Graph g;
      auto leaves = dis.bind(g);
      NodeId out = dis.forward(g, g.constant(real), leaves, BnMode::kTrain);
      NodeId loss = g.mean_all(g.softplus(g.scale(out, -1.0)));
      auto bw = g.backward(loss, leaves);
      auto r = gradient_norm_probe(g, bw, "real");
      recs.insert(recs.end(), r.begin(), r.end());
    }
    {
      Graph g;
      auto leaves = dis.bind(g);
      NodeId out = dis.forward(g, g.constant(fake), leaves, BnMode::kTrain);
      NodeId loss = g.mean_all(g.softplus(out));
      auto bw = g.backward(loss, leaves);
      auto r = gradient_norm_probe(g, bw, "fake");
      recs.insert(recs.end(), r.begin(), r.end());
    }
    art.gradnorms.emplace_back(iteration, std::move(recs));
  };

  auto probe_batches = [&](Tensor& real, Tensor& fake) {
    real = next_batch(cfg.batch_size);
    LatentBatch z = gen.sample_latents(probe_rng, cfg.batch_size);
    fake = gen.generate(z);
  };

  for (int64_t i = 0; i < cfg.iterations; ++i) {
    // Discriminator updates (d_steps per iteration, fresh batch each).
    double loss_d_value = 0;
    bool bad = false;
    for (int64_t step = 0; step < cfg.d_steps && !bad; ++step) {
      const Tensor real = next_batch(cfg.batch_size);
      const LatentBatch z = gen.sample_latents(latent_rng, cfg.batch_size);
      Graph g;
      auto g_leaves = gen.bind(g);
      NodeId fake = gen.forward(g, z, g_leaves);
      auto d_leaves = dis.bind(g);
      Network::ForwardInfo info_r, info_f;
      NodeId dr = dis.forward(g, g.constant(real), d_leaves, BnMode::kTrain, &info_r);
      NodeId df = dis.forward(g, fake, d_leaves, BnMode::kTrain, &info_f);
      NodeId loss_d = discriminator_loss(g, dr, df);
      loss_d_value = g.value(loss_d)[0];
      if (!std::isfinite(loss_d_value)) {
        art.halted = true;
        art.halted_at = i;
        art.halt_reason = "non-finite discriminator loss at iteration " + std::to_string(i);
        bad = true;
        break;
      }
      auto grads = gradient_flat(g, loss_d, d_leaves);
      adam_d.step(dis.params(), grads);
      dis.update_running_stats(g, info_r);
      dis.update_running_stats(g, info_f);
      last_real = real;
      last_fake = g.value(fake);
    }
    if (bad) break;
    if (cfg.lipschitz.kind == LipschitzKind::kSvc) {
      apply_svc(dis, cfg.lipschitz.cap, cfg.lipschitz.every_n, i + 1, cfg.lipschitz.clip_bn);
    }

    // Generator updates on fresh latents.
    double loss_g_value = 0;
    for (int64_t step = 0; step < cfg.g_steps && !bad; ++step) {
      const LatentBatch z2 = gen.sample_latents(latent_rng, cfg.batch_size);
      Graph g;
      auto g_leaves = gen.bind(g);
      NodeId fake = gen.forward(g, z2, g_leaves);
      auto d_leaves = dis.bind(g);
      NodeId df = dis.forward(g, fake, d_leaves, BnMode::kTrain);
      NodeId loss_g = generator_loss(g, df, cfg.loss);
      loss_g_value = g.value(loss_g)[0];
      if (!std::isfinite(loss_g_value)) {
        art.halted = true;
        art.halted_at = i;
        art.halt_reason = "non-finite generator loss at iteration " + std::to_string(i);
        bad = true;
        break;
      }
      auto grads = gradient_flat(g, loss_g, g_leaves);
      adam_g.step(gen.params(), grads);
    }
    if (bad) break;

    art.losses.push_back({i, loss_d_value, loss_g_value});

    const int64_t done = i + 1;
    if (cfg.spectrum.enabled && cfg.spectrum.every > 0 && done % cfg.spectrum.every == 0 &&
        done < cfg.iterations) {
      if (cfg.spectrum.fixed_batch) {
        if (fixed_real.empty()) {
          fixed_real = last_real;
          fixed_fake = last_fake;
        }
        record_spectrum(done, fixed_real, fixed_fake);
      } else {
        record_spectrum(done, last_real, last_fake);
      }
    }
    if (cfg.gradnorm_every > 0 && done % cfg.gradnorm_every == 0 && done < cfg.iterations) {
      record_gradnorms(done, last_real, last_fake);
    }
  }

  if (!art.halted) {
    if (cfg.spectrum.enabled) {
      Tensor real = last_real, fake = last_fake;
      if (cfg.spectrum.fixed_batch && !fixed_real.empty()) {
        real = fixed_real;
        fake = fixed_fake;
      } else if (real.empty()) {
        probe_batches(real, fake);  // iterations == 0: initial-state snapshot
      }
      record_spectrum(cfg.iterations, real, fake);
    }
    if (cfg.gradnorm_every > 0) {
      Tensor real = last_real, fake = last_fake;
      if (real.empty()) probe_batches(real, fake);
      record_gradnorms(cfg.iterations, real, fake);
    }
  }
  return art;
}

}  // namespace ldvd
