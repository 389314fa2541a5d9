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

#include "ldvd/artifacts.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ldvd/metrics.hpp"
#include "ldvd/presets.hpp"

namespace fs = std::filesystem;

namespace ldvd {

std::string csv_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path, const std::string& expect_header) {
  std::istringstream is(read_file(path));
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty csv: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expect_header) {
    throw std::runtime_error("unexpected header in " + path + ": '" + line + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split(line, ','));
  }
  return rows;
}

}  // namespace

void write_losses_csv(const std::string& path, const std::vector<LossPoint>& rows) {
  std::ostringstream os;
  os << "iteration,loss_d,loss_g\n";
  for (const auto& r : rows) os << r.iteration << "," << csv_real(r.loss_d) << "," << csv_real(r.loss_g) << "\n";
  write_file(path, os.str());
}

void write_spectra_csv(const std::string& path, const std::string& run_id, const std::vector<SpectrumRecord>& recs) {
  std::ostringstream os;
  os << "run_id,iteration,eig_rank,eig_value,lambda_plus,lambda_minus\n";
  for (const auto& rec : recs) {
    for (size_t r = 0; r < rec.eigenvalues.size(); ++r) {
      os << run_id << "," << rec.iteration << "," << r << "," << csv_real(rec.eigenvalues[r]) << ","
         << csv_real(rec.lambda_plus) << "," << csv_real(rec.lambda_minus) << "\n";
    }
  }
  write_file(path, os.str());
}

void write_gradnorms_csv(const std::string& path, const std::string& run_id,
                         const std::vector<std::pair<int64_t, std::vector<GradNormRecord>>>& recs) {
  std::ostringstream os;
  os << "run_id,iteration,node_id,op_kind,batch_kind,adjoint_norm\n";
  for (const auto& [iter, list] : recs) {
    for (const auto& r : list) {
      os << run_id << "," << iter << "," << r.node_id << "," << r.op_kind << "," << r.batch_kind << ","
         << csv_real(r.adjoint_norm) << "\n";
    }
  }
  write_file(path, os.str());
}

std::vector<LossCsvRow> read_losses_csv(const std::string& path) {
  std::vector<LossCsvRow> out;
  for (const auto& f : read_csv(path, "iteration,loss_d,loss_g")) {
    if (f.size() != 3) throw std::runtime_error("malformed row in " + path);
    out.push_back({std::stoll(f[0]), std::stod(f[1]), std::stod(f[2])});
  }
  return out;
}

std::vector<SpectraCsvRow> read_spectra_csv(const std::string& path) {
  std::vector<SpectraCsvRow> out;
  for (const auto& f : read_csv(path, "run_id,iteration,eig_rank,eig_value,lambda_plus,lambda_minus")) {
    if (f.size() != 6) throw std::runtime_error("malformed row in " + path);
    out.push_back({f[0], std::stoll(f[1]), std::stoll(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5])});
  }
  return out;
}

std::vector<GradNormCsvRow> read_gradnorms_csv(const std::string& path) {
  std::vector<GradNormCsvRow> out;
  for (const auto& f : read_csv(path, "run_id,iteration,node_id,op_kind,batch_kind,adjoint_norm")) {
    if (f.size() != 6) throw std::runtime_error("malformed row in " + path);
    out.push_back({f[0], std::stoll(f[1]), std::stoll(f[2]), f[3], f[4], std::stod(f[5])});
  }
  return out;
}

std::string run_id_for(const ExperimentConfig& cfg, const std::string& variant) {
  const std::string canon = dump_config(cfg);
  uint64_t h = fnv1a(canon.data(), canon.size());
  h = fnv1a(variant.data(), variant.size(), h);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

ToyGenerator build_generator(const ExperimentConfig& cfg) {
  ToyGeneratorConfig gc;
  gc.d_content = cfg.d_content;
  gc.d_motion = cfg.d_motion;
  gc.gru_hidden = cfg.gru_hidden;
  gc.frames = cfg.clip_len;
  gc.height = cfg.out_size;
  gc.width = cfg.out_size;
  gc.channels = cfg.channels;
  ToyGenerator::Kind kind;
  if (cfg.gen_preset == "tgan-toy-g") {
    kind = ToyGenerator::Kind::kTgan;
  } else if (cfg.gen_preset == "mocogan-toy-g") {
    kind = ToyGenerator::Kind::kMocogan;
  } else {
    throw ConfigError(0, "generator.preset", "unknown generator preset '" + cfg.gen_preset +
                                                 "'; available: tgan-toy-g mocogan-toy-g");
  }
  return ToyGenerator::build(kind, gc, Rng(cfg.seed).stream("gen").seed());
}

MotionKind motion_of(const std::string& s) {
  if (s == "bounce") return MotionKind::kBounce;
  if (s == "drift") return MotionKind::kDrift;
  if (s == "rotate") return MotionKind::kRotate;
  return MotionKind::kMix;
}

SynthDataSource build_data_source(const ExperimentConfig& cfg, const std::string& stream_tag) {
  SynthSceneConfig scene;
  scene.canvas = cfg.canvas;
  scene.channels = cfg.channels;
  scene.num_shapes = cfg.num_shapes;
  scene.shape = cfg.shape == "disc" ? ShapeKind::kDisc : ShapeKind::kSquare;
  scene.motion = motion_of(cfg.motion);
  scene.velocity_min = cfg.velocity_min;
  scene.velocity_max = cfg.velocity_max;
  PreprocessConfig prep;
  prep.subsample = cfg.subsample;
  prep.clip_len = cfg.clip_len;
  prep.crop = cfg.crop == "random" ? CropKind::kRandom : CropKind::kCenter;
  prep.out_size = cfg.out_size;
  return SynthDataSource(scene, prep, cfg.raw_frames, Rng(cfg.seed).stream(stream_tag));
}

/// Batches of .ldvd files from a directory, preprocessed, cycled in name
/// order.
class DirSource {
 public:
  DirSource(const ExperimentConfig& cfg)
      : prep_{cfg.subsample, cfg.clip_len, cfg.crop == "random" ? CropKind::kRandom : CropKind::kCenter,
              cfg.out_size},
        stream_(Rng(cfg.seed).stream("data")) {
    for (const auto& e : fs::directory_iterator(cfg.data_path)) {
      if (e.path().extension() == ".ldvd") paths_.push_back(e.path().string());
    }
    std::sort(paths_.begin(), paths_.end());
    if (paths_.empty()) throw std::runtime_error("no .ldvd files in " + cfg.data_path);
  }

  Tensor next_batch(int64_t batch) {
    Tensor first = preprocess(load_video(paths_[next_ % paths_.size()]), prep_, stream_);
    ++next_;
    Shape s = first.shape();
    Tensor out({batch, s[0], s[1], s[2], s[3]});
    const int64_t per = first.numel();
    std::copy(first.vec().begin(), first.vec().end(), out.data());
    for (int64_t b = 1; b < batch; ++b) {
      Tensor clip = preprocess(load_video(paths_[next_ % paths_.size()]), prep_, stream_);
      ++next_;
      std::copy(clip.vec().begin(), clip.vec().end(), out.data() + b * per);
    }
    return out;
  }

 private:
  std::vector<std::string> paths_;
  PreprocessConfig prep_;
  Rng stream_;
  size_t next_ = 0;
};

TrainConfig train_config_of(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.iterations = cfg.iterations;
  tc.batch_size = cfg.batch_size;
  tc.lr_d = cfg.lr_d;
  tc.lr_g = cfg.lr_g;
  tc.beta1 = cfg.beta1;
  tc.beta2 = cfg.beta2;
  tc.seed = cfg.seed;
  tc.loss = cfg.loss == "saturating" ? LossKind::kSaturating : LossKind::kNonSaturating;
  tc.d_steps = cfg.d_steps;
  tc.g_steps = cfg.g_steps;
  tc.lipschitz.kind = cfg.lip_kind == "svc"  ? LipschitzKind::kSvc
                      : cfg.lip_kind == "sn" ? LipschitzKind::kSn
                                             : LipschitzKind::kNone;
  tc.lipschitz.cap = cfg.lip_cap;
  tc.lipschitz.every_n = cfg.lip_every_n;
  tc.lipschitz.clip_bn = cfg.lip_clip_bn;
  tc.lipschitz.power_iters = static_cast<int>(cfg.lip_power_iters);
  tc.lipschitz.first_power_iters = static_cast<int>(cfg.lip_first_power_iters);
  tc.spectrum.enabled = cfg.spectrum_every > 0;
  tc.spectrum.every = cfg.spectrum_every;
  tc.spectrum.k = static_cast<int>(cfg.spectrum_k);
  tc.spectrum.max_iters = static_cast<int>(cfg.spectrum_max_iters);
  tc.spectrum.fixed_batch = cfg.hessian_batch == "fixed";
  tc.gradnorm_every = cfg.gradnorm_every;
  return tc;
}

void write_metrics(const ExperimentConfig& cfg, const std::string& dir, const std::string& run_id,
                   ToyGenerator& gen) {
  const std::string ex_path = cfg.extractor == "auto" ? dir + "/extractor.ldps" : cfg.extractor;
  SurrogateExtractor::TrainSettings ts;
  ts.canvas = cfg.out_size;
  ts.frames = cfg.clip_len;
  ts.channels = cfg.channels;
  SurrogateExtractor extractor = [&] {
    if (fs::exists(ex_path)) return SurrogateExtractor::load(ex_path);
    SurrogateExtractor ex = SurrogateExtractor::train(ts);
    ex.save(ex_path);
    return ex;
  }();

  auto real_source = build_data_source(cfg, "metrics-real");
  Rng fake_rng = Rng(cfg.seed).stream("metrics-fake");
  const int64_t chunk = 32;
  std::vector<double> is_vals, fd_vals;
  for (int64_t rep = 0; rep < cfg.metrics_repeats; ++rep) {
    const int64_t n = cfg.metrics_samples;
    Tensor feats_fake({std::max<int64_t>(n, 2), extractor.feature_dim()});
    Tensor feats_real({std::max<int64_t>(n, 2), extractor.feature_dim()});
    Tensor probs_fake({std::max<int64_t>(n, 2), extractor.num_classes()});
    int64_t done = 0;
    while (done < n) {
      const int64_t b = std::min(chunk, n - done);
      LatentBatch z = gen.sample_latents(fake_rng, b);
      Tensor fake = gen.generate(z);
      auto [ff, pf] = extractor.extract(fake);
      Tensor real = real_source.next_batch(b);
      auto [fr, pr] = extractor.extract(real);
      (void)pr;
      for (int64_t i = 0; i < b; ++i) {
        for (int64_t d = 0; d < extractor.feature_dim(); ++d) {
          feats_fake[(done + i) * extractor.feature_dim() + d] = ff[i * extractor.feature_dim() + d];
          feats_real[(done + i) * extractor.feature_dim() + d] = fr[i * extractor.feature_dim() + d];
        }
        for (int64_t c = 0; c < extractor.num_classes(); ++c) {
          probs_fake[(done + i) * extractor.num_classes() + c] = pf[i * extractor.num_classes() + c];
        }
      }
      done += b;
    }
    is_vals.push_back(inception_style_score(probs_fake));
    fd_vals.push_back(frechet_distance(compute_feature_stats(feats_real), compute_feature_stats(feats_fake)));
  }
  auto mean_std = [](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair<double, double>{m, s};
  };
  auto [is_m, is_s] = mean_std(is_vals);
  auto [fd_m, fd_s] = mean_std(fd_vals);
  std::ostringstream os;
  os << "run_id,metric,value,stddev,n_samples,n_repeats\n";
  os << run_id << ",is," << csv_real(is_m) << "," << csv_real(is_s) << "," << cfg.metrics_samples << ","
     << cfg.metrics_repeats << "\n";
  os << run_id << ",fd," << csv_real(fd_m) << "," << csv_real(fd_s) << "," << cfg.metrics_samples << ","
     << cfg.metrics_repeats << "\n";
  write_file(dir + "/metrics.csv", os.str());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg_in, const std::string& out_dir,
                                std::optional<uint64_t> seed_override) {
  ExperimentConfig cfg = cfg_in;
  if (seed_override) cfg.seed = *seed_override;

  std::vector<std::string> variants;
  {
    std::istringstream is(cfg.dis_preset);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      if (!tok.empty()) variants.push_back(tok);
    }
  }
  if (variants.empty()) throw ConfigError(0, "discriminator.preset", "no discriminator preset given");

  auto run_one = [&](const std::string& variant) {
    const std::string dir = variants.size() == 1 ? out_dir : out_dir + "/" + variant;
    fs::create_directories(dir);
    fs::create_directories(dir + "/checkpoints");

    NetSpec dspec;
    if (is_preset(variant)) {
      Preset p = get_preset(variant);
      if (p.parts.size() != 1) {
        throw ConfigError(0, "discriminator.preset",
                          "preset '" + variant + "' is a multi-part discriminator; training expects one part");
      }
      dspec = p.parts[0];
    } else {
      dspec = load_netspec_file(variant);
    }

    // The generator seed and data stream depend only on the config seed, so
    // every variant trains against a bit-identical opponent and batches.
    ToyGenerator gen = build_generator(cfg);
    Network dis = Network::build(dspec, Rng(cfg.seed).stream("dis").seed());

    const std::string run_id = run_id_for(cfg, variant);
    RunArtifacts art;
    if (cfg.data_kind == "ldvd-dir") {
      DirSource src(cfg);
      art = train(train_config_of(cfg), gen, dis, [&src](int64_t b) { return src.next_batch(b); });
    } else {
      SynthDataSource src = build_data_source(cfg, "data");
      art = train(train_config_of(cfg), gen, dis, [&src](int64_t b) { return src.next_batch(b); });
    }

    write_file(dir + "/config.cfg", dump_config(cfg));
    write_losses_csv(dir + "/losses.csv", art.losses);
    write_spectra_csv(dir + "/spectra.csv", run_id, art.spectra);
    write_gradnorms_csv(dir + "/gradnorms.csv", run_id, art.gradnorms);
    save_paramset(dir + "/checkpoints/generator.ldps", gen.params());
    save_paramset(dir + "/checkpoints/discriminator.ldps", dis.params());
    if (cfg.metrics_enable && !art.halted) write_metrics(cfg, dir, run_id, gen);

    RunResult rr;
    rr.dir = dir;
    rr.run_id = run_id;
    rr.variant = variant;
    rr.halted = art.halted;
    rr.halt_reason = art.halt_reason;
    return rr;
  };

  // LDVD_THREADS bounds concurrent variant runs; each run is a pure
  // function of (config, seed) so scheduling cannot change any artifact.
  int64_t workers = 1;
  if (const char* env = std::getenv("LDVD_THREADS")) {
    workers = std::max<int64_t>(1, std::atoll(env));
  }
  workers = std::min<int64_t>(workers, static_cast<int64_t>(variants.size()));

  ExperimentResult result;
  result.runs.resize(variants.size());
  if (workers <= 1) {
    for (size_t i = 0; i < variants.size(); ++i) result.runs[i] = run_one(variants[i]);
  } else {
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::string first_error;
    std::vector<std::thread> pool;
    for (int64_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < variants.size(); i = next.fetch_add(1)) {
          try {
            result.runs[i] = run_one(variants[i]);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (first_error.empty()) first_error = e.what();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (!first_error.empty()) throw std::runtime_error(first_error);
  }
  return result;
}

}  // namespace ldvd
