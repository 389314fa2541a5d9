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

#include "ldvd/video.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ldvd {

const char* motion_name(MotionKind m) {
  switch (m) {
    case MotionKind::kBounce: return "bounce";
    case MotionKind::kDrift: return "drift";
    case MotionKind::kRotate: return "rotate";
    case MotionKind::kMix: return "mix";
  }
  return "?";
}

namespace {

struct ShapeState {
  double x0, y0;     // start position (shape center)
  double vx, vy;     // velocity, pixels per frame
  double radius;     // half-extent
  double orbit_r;    // rotate: orbit radius
  double phase;      // rotate: initial angle
  double omega;      // rotate: angular velocity
  MotionKind motion;
};

// Fold x into [lo, hi] with elastic reflection (triangle wave).
double reflect_fold(double x, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0) return lo;
  double y = std::fmod(x - lo, 2 * span);
  if (y < 0) y += 2 * span;
  return lo + (y <= span ? y : 2 * span - y);
}

double wrap_fold(double x, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0) return lo;
  double y = std::fmod(x - lo, span);
  if (y < 0) y += span;
  return lo + y;
}

ShapeState make_shape(const SynthSceneConfig& cfg, MotionKind motion, Rng& rng) {
  ShapeState s;
  s.motion = motion;
  const double L = static_cast<double>(cfg.canvas);
  s.radius = std::max(1.0, L / 8.0);
  const double lo = s.radius, hi = L - 1 - s.radius;
  s.x0 = rng.uniform(lo, hi);
  s.y0 = rng.uniform(lo, hi);
  const double speed = rng.uniform(cfg.velocity_min, cfg.velocity_max);
  const double dir = rng.uniform(0, 6.283185307179586477);
  s.vx = speed * std::cos(dir);
  s.vy = speed * std::sin(dir);
  s.orbit_r = rng.uniform(std::max(1.0, L / 8.0), std::max(1.5, L / 2.0 - s.radius - 1.0));
  s.phase = rng.uniform(0, 6.283185307179586477);
  s.omega = (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.uniform(0.2, 0.5);
  return s;
}

std::pair<double, double> shape_center(const ShapeState& s, double canvas, int64_t t) {
  const double lo = s.radius, hi = canvas - 1 - s.radius;
  const double ft = static_cast<double>(t);
  switch (s.motion) {
    case MotionKind::kBounce:
      return {reflect_fold(s.x0 + s.vx * ft, lo, hi), reflect_fold(s.y0 + s.vy * ft, lo, hi)};
    case MotionKind::kDrift:
      // deliberately slower than any bounce so the classes stay separable
      return {wrap_fold(s.x0 + 0.3 * s.vx * ft, 0.0, canvas), wrap_fold(s.y0 + 0.3 * s.vy * ft, 0.0, canvas)};
    case MotionKind::kRotate: {
      const double cx = (canvas - 1) / 2.0, cy = (canvas - 1) / 2.0;
      const double a = s.phase + s.omega * ft;
      return {cx + s.orbit_r * std::cos(a), cy + s.orbit_r * std::sin(a)};
    }
    case MotionKind::kMix:
      break;
  }
  throw std::logic_error("shape_center: unresolved motion kind");
}

void draw_shape(Tensor& frame, const ShapeState& s, double cx, double cy, double canvas, ShapeKind kind,
                const std::vector<double>& channel_gain) {
  const int64_t L = static_cast<int64_t>(canvas);
  const int64_t C = frame.dim(2);
  const double r = s.radius;
  const bool wrap = s.motion == MotionKind::kDrift;
  for (int64_t y = 0; y < L; ++y) {
    for (int64_t x = 0; x < L; ++x) {
      double dx = static_cast<double>(x) - cx;
      double dy = static_cast<double>(y) - cy;
      if (wrap) {
        // Torus distance so drifting shapes re-enter on the far side.
        if (dx > canvas / 2) dx -= canvas;
        if (dx < -canvas / 2) dx += canvas;
        if (dy > canvas / 2) dy -= canvas;
        if (dy < -canvas / 2) dy += canvas;
      }
      bool inside = kind == ShapeKind::kSquare ? (std::fabs(dx) <= r && std::fabs(dy) <= r)
                                               : (dx * dx + dy * dy <= r * r);
      if (!inside) continue;
      for (int64_t c = 0; c < C; ++c) {
        double v = channel_gain[static_cast<size_t>(c)];
        double& px = frame.at({y, x, c});
        px = std::max(px, 2.0 * v - 1.0);
      }
    }
  }
}

}  // namespace

std::pair<double, double> synth_center(const SynthSceneConfig& cfg, int64_t t) {
  Rng rng(cfg.seed);
  MotionKind motion = cfg.motion;
  if (motion == MotionKind::kMix) motion = MotionKind::kBounce;
  ShapeState s = make_shape(cfg, motion, rng);
  return shape_center(s, static_cast<double>(cfg.canvas), t);
}

Tensor synth_video(const SynthSceneConfig& cfg, int64_t length) {
  if (length < 1) throw std::invalid_argument("synth_video: length must be >= 1");
  if (cfg.canvas < 8) throw std::invalid_argument("synth_video: canvas must be >= 8");
  if (cfg.velocity_min < 0 || cfg.velocity_max < cfg.velocity_min) {
    throw std::invalid_argument("synth_video: need 0 <= velocity_min <= velocity_max");
  }
  Rng rng(cfg.seed);
  std::vector<ShapeState> shapes;
  std::vector<std::vector<double>> gains;
  for (int64_t i = 0; i < cfg.num_shapes; ++i) {
    MotionKind motion = cfg.motion;
    if (motion == MotionKind::kMix) {
      const auto pick = rng.uniform_int(0, 2);
      motion = pick == 0 ? MotionKind::kBounce : pick == 1 ? MotionKind::kDrift : MotionKind::kRotate;
    }
    shapes.push_back(make_shape(cfg, motion, rng));
    std::vector<double> g(static_cast<size_t>(cfg.channels), 1.0);
    for (size_t c = 1; c < g.size(); ++c) g[c] = rng.uniform(0.4, 1.0);
    gains.push_back(std::move(g));
  }
  Tensor video({length, cfg.canvas, cfg.canvas, cfg.channels});
  for (int64_t i = 0; i < video.numel(); ++i) video[i] = -1.0;
  for (int64_t t = 0; t < length; ++t) {
    Tensor frame({cfg.canvas, cfg.canvas, cfg.channels});
    for (int64_t i = 0; i < frame.numel(); ++i) frame[i] = -1.0;
    for (size_t si = 0; si < shapes.size(); ++si) {
      auto [cx, cy] = shape_center(shapes[si], static_cast<double>(cfg.canvas), t);
      draw_shape(frame, shapes[si], cx, cy, static_cast<double>(cfg.canvas), cfg.shape, gains[si]);
    }
    std::memcpy(video.data() + t * frame.numel(), frame.data(), static_cast<size_t>(frame.numel()) * sizeof(double));
  }
  return video;
}

void validate_video_range(const Tensor& t) {
  for (int64_t i = 0; i < t.numel(); ++i) {
    if (!(t[i] >= -1.0 && t[i] <= 1.0)) {
      throw std::invalid_argument("video sample outside [-1,1] at index " + std::to_string(i) + ": " +
                                  std::to_string(t[i]));
    }
  }
}

Tensor preprocess(const Tensor& video, const PreprocessConfig& cfg, Rng& stream) {
  if (video.rank() != 4) throw std::invalid_argument("preprocess: video must be (T,H,W,C), got " + shape_str(video.shape()));
  if (cfg.subsample < 1 || cfg.clip_len < 1 || cfg.out_size < 1) {
    throw std::invalid_argument("preprocess: subsample, clip_len, out_size must be >= 1");
  }
  const int64_t T = video.dim(0), H = video.dim(1), W = video.dim(2), C = video.dim(3);
  const int64_t candidates = (T + cfg.subsample - 1) / cfg.subsample;
  if (candidates < cfg.clip_len) {
    const int64_t need = (cfg.clip_len - 1) * cfg.subsample + 1;
    throw std::invalid_argument("preprocess: video too short, need >= " + std::to_string(need) + " frames, have " +
                                std::to_string(T));
  }
  const int64_t max_start = candidates - cfg.clip_len;
  const int64_t start = cfg.crop == CropKind::kCenter ? max_start / 2
                                                      : (max_start > 0 ? stream.uniform_int(0, max_start) : 0);

  const int64_t side = std::min(H, W);
  int64_t top, left;
  if (cfg.crop == CropKind::kCenter) {
    top = (H - side) / 2;
    left = (W - side) / 2;
  } else {
    top = H > side ? stream.uniform_int(0, H - side) : 0;
    left = W > side ? stream.uniform_int(0, W - side) : 0;
  }

  Tensor out({cfg.clip_len, cfg.out_size, cfg.out_size, C});
  const double scale = static_cast<double>(side) / static_cast<double>(cfg.out_size);
  for (int64_t tt = 0; tt < cfg.clip_len; ++tt) {
    const int64_t src_t = (start + tt) * cfg.subsample;
    for (int64_t y = 0; y < cfg.out_size; ++y) {
      const double sy = (static_cast<double>(y) + 0.5) * scale - 0.5;
      const int64_t y0 = static_cast<int64_t>(std::floor(sy));
      const double fy = sy - static_cast<double>(y0);
      const int64_t ya = std::clamp<int64_t>(y0, 0, side - 1) + top;
      const int64_t yb = std::clamp<int64_t>(y0 + 1, 0, side - 1) + top;
      for (int64_t x = 0; x < cfg.out_size; ++x) {
        const double sx = (static_cast<double>(x) + 0.5) * scale - 0.5;
        const int64_t x0 = static_cast<int64_t>(std::floor(sx));
        const double fx = sx - static_cast<double>(x0);
        const int64_t xa = std::clamp<int64_t>(x0, 0, side - 1) + left;
        const int64_t xb = std::clamp<int64_t>(x0 + 1, 0, side - 1) + left;
        for (int64_t c = 0; c < C; ++c) {
          const double v00 = video.at({src_t, ya, xa, c});
          const double v01 = video.at({src_t, ya, xb, c});
          const double v10 = video.at({src_t, yb, xa, c});
          const double v11 = video.at({src_t, yb, xb, c});
          double v = (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
          out.at({tt, y, x, c}) = std::clamp(v, -1.0, 1.0);
        }
      }
    }
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'L', 'D', 'V', 'D'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const std::string& buf, size_t& pos, const std::string& path) {
  if (pos + 4 > buf.size()) {
    throw std::runtime_error("ldvd file truncated at byte " + std::to_string(pos) + ": " + path);
  }
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

}  // namespace

void save_video(const std::string& path, const Tensor& video) {
  if (video.rank() != 4) throw std::invalid_argument("save_video: video must be (T,H,W,C)");
  validate_video_range(video);
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<uint32_t>(video.rank()));
  for (int64_t d : video.shape()) put_u32(buf, static_cast<uint32_t>(d));
  for (int64_t i = 0; i < video.numel(); ++i) {
    const float f = static_cast<float>(video[i]);  // documented lossy narrowing
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(buf, bits);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("short write: " + path);
}

Tensor load_video(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open ldvd file: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  size_t pos = 0;
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw std::runtime_error("bad magic at byte 0 in ldvd file: " + path);
  }
  pos = 4;
  const uint32_t ver = get_u32(buf, pos, path);
  if (ver != kVersion) {
    throw std::runtime_error("unsupported ldvd version " + std::to_string(ver) + " at byte 4: " + path);
  }
  const uint32_t rank = get_u32(buf, pos, path);
  if (rank != 4) {
    throw std::runtime_error("ldvd video must be rank 4 (T,H,W,C), got rank " + std::to_string(rank) + ": " + path);
  }
  Shape shape(rank);
  for (uint32_t a = 0; a < rank; ++a) {
    shape[a] = get_u32(buf, pos, path);
    if (shape[a] < 1) throw std::runtime_error("ldvd dimension " + std::to_string(a) + " is zero: " + path);
  }
  const int64_t n = shape_numel(shape);
  std::vector<double> data(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const uint32_t bits = get_u32(buf, pos, path);
    float fv;
    std::memcpy(&fv, &bits, 4);
    data[static_cast<size_t>(i)] = static_cast<double>(fv);
  }
  if (pos != buf.size()) {
    throw std::runtime_error("trailing bytes at " + std::to_string(pos) + " in ldvd file: " + path);
  }
  Tensor t(std::move(shape), std::move(data));
  validate_video_range(t);
  return t;
}

SynthDataSource::SynthDataSource(SynthSceneConfig scene, PreprocessConfig prep, int64_t raw_frames, Rng stream)
    : scene_(scene), prep_(prep), raw_frames_(raw_frames), stream_(stream) {
  if (raw_frames_ <= 0) raw_frames_ = (prep_.clip_len - 1) * prep_.subsample + 1;
}

const std::vector<MotionKind>& SynthDataSource::classes() {
  static const std::vector<MotionKind> c = {MotionKind::kBounce, MotionKind::kDrift, MotionKind::kRotate};
  return c;
}

std::pair<Tensor, std::vector<int>> SynthDataSource::next_labeled_batch(int64_t batch) {
  Tensor out({batch, prep_.clip_len, prep_.out_size, prep_.out_size, scene_.channels});
  std::vector<int> labels(static_cast<size_t>(batch), 0);
  const int64_t per = prep_.clip_len * prep_.out_size * prep_.out_size * scene_.channels;
  for (int64_t b = 0; b < batch; ++b) {
    SynthSceneConfig cfg = scene_;
    cfg.seed = stream_.next_u64();
    int cls = 0;
    if (scene_.motion == MotionKind::kMix) {
      cls = static_cast<int>(stream_.uniform_int(0, 2));
      cfg.motion = classes()[static_cast<size_t>(cls)];
    } else {
      for (size_t i = 0; i < classes().size(); ++i)
        if (classes()[i] == scene_.motion) cls = static_cast<int>(i);
    }
    labels[static_cast<size_t>(b)] = cls;
    Tensor raw = synth_video(cfg, raw_frames_);
    Tensor clip = preprocess(raw, prep_, stream_);
    std::memcpy(out.data() + b * per, clip.data(), static_cast<size_t>(per) * sizeof(double));
  }
  return {std::move(out), std::move(labels)};
}

Tensor SynthDataSource::next_batch(int64_t batch) { return next_labeled_batch(batch).first; }

}  // namespace ldvd
