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

#include <string>
#include <utility>
#include <vector>

#include "ldvd/rng.hpp"
#include "ldvd/tensor.hpp"

namespace ldvd {

enum class ShapeKind : uint8_t { kSquare, kDisc };
enum class MotionKind : uint8_t { kBounce, kDrift, kRotate, kMix };

const char* motion_name(MotionKind m);

/// Synthetic scene: moving shapes on a dark canvas with closed-form
/// kinematics (triangle-wave reflection for bounce, toroidal wrap for
/// drift, circular orbit for rotate).
struct SynthSceneConfig {
  int64_t canvas = 16;
  int64_t channels = 1;
  int64_t num_shapes = 1;
  ShapeKind shape = ShapeKind::kSquare;
  MotionKind motion = MotionKind::kBounce;
  double velocity_min = 0.5;
  double velocity_max = 1.5;
  uint64_t seed = 0;
};

/// (T, H, W, C) video in [-1, 1]; deterministic in cfg.seed.
Tensor synth_video(const SynthSceneConfig& cfg, int64_t length);

/// Closed-form shape-center position at frame t for the single-shape case;
/// the oracle the renderer is tested against.
std::pair<double, double> synth_center(const SynthSceneConfig& cfg, int64_t t);

enum class CropKind : uint8_t { kCenter, kRandom };

struct PreprocessConfig {
  int64_t subsample = 1;
  int64_t clip_len = 16;
  CropKind crop = CropKind::kCenter;
  int64_t out_size = 16;
};

/// Temporal subsample -> random 16-frame extraction -> square crop ->
/// bilinear resize (half-pixel centers) -> [-1, 1]. Center crop consumes
/// no randomness and is a pure function of its inputs.
Tensor preprocess(const Tensor& video, const PreprocessConfig& cfg, Rng& stream);

/// "LDVD" container: magic, u32 LE version=1, u32 rank, u32 dims, then
/// f32 LE row-major samples (the 64-bit internals are narrowed on save).
void save_video(const std::string& path, const Tensor& video);
Tensor load_video(const std::string& path);

void validate_video_range(const Tensor& t);

/// Deterministic stream of preprocessed synthetic batches; each sample
/// draws a fresh scene seed (and class when motion = mix) from the stream.
class SynthDataSource {
 public:
  SynthDataSource(SynthSceneConfig scene, PreprocessConfig prep, int64_t raw_frames, Rng stream);

  Tensor next_batch(int64_t batch);
  std::pair<Tensor, std::vector<int>> next_labeled_batch(int64_t batch);
  static const std::vector<MotionKind>& classes();

 private:
  SynthSceneConfig scene_;
  PreprocessConfig prep_;
  int64_t raw_frames_;
  Rng stream_;
};

}  // namespace ldvd
