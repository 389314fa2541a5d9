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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ldvd {

/// Raised with the offending key and line for malformed experiment
/// configs; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string key, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line), key_(std::move(key)) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Sectioned key = value experiment description. Every key has a default;
/// unknown sections or keys are rejected with their line number. The
/// canonical dump materializes every key in schema order, making
/// dump(parse(.)) a fixed point.
struct ExperimentConfig {
  // [data]
  int64_t canvas = 16;
  int64_t frames = 16;
  int64_t channels = 1;
  int64_t num_shapes = 1;
  std::string shape = "square";  // square | disc
  std::string motion = "mix";    // bounce | drift | rotate | mix
  double velocity_min = 0.5;
  double velocity_max = 1.5;
  int64_t subsample = 1;
  int64_t clip_len = 16;
  std::string crop = "center";  // center | random
  int64_t out_size = 16;
  int64_t raw_frames = 0;  // 0: (clip_len-1)*subsample + 1
  std::string data_kind = "synth";  // synth | ldvd-dir
  std::string data_path;
  // [generator]
  std::string gen_preset = "tgan-toy-g";  // tgan-toy-g | mocogan-toy-g
  int64_t d_content = 8;
  int64_t d_motion = 6;
  int64_t gru_hidden = 8;
  // [discriminator]
  std::string dis_preset = "tgan-toy-d";  // preset name(s), comma-separated, or a netspec file path
  // [train]
  int64_t iterations = 200;
  int64_t batch_size = 8;
  double lr_d = 2e-4;
  double lr_g = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  uint64_t seed = 1;
  std::string loss = "non-saturating";  // saturating | non-saturating
  int64_t d_steps = 1;
  int64_t g_steps = 1;
  // [lipschitz]
  std::string lip_kind = "none";  // none | svc | sn
  double lip_cap = 1.0;
  int64_t lip_every_n = 5;
  bool lip_clip_bn = true;
  int64_t lip_power_iters = 1;
  int64_t lip_first_power_iters = 50;
  // [analysis]
  int64_t spectrum_every = 0;  // 0: no spectrum tracking
  int64_t spectrum_k = 10;
  int64_t spectrum_max_iters = 0;  // 0: 4k + 20
  std::string hessian_batch = "minibatch";  // minibatch | fixed
  int64_t gradnorm_every = 0;
  // [metrics]
  bool metrics_enable = false;
  int64_t metrics_samples = 1000;
  int64_t metrics_repeats = 4;
  std::string extractor = "auto";  // auto | path to .ldps
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace ldvd
