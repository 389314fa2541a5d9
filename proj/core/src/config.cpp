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

#include "ldvd/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace ldvd {

namespace {

enum class ValueKind { kInt, kUint, kReal, kBool, kString };

struct KeySpec {
  const char* section;
  const char* key;
  ValueKind kind;
  std::function<void(ExperimentConfig&, const std::string&, int)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int64_t parse_int(const std::string& v, const std::string& key, int line) {
  try {
    size_t pos = 0;
    int64_t r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw ConfigError(line, key, "key '" + key + "' expects an integer, got '" + v + "'");
  }
}

uint64_t parse_uint(const std::string& v, const std::string& key, int line) {
  try {
    size_t pos = 0;
    uint64_t r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw ConfigError(line, key, "key '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
}

double parse_real(const std::string& v, const std::string& key, int line) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return r;
  } catch (...) {
    throw ConfigError(line, key, "key '" + key + "' expects a real number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(line, key, "key '" + key + "' expects true or false, got '" + v + "'");
}

std::string parse_choice(const std::string& v, const std::string& key, int line,
                         std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string opts;
  for (const char* a : allowed) opts += std::string(" ") + a;
  throw ConfigError(line, key, "key '" + key + "' must be one of:" + opts + "; got '" + v + "'");
}

#define INT_KEY(sec, name, field)                                                                       \
  {sec, name, ValueKind::kInt,                                                                          \
   [](ExperimentConfig& c, const std::string& v, int ln) { c.field = parse_int(v, sec "." name, ln); }, \
   [](const ExperimentConfig& c) { return std::to_string(c.field); }}
#define UINT_KEY(sec, name, field)                                                                       \
  {sec, name, ValueKind::kUint,                                                                          \
   [](ExperimentConfig& c, const std::string& v, int ln) { c.field = parse_uint(v, sec "." name, ln); }, \
   [](const ExperimentConfig& c) { return std::to_string(c.field); }}
#define REAL_KEY(sec, name, field)                                                                       \
  {sec, name, ValueKind::kReal,                                                                          \
   [](ExperimentConfig& c, const std::string& v, int ln) { c.field = parse_real(v, sec "." name, ln); }, \
   [](const ExperimentConfig& c) { return fmt_real(c.field); }}
#define BOOL_KEY(sec, name, field)                                                                       \
  {sec, name, ValueKind::kBool,                                                                          \
   [](ExperimentConfig& c, const std::string& v, int ln) { c.field = parse_bool(v, sec "." name, ln); }, \
   [](const ExperimentConfig& c) { return c.field ? "true" : "false"; }}
#define STR_KEY(sec, name, field)                                                         \
  {sec, name, ValueKind::kString,                                                         \
   [](ExperimentConfig& c, const std::string& v, int) { c.field = v; },                   \
   [](const ExperimentConfig& c) { return c.field; }}
#define CHOICE_KEY(sec, name, field, ...)                                                              \
  {sec, name, ValueKind::kString,                                                                      \
   [](ExperimentConfig& c, const std::string& v, int ln) {                                             \
     c.field = parse_choice(v, sec "." name, ln, {__VA_ARGS__});                                       \
   },                                                                                                  \
   [](const ExperimentConfig& c) { return c.field; }}

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = {
      INT_KEY("data", "canvas", canvas),
      INT_KEY("data", "frames", frames),
      INT_KEY("data", "channels", channels),
      INT_KEY("data", "num_shapes", num_shapes),
      CHOICE_KEY("data", "shape", shape, "square", "disc"),
      CHOICE_KEY("data", "motion", motion, "bounce", "drift", "rotate", "mix"),
      REAL_KEY("data", "velocity_min", velocity_min),
      REAL_KEY("data", "velocity_max", velocity_max),
      INT_KEY("data", "subsample", subsample),
      INT_KEY("data", "clip_len", clip_len),
      CHOICE_KEY("data", "crop", crop, "center", "random"),
      INT_KEY("data", "out_size", out_size),
      INT_KEY("data", "raw_frames", raw_frames),
      CHOICE_KEY("data", "kind", data_kind, "synth", "ldvd-dir"),
      STR_KEY("data", "path", data_path),
      STR_KEY("generator", "preset", gen_preset),
      INT_KEY("generator", "d_content", d_content),
      INT_KEY("generator", "d_motion", d_motion),
      INT_KEY("generator", "gru_hidden", gru_hidden),
      STR_KEY("discriminator", "preset", dis_preset),
      INT_KEY("train", "iterations", iterations),
      INT_KEY("train", "batch_size", batch_size),
      REAL_KEY("train", "lr_d", lr_d),
      REAL_KEY("train", "lr_g", lr_g),
      REAL_KEY("train", "beta1", beta1),
      REAL_KEY("train", "beta2", beta2),
      UINT_KEY("train", "seed", seed),
      CHOICE_KEY("train", "loss", loss, "saturating", "non-saturating"),
      INT_KEY("train", "d_steps", d_steps),
      INT_KEY("train", "g_steps", g_steps),
      CHOICE_KEY("lipschitz", "kind", lip_kind, "none", "svc", "sn"),
      REAL_KEY("lipschitz", "cap", lip_cap),
      INT_KEY("lipschitz", "every_n", lip_every_n),
      BOOL_KEY("lipschitz", "clip_bn", lip_clip_bn),
      INT_KEY("lipschitz", "power_iters", lip_power_iters),
      INT_KEY("lipschitz", "first_power_iters", lip_first_power_iters),
      INT_KEY("analysis", "spectrum_every", spectrum_every),
      INT_KEY("analysis", "k", spectrum_k),
      INT_KEY("analysis", "max_iters", spectrum_max_iters),
      CHOICE_KEY("analysis", "hessian_batch", hessian_batch, "minibatch", "fixed"),
      INT_KEY("analysis", "gradnorm_every", gradnorm_every),
      BOOL_KEY("metrics", "enable", metrics_enable),
      INT_KEY("metrics", "samples", metrics_samples),
      INT_KEY("metrics", "repeats", metrics_repeats),
      STR_KEY("metrics", "extractor", extractor),
  };
  return keys;
}

#undef INT_KEY
#undef UINT_KEY
#undef REAL_KEY
#undef BOOL_KEY
#undef STR_KEY
#undef CHOICE_KEY

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  std::string section;
  while (std::getline(is, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, s, "malformed section header " + s);
      section = s.substr(1, s.size() - 2);
      bool known = false;
      for (const auto& k : schema())
        if (section == k.section) known = true;
      if (!known) throw ConfigError(line, section, "unknown section [" + section + "]");
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, s, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError(line, key, "key '" + key + "' appears before any section");
    bool matched = false;
    for (const auto& k : schema()) {
      if (section == k.section && key == k.key) {
        k.set(cfg, val, line);
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw ConfigError(line, section + "." + key, "unknown key '" + section + "." + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& k : schema()) {
    if (section != k.section) {
      if (!section.empty()) os << "\n";
      section = k.section;
      os << "[" << section << "]\n";
    }
    os << k.key << " = " << k.get(cfg) << "\n";
  }
  return os.str();
}

}  // namespace ldvd
