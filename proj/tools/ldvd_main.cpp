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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ldvd/artifacts.hpp"
#include "ldvd/config.hpp"
#include "ldvd/figures.hpp"
#include "ldvd/gan.hpp"
#include "ldvd/metrics.hpp"
#include "ldvd/netspec.hpp"
#include "ldvd/presets.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using namespace ldvd;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

int cmd_run(const std::string& config_path, const std::string& out_dir, std::optional<uint64_t> seed) {
  ExperimentConfig cfg;
  try {
    cfg = load_config_file(config_path);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error in %s (key %s): %s\n", config_path.c_str(), e.key().c_str(), e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  }
  try {
    ExperimentResult res = run_experiment(cfg, out_dir, seed);
    bool halted = false;
    for (const auto& run : res.runs) {
      std::printf("run %s (%s) -> %s%s\n", run.run_id.c_str(), run.variant.c_str(), run.dir.c_str(),
                  run.halted ? " [halted]" : "");
      if (run.halted) {
        std::fprintf(stderr, "numerical failure: %s (last-good checkpoint retained)\n", run.halt_reason.c_str());
        halted = true;
      }
    }
    return halted ? kExitNumerical : 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error (key %s): %s\n", e.key().c_str(), e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failed: %s\n", e.what());
    return kExitNumerical;
  }
}

int cmd_params(const std::string& name, const std::string& baseline) {
  try {
    std::vector<NetSpec> parts;
    std::string title = name;
    if (name == "tgan-toy-g" || name == "mocogan-toy-g") {
      ToyGeneratorConfig gc;
      ToyGenerator gen = ToyGenerator::build(
          name == "tgan-toy-g" ? ToyGenerator::Kind::kTgan : ToyGenerator::Kind::kMocogan, gc, 1);
      std::printf("%s: toy generator, %lld parameters\n", name.c_str(),
                  static_cast<long long>(gen.params().total_dim()));
      return 0;
    }
    if (is_preset(name)) {
      Preset p = get_preset(name);
      parts = p.parts;
      title = p.name + " (" + p.summary + ")";
    } else if (fs::exists(name)) {
      parts = {load_netspec_file(name)};
    } else {
      Preset p = get_preset(name);  // throws, listing available presets
      parts = p.parts;
    }
    std::printf("%s\n", title.c_str());
    int64_t total = 0;
    for (const auto& part : parts) {
      const auto shapes = chain_shapes(part);
      std::printf("  part %s  input %lldx%lldx%lldx%lld\n", part.name.c_str(),
                  static_cast<long long>(part.input[0]), static_cast<long long>(part.input[1]),
                  static_cast<long long>(part.input[2]), static_cast<long long>(part.input[3]));
      Shape cur = {1, part.input[0], part.input[1], part.input[2], part.input[3]};
      for (size_t i = 0; i < part.layers.size(); ++i) {
        const LayerSpec& l = part.layers[i];
        int64_t c;
        if (l.kind == LayerKind::kLinear) {
          int64_t d = 1;
          for (size_t a = 1; a < cur.size(); ++a) d *= cur[a];
          c = d * l.channels_out + (l.conv_bias() ? l.channels_out : 0) +
              (l.norm == NormKind::kBatch ? 2 * l.channels_out : 0);
        } else {
          c = count_params(l, cur.back());
        }
        total += c;
        std::printf("    %-8s %-16s out %-16s %10lld params\n", l.label.c_str(), layer_kind_name(l.kind),
                    shape_str(shapes[i]).c_str(), static_cast<long long>(c));
        cur = shapes[i];
      }
    }
    std::printf("  total %lld parameters (%.1fM)\n", static_cast<long long>(total),
                std::round(static_cast<double>(total) / 1e5) / 10.0);
    for (const auto& row : published_count_table()) {
      if (row.preset == name) {
        std::printf("  published count: %.1fM\n", row.published_millions);
      }
    }
    if (!baseline.empty()) {
      const Preset b = get_preset(baseline);
      const double pct = param_reduction_percent(preset_param_count(b), total);
      std::printf("  reduction vs %s: %.2f%%\n", baseline.c_str(), pct);
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  }
}

int cmd_plot(const std::string& run_dir, const std::string& figure, std::string out_path) {
  try {
    if (out_path.empty()) out_path = run_dir + "/" + figure + ".svg";
    std::string svg;
    if (figure == "spectra") {
      svg = render_spectra_svg(read_spectra_csv(run_dir + "/spectra.csv"), "Leading Hessian eigenvalues");
    } else if (figure == "losses") {
      svg = render_losses_svg(read_losses_csv(run_dir + "/losses.csv"), "Training losses");
    } else if (figure == "gradnorms") {
      svg = render_gradnorms_svg(read_gradnorms_csv(run_dir + "/gradnorms.csv"), "Per-node gradient norms");
    } else {
      std::fprintf(stderr, "unknown figure '%s' (choices: spectra losses gradnorms)\n", figure.c_str());
      return kExitUsage;
    }
    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    if (!f) {
      std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
      return kExitUsage;
    }
    f << svg;
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LDVD lab: video-GAN discriminators and loss-landscape analysis"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path, out_dir;
  uint64_t seed_val = 0;
  bool seed_given = false;
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed_val, "override [train] seed")->each([&](const std::string&) { seed_given = true; });

  auto* params = app.add_subcommand("params", "parameter table for a preset or netspec file");
  std::string preset_name, baseline;
  params->add_option("name", preset_name, "preset name or netspec path")->required();
  params->add_option("--baseline", baseline, "preset to compute reduction against");

  auto* plot = app.add_subcommand("plot", "render a figure from run artifacts");
  std::string run_dir, figure = "spectra", plot_out;
  plot->add_option("--run", run_dir, "run directory")->required();
  plot->add_option("--figure", figure, "spectra | losses | gradnorms");
  plot->add_option("--out", plot_out, "output SVG path");

  auto* verify = app.add_subcommand("verify", "run the oracle and conformance suite");
  std::string fault;
  verify->add_option("--inject-fault", fault, "perturb a derivative rule (harness self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  if (run->parsed()) return cmd_run(config_path, out_dir, seed_given ? std::optional<uint64_t>(seed_val) : std::nullopt);
  if (params->parsed()) return cmd_params(preset_name, baseline);
  if (plot->parsed()) return cmd_plot(run_dir, figure, plot_out);
  if (verify->parsed()) return run_verify(fault);
  return kExitUsage;
}
