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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ldvd/artifacts.hpp"
#include "ldvd/config.hpp"
#include "ldvd/figures.hpp"
#include "ldvd/presets.hpp"

namespace fs = std::filesystem;
using namespace ldvd;

namespace {

const std::string kTool = LDVD_TOOL_PATH;
const std::string kTmp = LDVD_TEST_TMP;

struct CmdResult {
  int exit_code;
  std::string output;
};

CmdResult run_cmd(const std::string& args) {
  const std::string out_file = kTmp + "/cmd_out.txt";
  const std::string cmd = kTool + " " + args + " > " + out_file + " 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream f(out_file);
  std::stringstream ss;
  ss << f.rdbuf();
  return {WEXITSTATUS(rc), ss.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
}

const char* kSmokeConfig = R"(
[data]
frames = 8
clip_len = 8

[train]
iterations = 4
batch_size = 2
seed = 11

[analysis]
spectrum_every = 2
k = 3
max_iters = 16
gradnorm_every = 2
)";

}  // namespace

TEST_CASE("cmd_run produces the full artifact set and is byte-deterministic") {
  const std::string cfg_path = kTmp + "/smoke.cfg";
  write_file(cfg_path, kSmokeConfig);
  const std::string out1 = kTmp + "/smoke-run1";
  const std::string out2 = kTmp + "/smoke-run2";
  fs::remove_all(out1);
  fs::remove_all(out2);

  auto r1 = run_cmd("run --config " + cfg_path + " --out " + out1);
  CAPTURE(r1.output);
  REQUIRE(r1.exit_code == 0);
  for (const char* name : {"config.cfg", "losses.csv", "spectra.csv", "gradnorms.csv",
                           "checkpoints/generator.ldps", "checkpoints/discriminator.ldps"}) {
    CAPTURE(name);
    CHECK(fs::exists(out1 + "/" + name));
  }

  auto r2 = run_cmd("run --config " + cfg_path + " --out " + out2);
  REQUIRE(r2.exit_code == 0);
  for (const char* name : {"config.cfg", "losses.csv", "spectra.csv", "gradnorms.csv"}) {
    CAPTURE(name);
    CHECK(slurp(out1 + "/" + name) == slurp(out2 + "/" + name));
  }

  // repeat with an explicit --seed equal to the config seed: identical too
  const std::string out3 = kTmp + "/smoke-run3";
  fs::remove_all(out3);
  auto r3 = run_cmd("run --config " + cfg_path + " --out " + out3 + " --seed 11");
  REQUIRE(r3.exit_code == 0);
  CHECK(slurp(out1 + "/losses.csv") == slurp(out3 + "/losses.csv"));
}

TEST_CASE("cmd_run rejects a bad key naming it, with exit code 2") {
  const std::string cfg_path = kTmp + "/bad.cfg";
  write_file(cfg_path, "[lipschitz]\nkind = svc\n\n[train]\nlipschtz.kind = svc\n");
  auto r = run_cmd("run --config " + cfg_path + " --out " + kTmp + "/never");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("lipschtz.kind") != std::string::npos);
  CHECK(r.output.find("line 5") != std::string::npos);
}

TEST_CASE("cmd_params prints totals and reductions; unknown presets exit 2 with the list") {
  auto r = run_cmd("params tgan-d");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("11032385") != std::string::npos);
  CHECK(r.output.find("11.0M") != std::string::npos);

  auto rf = run_cmd("params tgan-f-c0c3");
  CHECK(rf.exit_code == 0);
  CHECK(rf.output.find("4.2M") != std::string::npos);

  auto rv = run_cmd("params mocogan-video-d");
  CHECK(rv.exit_code == 0);
  CHECK(rv.output.find("2.7M") != std::string::npos);

  auto rr = run_cmd("params tgan-tsm-c0c2 --baseline tgan-d");
  CHECK(rr.exit_code == 0);
  CHECK(rr.output.find("74.93") != std::string::npos);

  auto bad = run_cmd("params not-a-preset");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("tgan-d") != std::string::npos);  // lists the presets
}

TEST_CASE("cmd_plot renders deterministic SVG with the expected structure") {
  const std::string run_dir = kTmp + "/smoke-run1";
  REQUIRE(fs::exists(run_dir + "/spectra.csv"));

  auto p1 = run_cmd("plot --run " + run_dir + " --figure spectra --out " + kTmp + "/sp1.svg");
  REQUIRE(p1.exit_code == 0);
  auto p2 = run_cmd("plot --run " + run_dir + " --figure spectra --out " + kTmp + "/sp2.svg");
  REQUIRE(p2.exit_code == 0);
  const std::string svg = slurp(kTmp + "/sp1.svg");
  CHECK(svg == slurp(kTmp + "/sp2.svg"));  // byte identical

  // k = 3 -> 6 recorded ranks (top-3 + bottom-3) -> 6 polylines + both
  // lambda markers
  size_t polylines = 0;
  for (size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) {
    ++polylines;
  }
  CHECK(polylines == 6);
  CHECK(svg.find("lambda+") != std::string::npos);
  CHECK(svg.find("lambda-") != std::string::npos);

  CHECK(run_cmd("plot --run " + run_dir + " --figure losses --out " + kTmp + "/lo.svg").exit_code == 0);
  CHECK(run_cmd("plot --run " + run_dir + " --figure gradnorms --out " + kTmp + "/gn.svg").exit_code == 0);

  // missing artifacts: exit 2
  auto missing = run_cmd("plot --run " + kTmp + "/no-such-dir --figure spectra");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("plot of an iterations=0 run does not crash") {
  const std::string cfg_path = kTmp + "/empty.cfg";
  write_file(cfg_path, "[train]\niterations = 0\nbatch_size = 2\n\n[data]\nframes = 8\nclip_len = 8\n\n[analysis]\nspectrum_every = 5\nk = 2\nmax_iters = 10\n");
  const std::string out = kTmp + "/empty-run";
  fs::remove_all(out);
  auto r = run_cmd("run --config " + cfg_path + " --out " + out);
  REQUIRE(r.exit_code == 0);
  auto p = run_cmd("plot --run " + out + " --figure spectra --out " + out + "/sp.svg");
  CHECK(p.exit_code == 0);
  CHECK(slurp(out + "/sp.svg").find("<svg") != std::string::npos);
  auto pl = run_cmd("plot --run " + out + " --figure losses --out " + out + "/lo.svg");
  CHECK(pl.exit_code == 0);
}

TEST_CASE("cmd_verify passes on a fresh build and fails under fault injection") {
  auto ok = run_cmd("verify");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("all checks passed") != std::string::npos);

  auto bad = run_cmd("verify --inject-fault conv-kernel-grad");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("finite-difference") != std::string::npos);
  CHECK(bad.output.find("FAIL") != std::string::npos);
}

TEST_CASE("multi-variant runs share generator and data streams") {
  const std::string cfg_path = kTmp + "/compare.cfg";
  write_file(cfg_path, R"(
[data]
frames = 8
clip_len = 8

[discriminator]
preset = tgan-toy-d,tgan-toy-d-f

[train]
iterations = 2
batch_size = 2
seed = 21
)");
  const std::string out = kTmp + "/compare-run";
  fs::remove_all(out);
  auto r = run_cmd("run --config " + cfg_path + " --out " + out);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(out + "/tgan-toy-d/losses.csv"));
  CHECK(fs::exists(out + "/tgan-toy-d-f/losses.csv"));
  // identical generator checkpoints would require identical init; compare
  // the generator parameter files across variants
  CHECK(slurp(out + "/tgan-toy-d/checkpoints/generator.ldps") !=
        slurp(out + "/tgan-toy-d-f/checkpoints/generator.ldps"));
  // (trained against different discriminators the final G weights differ;
  // match is on the data/init streams, covered in test_gan.cpp)
}

TEST_CASE("ldvd-dir ingestion trains from saved containers") {
  const std::string dir = kTmp + "/clips";
  fs::create_directories(dir);
  SynthSceneConfig scene;
  scene.canvas = 16;
  for (int i = 0; i < 4; ++i) {
    scene.seed = static_cast<uint64_t>(100 + i);
    save_video(dir + "/clip" + std::to_string(i) + ".ldvd", synth_video(scene, 8));
  }
  const std::string cfg_path = kTmp + "/dir.cfg";
  write_file(cfg_path, "[data]\nkind = ldvd-dir\npath = " + dir +
                           "\nframes = 8\nclip_len = 8\n\n[train]\niterations = 2\nbatch_size = 2\n");
  const std::string out = kTmp + "/dir-run";
  fs::remove_all(out);
  auto r = run_cmd("run --config " + cfg_path + " --out " + out);
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out + "/losses.csv"));
}

TEST_CASE("cmd_params accepts a netspec file and matches the preset totals") {
  const std::string spec_path = kTmp + "/tganf.netspec";
  {
    std::ofstream f(spec_path, std::ios::trunc);
    f << dump_netspec(get_preset("tgan-f-c0c1").parts[0]);
  }
  auto r = run_cmd("params " + spec_path);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("2847745") != std::string::npos);
  CHECK(r.output.find("2.8M") != std::string::npos);
}
