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

#include <filesystem>

#include "ldvd/config.hpp"

using namespace ldvd;

TEST_CASE("defaults materialize and the canonical dump is a fixed point") {
  ExperimentConfig defaults;
  const std::string canon = dump_config(defaults);
  // every section present
  for (const char* sec : {"[data]", "[generator]", "[discriminator]", "[train]", "[lipschitz]", "[analysis]",
                          "[metrics]"}) {
    CHECK(canon.find(sec) != std::string::npos);
  }
  ExperimentConfig parsed = parse_config(canon);
  const std::string once = dump_config(parsed);
  CHECK(once == canon);
  ExperimentConfig reparsed = parse_config(once);
  CHECK(dump_config(reparsed) == once);  // dump(parse(dump(parse(x)))) == dump(parse(x))
}

TEST_CASE("sparse configs inherit defaults") {
  const std::string text = "[train]\niterations = 7\nseed = 42\n";
  ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.iterations == 7);
  CHECK(cfg.seed == 42);
  CHECK(cfg.batch_size == 8);          // default
  CHECK(cfg.lip_kind == "none");       // default
  CHECK(cfg.dis_preset == "tgan-toy-d");
}

TEST_CASE("unknown keys are rejected with key and line") {
  const std::string text = "[lipschitz]\nkind = svc\n\n[train]\nlipschtz = 1\n";
  try {
    parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 5);
    CHECK(e.key() == "train.lipschtz");
    CHECK(std::string(e.what()).find("lipschtz") != std::string::npos);
  }
}

TEST_CASE("unknown sections and malformed lines are rejected") {
  CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[train]\niterations\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("iterations = 5\n"), ConfigError);  // key before any section
}

TEST_CASE("typed values are validated") {
  CHECK_THROWS_AS(parse_config("[train]\niterations = soon\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[lipschitz]\nclip_bn = yes\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[train]\nloss = wasserstein\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[lipschitz]\nkind = gp\n"), ConfigError);
  ExperimentConfig ok = parse_config("[lipschitz]\nkind = svc\ncap = 0.5\n");
  CHECK(ok.lip_kind == "svc");
  CHECK(ok.lip_cap == 0.5);
}

TEST_CASE("real values survive the canonical dump losslessly") {
  ExperimentConfig cfg;
  cfg.lr_d = 0.1 + 0.2;  // not exactly representable in decimal
  cfg.velocity_max = 1.0 / 3.0;
  ExperimentConfig round = parse_config(dump_config(cfg));
  CHECK(round.lr_d == cfg.lr_d);
  CHECK(round.velocity_max == cfg.velocity_max);
}

TEST_CASE("bundled experiment configs parse cleanly") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(LDVD_SOURCE_DIR) / "configs";
  REQUIRE(fs::exists(dir));
  size_t seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    ExperimentConfig cfg = load_config_file(entry.path().string());
    CHECK(dump_config(parse_config(dump_config(cfg))) == dump_config(cfg));
    ++seen;
  }
  CHECK(seen >= 3);
}
