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

#include <optional>
#include <string>
#include <vector>

#include "ldvd/config.hpp"
#include "ldvd/curvature.hpp"
#include "ldvd/gan.hpp"

namespace ldvd {

/// One completed training run on disk:
///   config.cfg, losses.csv, spectra.csv, gradnorms.csv, [metrics.csv],
///   checkpoints/{generator,discriminator}.ldps
struct RunResult {
  std::string dir;
  std::string run_id;
  std::string variant;
  bool halted = false;
  std::string halt_reason;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
};

/// Executes the experiment a config describes: one run per discriminator
/// variant (comma-separated presets share a bit-identical generator and
/// data stream). A single variant writes into out_dir directly, multiple
/// variants into out_dir/<variant>/.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                std::optional<uint64_t> seed_override = std::nullopt);

std::string run_id_for(const ExperimentConfig& cfg, const std::string& variant);

// CSV row forms used by the plot command.
struct SpectraCsvRow {
  std::string run_id;
  int64_t iteration;
  int64_t eig_rank;
  double eig_value;
  double lambda_plus;
  double lambda_minus;
};
struct LossCsvRow {
  int64_t iteration;
  double loss_d;
  double loss_g;
};
struct GradNormCsvRow {
  std::string run_id;
  int64_t iteration;
  int64_t node_id;
  std::string op_kind;
  std::string batch_kind;
  double adjoint_norm;
};

void write_losses_csv(const std::string& path, const std::vector<LossPoint>& rows);
void write_spectra_csv(const std::string& path, const std::string& run_id, const std::vector<SpectrumRecord>& recs);
void write_gradnorms_csv(const std::string& path, const std::string& run_id,
                         const std::vector<std::pair<int64_t, std::vector<GradNormRecord>>>& recs);

std::vector<LossCsvRow> read_losses_csv(const std::string& path);
std::vector<SpectraCsvRow> read_spectra_csv(const std::string& path);
std::vector<GradNormCsvRow> read_gradnorms_csv(const std::string& path);

/// 17-significant-digit formatting used for every real in the CSV files.
std::string csv_real(double v);

}  // namespace ldvd
