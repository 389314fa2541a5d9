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
#include <vector>

#include "ldvd/netspec.hpp"

namespace ldvd {

/// Named architecture. The dual discriminator carries two parts; all other
/// presets carry one.
struct Preset {
  std::string name;
  std::string summary;
  std::vector<NetSpec> parts;
};

const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
Preset get_preset(const std::string& name);  // unknown name -> throws, message lists presets
int64_t preset_param_count(const Preset& p);

/// Published parameter counts, in units of 0.1M after rounding.
struct CountConformanceRow {
  std::string preset;
  double published_millions;
};
const std::vector<CountConformanceRow>& published_count_table();

/// Published parameter-reduction percentages and the preset pairs they
/// compare.
struct ReductionConformanceRow {
  std::string label;
  std::string base;
  std::string variant;
  double published_percent;
};
const std::vector<ReductionConformanceRow>& published_reduction_table();

}  // namespace ldvd
