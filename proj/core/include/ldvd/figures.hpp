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

#include "ldvd/artifacts.hpp"

namespace ldvd {

/// Deterministic SVG renderings (fixed canvas, no timestamps), one
/// polyline per eigenvalue rank with dashed lambda+/lambda- markers.
std::string render_spectra_svg(const std::vector<SpectraCsvRow>& rows, const std::string& title);
std::string render_losses_svg(const std::vector<LossCsvRow>& rows, const std::string& title);
std::string render_gradnorms_svg(const std::vector<GradNormCsvRow>& rows, const std::string& title);

}  // namespace ldvd
