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

/// Runs the oracle suite and the parameter-count conformance table.
/// Returns 0 when every check passes; otherwise prints the failing check
/// and returns 1. inject_fault perturbs a named derivative rule first, for
/// harness self-tests.
int run_verify(const std::string& inject_fault);
