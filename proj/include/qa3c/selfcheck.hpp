// Copyright 2026 The QA3C Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/// @file Built-in invariant suites run by `qa3c selfcheck`.
#pragma once

#include <string>
#include <vector>

namespace qa3c::selfcheck {

struct SuiteResult {
    std::string name;
    bool passed = false;
    double max_error = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

/// Runs every suite on fixed fixtures. Never throws for a failed check;
/// exceptions inside a suite are reported as a failure of that suite.
[[nodiscard]] std::vector<SuiteResult> run_all();

/// One line per suite: `PASS|FAIL  <name>  max_error=<e> tol=<t>  <detail>`.
[[nodiscard]] std::string format_report(const std::vector<SuiteResult> &results);

[[nodiscard]] bool all_passed(const std::vector<SuiteResult> &results);

} // namespace qa3c::selfcheck
