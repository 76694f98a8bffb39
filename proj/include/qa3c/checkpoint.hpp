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
/// @file Policy checkpoints: named real arrays plus a version tag and the
/// network's structural hash, stored as JSON (round-trip exact for doubles).
#pragma once

#include <filesystem>
#include <string>

#include "qa3c/policy.hpp"

namespace qa3c::policy {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    PolicyParameters params;
    std::string config_hash;
    int version = kCheckpointVersion;
};

[[nodiscard]] std::string serialize_checkpoint(const PolicyParameters &params);
[[nodiscard]] Checkpoint deserialize_checkpoint(const std::string &text,
                                                const std::string &source = "<input>");

void save_checkpoint(const std::filesystem::path &path,
                     const PolicyParameters &params);
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace qa3c::policy
