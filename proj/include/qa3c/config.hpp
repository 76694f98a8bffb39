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
/**
 * @file
 * Engine configuration: a single JSON key tree with documented defaults,
 * dotted-path overrides (`--set train.epochs=200`) and validation that names
 * the offending key.
 */
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qa3c/environment.hpp"
#include "qa3c/market_data.hpp"
#include "qa3c/policy.hpp"
#include "qa3c/trainer.hpp"

namespace qa3c::app {

struct MonthRange {
    market::YearMonth first;
    market::YearMonth last;
};

struct EngineConfig {
    std::string prices_path;    ///< empty: generate the synthetic market
    std::string benchmark_path; ///< empty: equal-weight universe mean
    MonthRange train_range{{2021, 8}, {2024, 8}};
    MonthRange validation_range{{2024, 12}, {2025, 8}};
    env::EpisodeConfig episodes;
    policy::NetworkShape network;
    double tau = policy::kDefaultTau;
    env::RewardConfig reward;
    train::TrainConfig train;
    bool train_ablation = true;
    market::SyntheticMarketConfig synthetic;
    std::vector<std::string> strategies;
    std::string static_selector = "policy";
    std::string out_dir = "out";

    [[nodiscard]] policy::NetworkShape shape(policy::Bottleneck b) const;
    [[nodiscard]] std::uint64_t init_seed(policy::Bottleneck b) const;
};

[[nodiscard]] nlohmann::json default_config_json();

/// Reads a JSON config file; missing keys take defaults, unknown keys are
/// rejected.
[[nodiscard]] nlohmann::json load_config_json(const std::filesystem::path &path);

/// Applies `dotted.key=value`; the value is parsed as JSON when possible,
/// otherwise taken as a string.
void apply_override(nlohmann::json &doc, std::string_view assignment);

/// Merges `user` over the defaults and validates. Throws ConfigError.
[[nodiscard]] EngineConfig parse_config(const nlohmann::json &user);
[[nodiscard]] nlohmann::json to_json(const EngineConfig &cfg);

} // namespace qa3c::app
