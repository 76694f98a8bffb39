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
/// @file Subcommand implementations shared by the CLI and the test suites.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qa3c/backtest.hpp"
#include "qa3c/config.hpp"

namespace qa3c::app {

struct MarketInputs {
    market::PricePanel prices;
    std::optional<market::BenchmarkSeries> benchmark;
};

/// Loads the configured price file, or generates the synthetic market.
[[nodiscard]] MarketInputs load_market(const EngineConfig &cfg);

[[nodiscard]] std::vector<env::MonthEpisode>
rolling_episodes(const EngineConfig &cfg, const MarketInputs &market);

struct TrainOutputs {
    std::filesystem::path checkpoint;
    std::filesystem::path trace;
    std::optional<std::filesystem::path> ablation_checkpoint;
    std::size_t train_months = 0;
    train::TrainTrace trace_data;
};

/// Writes checkpoint.json, trace.csv, episodes_train.jsonl,
/// parameter_match.json and resolved_config.json (plus checkpoint_mlp.json
/// and trace_mlp.csv when the ablation is enabled).
TrainOutputs cmd_train(const EngineConfig &cfg, const std::filesystem::path &out);

struct BacktestOutputs {
    std::vector<backtest::StrategyRun> runs;
    backtest::ReportCheck check;
};

/// Runs the enabled strategies over the validation range and writes the
/// report files. The checkpoint's structural hash must match `cfg`.
BacktestOutputs cmd_backtest(const EngineConfig &cfg,
                             const std::filesystem::path &checkpoint,
                             const std::optional<std::filesystem::path> &ablation,
                             const std::filesystem::path &out);

/// Writes prices.csv for the configured synthetic market.
std::filesystem::path cmd_synth(const EngineConfig &cfg,
                                const std::filesystem::path &out);

void write_resolved_config(const EngineConfig &cfg,
                           const std::filesystem::path &out);

} // namespace qa3c::app
