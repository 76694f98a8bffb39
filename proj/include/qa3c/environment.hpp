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
 * Monthly single-decision episodes: the trailing window's market structure
 * is the state, the action picks one cluster, and the reward comes from the
 * clusters' realized returns over the following calendar month.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qa3c/clustering.hpp"
#include "qa3c/market_data.hpp"

namespace qa3c::env {

enum class ClusteringMode { Rolling, Static };
enum class RewardScheme { RelativeOptimality, ZScore };

[[nodiscard]] std::string_view to_string(ClusteringMode m);
[[nodiscard]] ClusteringMode parse_clustering_mode(std::string_view text);
[[nodiscard]] std::string_view to_string(RewardScheme s);
[[nodiscard]] RewardScheme parse_reward_scheme(std::string_view text);

struct RewardConfig {
    RewardScheme scheme = RewardScheme::RelativeOptimality;
    double epsilon = 1e-8;

    void validate() const;
};

struct EpisodeConfig {
    std::size_t k = 5;
    std::size_t window = 20; ///< trailing return rows per decision (L)
    ClusteringMode mode = ClusteringMode::Rolling;
    bool standardize = false;
    std::uint64_t seed = 0; ///< month m clusters with seed + m
    cluster::KMeansOptions kmeans;

    void validate() const;
};

struct MonthEpisode {
    market::YearMonth month;
    std::size_t month_index = 0; ///< position among the panel's months
    cluster::AgentState state;
    /// Tickers per canonical cluster id.
    std::vector<std::vector<std::string>> cluster_members;
    /// Equal-weight mean of members' compounded returns over the month.
    Eigen::VectorXd realized_returns;
    double benchmark_return = 0.0;

    // Diagnostics; not part of the JSON-lines export.
    std::vector<std::string> universe;
    std::vector<int> labels;   ///< canonical label per universe ticker
    Eigen::MatrixXd centroids; ///< canonical order, clustering space

    [[nodiscard]] std::size_t k() const {
        return static_cast<std::size_t>(realized_returns.size());
    }
    [[nodiscard]] std::size_t best_action() const;
};

/// One episode per calendar month that has `window` return rows before its
/// first trading day. Months whose clustering is infeasible are skipped and
/// logged. Without `benchmark`, the equal-weight universe mean is used.
[[nodiscard]] std::vector<MonthEpisode>
build_episodes(const market::PricePanel &prices,
               const std::optional<market::BenchmarkSeries> &benchmark,
               const EpisodeConfig &cfg);

/// Episodes whose month lies in [first, last].
[[nodiscard]] std::vector<MonthEpisode>
select_months(const std::vector<MonthEpisode> &episodes,
              const market::YearMonth &first, const market::YearMonth &last);

[[nodiscard]] double reward_relative_optimality(std::size_t action,
                                                std::span<const double> realized,
                                                double epsilon);
[[nodiscard]] double reward_z_score(std::size_t action,
                                    std::span<const double> realized,
                                    double epsilon);
[[nodiscard]] double reward(std::size_t action, const Eigen::VectorXd &realized,
                            const RewardConfig &cfg);

struct StepResult {
    double reward = 0.0;
    double chosen_return = 0.0;
    double best_return = 0.0;
    std::vector<std::string> chosen_tickers;
};

/// Throws ContractViolation when action >= K.
[[nodiscard]] StepResult step(const MonthEpisode &episode, std::size_t action,
                              const RewardConfig &cfg);

void write_episodes_jsonl(std::ostream &out,
                          const std::vector<MonthEpisode> &episodes);
void write_episodes_jsonl(const std::filesystem::path &path,
                          const std::vector<MonthEpisode> &episodes);
[[nodiscard]] std::vector<MonthEpisode>
read_episodes_jsonl(const std::filesystem::path &path);

} // namespace qa3c::env
