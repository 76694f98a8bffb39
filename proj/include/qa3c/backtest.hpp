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
 * Out-of-sample monthly rebalancing: strategy runs, baselines, per-month
 * summaries and report files.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qa3c/environment.hpp"
#include "qa3c/policy.hpp"
#include "qa3c/trainer.hpp"

namespace qa3c::backtest {

inline constexpr const char *kQa3c = "qa3c";
inline constexpr const char *kMlpAblation = "mlp_ablation";
inline constexpr const char *kStaticClustering = "static_clustering";
inline constexpr const char *kGreedyRolling = "greedy_rolling";
inline constexpr const char *kOracle = "oracle";

struct StrategyRun {
    std::string name;
    std::string episode_set = "rolling"; ///< which episode list it ran on
    std::vector<market::YearMonth> months;
    std::vector<std::size_t> chosen;
    std::vector<std::vector<std::string>> chosen_tickers;
    std::vector<double> monthly_returns;
    /// Cumulative returns after each month; one entry per month.
    std::vector<double> cumulative;
    std::vector<double> benchmark;
    std::vector<double> active;
    double optimal_pick_rate = 0.0;

    [[nodiscard]] double final_cumulative() const {
        return cumulative.empty() ? 0.0 : cumulative.back();
    }
    [[nodiscard]] double mean_monthly_return() const;
};

/// Picks a cluster for episode `index` of the run.
using Selector =
    std::function<std::size_t(const env::MonthEpisode &, std::size_t index)>;

[[nodiscard]] Selector policy_selector(policy::PolicyParameters params,
                                       train::EvalMode mode = train::EvalMode::Greedy,
                                       std::uint64_t seed = 0);
[[nodiscard]] Selector oracle_selector();
[[nodiscard]] Selector fixed_selector(std::size_t action);
[[nodiscard]] Selector random_selector(std::uint64_t seed);

[[nodiscard]] StrategyRun run_strategy(const std::string &name,
                                       const std::vector<env::MonthEpisode> &episodes,
                                       const Selector &select);

/// Month 1 takes canonical cluster 0; later months take the argmax of the
/// previous month's realized cluster returns. A single-month input throws
/// unless `allow_single_month`.
[[nodiscard]] StrategyRun
baseline_greedy_rolling(const std::vector<env::MonthEpisode> &episodes,
                        bool allow_single_month = false);

/// Static-clustering episodes over [first, last]: K-Means fitted once on the
/// panel's first decision window and reused for every month.
[[nodiscard]] std::vector<env::MonthEpisode>
static_clustering_episodes(const market::PricePanel &prices,
                           const std::optional<market::BenchmarkSeries> &benchmark,
                           env::EpisodeConfig cfg, const market::YearMonth &first,
                           const market::YearMonth &last);

enum class StaticSelector { Policy, Greedy };

[[nodiscard]] StrategyRun
baseline_static_clustering(const market::PricePanel &prices,
                           const std::optional<market::BenchmarkSeries> &benchmark,
                           const env::EpisodeConfig &cfg,
                           const market::YearMonth &first,
                           const market::YearMonth &last, StaticSelector how,
                           const policy::PolicyParameters *params = nullptr);

struct MonthlyReport {
    market::YearMonth month;
    std::size_t n_stocks = 0;
    std::vector<std::string> tickers;
    Eigen::VectorXd cluster_returns;
    std::size_t rank = 1; ///< 1 = best realized cluster
    std::size_t chosen_cluster = 0;
};

[[nodiscard]] std::vector<MonthlyReport>
summarize_months(const StrategyRun &run,
                 const std::vector<env::MonthEpisode> &episodes);

/// Writes, per run: cumulative_<name>.csv, monthly_summary_<name>.csv and
/// cluster_dist_<name>.csv; for runs[0] also monthly_summary.csv and
/// cluster_dist.csv; plus summary.json over all runs. `reports[i]` belongs
/// to `runs[i]`.
void emit_report(const std::vector<StrategyRun> &runs,
                 const std::vector<std::vector<MonthlyReport>> &reports,
                 const std::filesystem::path &out_dir);

struct ReportCheck {
    bool compounding_ok = true;
    bool dominance_ok = true;
    bool consistency_ok = true; ///< summary.json agrees with the CSVs
    double max_compounding_error = 0.0;
    std::vector<std::string> failures;

    [[nodiscard]] bool ok() const {
        return compounding_ok && dominance_ok && consistency_ok;
    }
};

/// Re-derives every strategy's monthly returns from its cluster_dist file
/// and checks the compounding identity (1e-10), summary agreement, and
/// oracle dominance among strategies on the same episode set.
[[nodiscard]] ReportCheck check_report_files(const std::filesystem::path &dir);

} // namespace qa3c::backtest
