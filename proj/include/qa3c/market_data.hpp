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
 * Daily price ingestion, return computation, per-stock window features and
 * a synthetic regime-switching market generator.
 */
#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qa3c::market {

using Date = std::chrono::year_month_day;

/// Calendar month, the episode granularity.
struct YearMonth {
    int year = 0;
    unsigned month = 1;

    auto operator<=>(const YearMonth &) const = default;
    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] static YearMonth of(const Date &d);
    /// Accepts `YYYY-MM`.
    [[nodiscard]] static YearMonth parse(std::string_view text);
};

/// Parses an ISO-8601 `YYYY-MM-DD` date; throws std::invalid_argument.
[[nodiscard]] Date parse_date(std::string_view text);
[[nodiscard]] std::string format_date(const Date &d);

/// Aligned date x ticker closes. Missing cells are NaN; present cells > 0.
struct PricePanel {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Eigen::MatrixXd closes; // rows = dates, cols = tickers

    [[nodiscard]] std::size_t n_dates() const { return dates.size(); }
    [[nodiscard]] std::size_t n_tickers() const { return tickers.size(); }
};

/// returns(t, i) = closes(t+1, i) / closes(t, i) - 1, NaN where either close
/// is missing. `dates[t]` is the date the return is realized.
struct ReturnPanel {
    Date base_date{}; ///< price date preceding dates[0]
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Eigen::MatrixXd returns;

    [[nodiscard]] std::size_t n_dates() const { return dates.size(); }
    [[nodiscard]] std::size_t n_tickers() const { return tickers.size(); }
};

struct StockFeatures {
    double m5 = 0.0;  ///< compounded 5-day return
    double m20 = 0.0; ///< compounded 20-day return
    double v20 = 0.0; ///< sample std of the last 20 daily returns
};

/// N' x 3 matrix of [m5, m20, v20] rows for one decision window. `tickers`
/// holds the panel column of each row.
struct FeatureMatrix {
    Eigen::MatrixXd values;
    std::vector<std::size_t> tickers;

    [[nodiscard]] std::size_t rows() const { return tickers.size(); }
};

/// Benchmark return series aligned with a ReturnPanel.
struct BenchmarkSeries {
    std::vector<Date> dates;
    Eigen::VectorXd returns;
};

inline constexpr std::size_t kShortWindow = 5;
inline constexpr std::size_t kLongWindow = 20;

[[nodiscard]] PricePanel load_prices(const std::filesystem::path &path);
/// Parses `date,ticker,close` CSV text; `source` names the input in errors.
[[nodiscard]] PricePanel parse_prices(std::string_view text,
                                      const std::string &source = "<input>");
void write_prices(const std::filesystem::path &path, const PricePanel &panel);

[[nodiscard]] ReturnPanel compute_returns(const PricePanel &prices);

/// Features of one stock over the 20 return rows ending at `end_index`
/// (inclusive).
[[nodiscard]] StockFeatures window_features(const ReturnPanel &returns,
                                            std::size_t end_index,
                                            std::size_t ticker);

/// Compounded return of `count` consecutive values ending at `end_index`.
[[nodiscard]] double compound(const Eigen::Ref<const Eigen::VectorXd> &r,
                              std::size_t end_index, std::size_t count);

/// Feature rows for every ticker with full coverage over the trailing
/// `coverage_window` return rows ending at `end_index`.
[[nodiscard]] FeatureMatrix feature_matrix(const ReturnPanel &returns,
                                           std::size_t end_index,
                                           std::size_t coverage_window =
                                               kLongWindow);

/// Column-wise z-standardization (population std; zero-variance columns are
/// only centred).
[[nodiscard]] Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd &x);

/// Equal-weight cross-sectional mean of the available returns on each date.
[[nodiscard]] BenchmarkSeries equal_weight_benchmark(const ReturnPanel &returns);

/// Loads a `date,close` index file and aligns its returns to `panel`.
[[nodiscard]] BenchmarkSeries load_benchmark(const std::filesystem::path &path,
                                             const ReturnPanel &panel);
[[nodiscard]] BenchmarkSeries parse_benchmark(std::string_view text,
                                              const ReturnPanel &panel,
                                              const std::string &source =
                                                  "<input>");

struct SyntheticMarketConfig {
    std::size_t n_stocks = 40;
    std::size_t n_days = 21 * 50;
    std::size_t n_regimes = 2;
    std::size_t regime_length = 21; ///< trading days per regime
    /// group_drifts[regime][group], daily; group count = row width.
    std::vector<std::vector<double>> group_drifts = {
        {0.012, 0.004, -0.002, -0.010},
        {-0.004, 0.006, 0.002, -0.006}};
    std::vector<double> group_vols = {0.004, 0.008, 0.012, 0.016};
    std::uint64_t seed = 7;
    /// Synthetic calendar: this many trading days placed on days 1..n of
    /// every calendar month.
    std::size_t trading_days_per_month = 21;
    YearMonth start_month{2021, 7};

    [[nodiscard]] std::size_t n_groups() const {
        return group_vols.size();
    }
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Geometric random walk, 100 at t=0:
/// p(t) = p(t-1) * (1 + drift) * exp(vol * z - vol^2 / 2).
/// Stock i belongs to group i / (n_stocks / n_groups).
[[nodiscard]] PricePanel
generate_synthetic_market(const SyntheticMarketConfig &cfg);

} // namespace qa3c::market
