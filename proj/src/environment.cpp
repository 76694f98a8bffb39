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
#include "qa3c/environment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "qa3c/errors.hpp"

namespace qa3c::env {

namespace {

struct MonthSpan {
    market::YearMonth month;
    std::size_t index = 0;
    std::size_t first_row = 0; // first return row inside the month
    std::size_t last_row = 0;
};

std::vector<MonthSpan> month_spans(const market::ReturnPanel &r) {
    std::vector<MonthSpan> spans;
    for (std::size_t t = 0; t < r.n_dates(); ++t) {
        const auto ym = market::YearMonth::of(r.dates[t]);
        if (spans.empty() || spans.back().month != ym)
            spans.push_back({ym, spans.size(), t, t});
        else
            spans.back().last_row = t;
    }
    return spans;
}

/// Column transform applied before K-Means.
struct ClusterSpace {
    bool enabled = false;
    Eigen::RowVectorXd mean, scale;

    static ClusterSpace fit(const Eigen::MatrixXd &x, bool enabled) {
        ClusterSpace s;
        s.enabled = enabled;
        if (!enabled)
            return s;
        s.mean = x.colwise().mean();
        s.scale.resize(x.cols());
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double sd = std::sqrt((x.col(c).array() - s.mean(c)).square().mean());
            s.scale(c) = sd > 0.0 ? sd : 1.0;
        }
        return s;
    }
    [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd &x) const {
        if (!enabled)
            return x;
        return (x.rowwise() - mean).array().rowwise() / scale.array();
    }
};

} // namespace

std::string_view to_string(ClusteringMode m) {
    return m == ClusteringMode::Rolling ? "rolling" : "static";
}

ClusteringMode parse_clustering_mode(std::string_view text) {
    if (text == "rolling")
        return ClusteringMode::Rolling;
    if (text == "static")
        return ClusteringMode::Static;
    throw ConfigError("clustering.mode", "expected 'rolling' or 'static'");
}

std::string_view to_string(RewardScheme s) {
    return s == RewardScheme::RelativeOptimality ? "relative_optimality"
                                                 : "z_score";
}

RewardScheme parse_reward_scheme(std::string_view text) {
    if (text == "relative_optimality")
        return RewardScheme::RelativeOptimality;
    if (text == "z_score")
        return RewardScheme::ZScore;
    throw ConfigError("reward.scheme",
                      "expected 'relative_optimality' or 'z_score'");
}

void RewardConfig::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw ConfigError("reward.epsilon", "must be positive");
}

void EpisodeConfig::validate() const {
    if (k < 2)
        throw ConfigError("K", "cluster count must be at least 2");
    if (window < market::kLongWindow)
        throw ConfigError("L", "window must be at least 20 trading days");
    if (kmeans.max_iter == 0)
        throw ConfigError("clustering.max_iter", "must be at least 1");
    if (!(kmeans.tol >= 0.0))
        throw ConfigError("clustering.tol", "must be non-negative");
}

std::size_t MonthEpisode::best_action() const {
    Eigen::Index best = 0;
    realized_returns.maxCoeff(&best);
    return static_cast<std::size_t>(best);
}

std::vector<MonthEpisode>
build_episodes(const market::PricePanel &prices,
               const std::optional<market::BenchmarkSeries> &benchmark,
               const EpisodeConfig &cfg) {
    cfg.validate();
    const auto returns = market::compute_returns(prices);
    const auto bench = benchmark ? *benchmark : market::equal_weight_benchmark(returns);
    if (bench.returns.size() != returns.returns.rows())
        throw DataValidationError("benchmark length does not match the price panel");

    std::vector<MonthSpan> months;
    for (const auto &m : month_spans(returns))
        if (m.first_row >= cfg.window)
            months.push_back(m);
    if (months.empty())
        throw InsufficientDataError(fmt::format(
            "no month has {} trailing return rows", cfg.window));

    // Static mode: one fit on the first decision window, reused verbatim.
    ClusterSpace static_space;
    Eigen::MatrixXd static_centroids;
    if (cfg.mode == ClusteringMode::Static) {
        const auto fm = market::feature_matrix(returns, months.front().first_row - 1,
                                               cfg.window);
        static_space = ClusterSpace::fit(fm.values, cfg.standardize);
        static_centroids =
            cluster::kmeans_fit(static_space.apply(fm.values), cfg.k,
                                cfg.seed + months.front().index, cfg.kmeans)
                .centroids;
    }

    std::vector<std::optional<MonthEpisode>> built(months.size());
    std::vector<std::string> skipped(months.size());
    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(months.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t mi = 0; mi < n; ++mi) {
        const auto &span = months[static_cast<std::size_t>(mi)];
        try {
            const std::size_t end = span.first_row - 1;
            const auto fm = market::feature_matrix(returns, end, cfg.window);

            cluster::ClusterAssignment fit;
            if (cfg.mode == ClusteringMode::Rolling) {
                const auto space = ClusterSpace::fit(fm.values, cfg.standardize);
                fit = cluster::kmeans_fit(space.apply(fm.values), cfg.k,
                                          cfg.seed + span.index, cfg.kmeans);
            } else {
                const auto x = static_space.apply(fm.values);
                if (static_cast<std::size_t>(x.rows()) < cfg.k)
                    throw InfeasibleClusteringError("universe smaller than K");
                fit.labels = cluster::assign_labels(x, static_centroids);
                fit.centroids = static_centroids;
                fit.inertia = cluster::inertia(x, fit.labels, static_centroids);
            }
            const auto canon = cluster::canonicalize_clusters(
                fit, cluster::cluster_features(fm.values, fit.labels, cfg.k));

            MonthEpisode ep;
            ep.month = span.month;
            ep.month_index = span.index;
            ep.state = cluster::assemble_state(
                canon.features, cluster::market_features(bench.returns, end));
            ep.labels = canon.assignment.labels;
            ep.centroids = canon.assignment.centroids;
            ep.cluster_members.resize(cfg.k);

            const std::size_t days = span.last_row - span.first_row + 1;
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.k));
            std::vector<std::size_t> counted(cfg.k, 0);
            for (std::size_t i = 0; i < fm.rows(); ++i) {
                const std::size_t col = fm.tickers[i];
                const auto c = static_cast<std::size_t>(ep.labels[i]);
                ep.universe.push_back(returns.tickers[col]);
                ep.cluster_members[c].push_back(returns.tickers[col]);
                const double r = market::compound(
                    returns.returns.col(static_cast<Eigen::Index>(col)),
                    span.last_row, days);
                if (std::isfinite(r)) {
                    sum(static_cast<Eigen::Index>(c)) += r;
                    ++counted[c];
                }
            }
            ep.realized_returns.resize(static_cast<Eigen::Index>(cfg.k));
            for (std::size_t c = 0; c < cfg.k; ++c)
                ep.realized_returns(static_cast<Eigen::Index>(c)) =
                    counted[c] > 0 ? sum(static_cast<Eigen::Index>(c)) /
                                         static_cast<double>(counted[c])
                                   : 0.0;
            ep.benchmark_return = market::compound(bench.returns, span.last_row, days);
            built[static_cast<std::size_t>(mi)] = std::move(ep);
        } catch (const InfeasibleClusteringError &e) {
            skipped[static_cast<std::size_t>(mi)] = e.what();
        } catch (const EmptyUniverseError &e) {
            skipped[static_cast<std::size_t>(mi)] = e.what();
        } catch (...) {
#pragma omp critical(qa3c_build_episodes)
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<MonthEpisode> out;
    for (std::size_t i = 0; i < months.size(); ++i) {
        if (built[i])
            out.push_back(std::move(*built[i]));
        else
            spdlog::warn("skipping month {}: {}", months[i].month.to_string(),
                         skipped[i]);
    }
    return out;
}

std::vector<MonthEpisode> select_months(const std::vector<MonthEpisode> &episodes,
                                        const market::YearMonth &first,
                                        const market::YearMonth &last) {
    std::vector<MonthEpisode> out;
    for (const auto &ep : episodes)
        if (ep.month >= first && ep.month <= last)
            out.push_back(ep);
    return out;
}

double reward_relative_optimality(std::size_t action,
                                  std::span<const double> realized,
                                  double epsilon) {
    if (realized.size() < 2 || action >= realized.size())
        throw ContractViolation("relative-optimality reward: bad action or K < 2");
    const auto [lo, hi] = std::minmax_element(realized.begin(), realized.end());
    const double chosen = realized[action];
    if (chosen == *hi)
        return 1.0;
    const double gap = 1.0 - (chosen - *lo) / (*hi - *lo + epsilon);
    return -gap * gap;
}

double reward_z_score(std::size_t action, std::span<const double> realized,
                      double epsilon) {
    if (realized.size() < 2 || action >= realized.size())
        throw ContractViolation("z-score reward: bad action or K < 2");
    const double n = static_cast<double>(realized.size());
    const double mean = std::accumulate(realized.begin(), realized.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : realized)
        ss += (r - mean) * (r - mean);
    return (realized[action] - mean) / (std::sqrt(ss / n) + epsilon);
}

double reward(std::size_t action, const Eigen::VectorXd &realized,
              const RewardConfig &cfg) {
    const std::span<const double> r(realized.data(),
                                    static_cast<std::size_t>(realized.size()));
    return cfg.scheme == RewardScheme::RelativeOptimality
               ? reward_relative_optimality(action, r, cfg.epsilon)
               : reward_z_score(action, r, cfg.epsilon);
}

StepResult step(const MonthEpisode &episode, std::size_t action,
                const RewardConfig &cfg) {
    if (action >= episode.k())
        throw ContractViolation(fmt::format("step: action {} outside [0, {})",
                                            action, episode.k()));
    StepResult out;
    out.reward = reward(action, episode.realized_returns, cfg);
    out.chosen_return = episode.realized_returns(static_cast<Eigen::Index>(action));
    out.best_return = episode.realized_returns.maxCoeff();
    if (action < episode.cluster_members.size())
        out.chosen_tickers = episode.cluster_members[action];
    return out;
}

void write_episodes_jsonl(std::ostream &out,
                          const std::vector<MonthEpisode> &episodes) {
    for (const auto &ep : episodes) {
        nlohmann::json j;
        j["month_id"] = ep.month.to_string();
        j["month_index"] = ep.month_index;
        j["state"] = std::vector<double>(ep.state.data(), ep.state.data() + ep.state.size());
        j["realized_returns"] = std::vector<double>(
            ep.realized_returns.data(),
            ep.realized_returns.data() + ep.realized_returns.size());
        j["benchmark_return"] = ep.benchmark_return;
        j["members"] = ep.cluster_members;
        out << j.dump() << '\n';
    }
}

void write_episodes_jsonl(const std::filesystem::path &path,
                          const std::vector<MonthEpisode> &episodes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    write_episodes_jsonl(out, episodes);
}

std::vector<MonthEpisode> read_episodes_jsonl(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    std::vector<MonthEpisode> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        try {
            const auto j = nlohmann::json::parse(line);
            MonthEpisode ep;
            ep.month = market::YearMonth::parse(j.at("month_id").get<std::string>());
            ep.month_index = j.at("month_index").get<std::size_t>();
            const auto state = j.at("state").get<std::vector<double>>();
            ep.state = Eigen::Map<const Eigen::VectorXd>(
                state.data(), static_cast<Eigen::Index>(state.size()));
            const auto rr = j.at("realized_returns").get<std::vector<double>>();
            ep.realized_returns = Eigen::Map<const Eigen::VectorXd>(
                rr.data(), static_cast<Eigen::Index>(rr.size()));
            ep.benchmark_return = j.at("benchmark_return").get<double>();
            ep.cluster_members =
                j.at("members").get<std::vector<std::vector<std::string>>>();
            out.push_back(std::move(ep));
        } catch (const std::exception &e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
    return out;
}

} // namespace qa3c::env
