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
#include "qa3c/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qa3c/errors.hpp"

namespace qa3c::backtest {

namespace {

std::ofstream open_out(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream &out, const std::filesystem::path &path) {
    out.flush();
    if (!out)
        throw DataError("write failed: " + path.string());
}

std::string join(const std::vector<std::string> &items, char sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += sep;
        out += items[i];
    }
    return out;
}

using CsvRows = std::vector<std::vector<std::string>>;

CsvRows read_csv(const std::filesystem::path &path, const std::string &header) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw ParseError(path.string(), 1, "expected header '" + header + "'");
    CsvRows rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ','))
            fields.push_back(f);
        rows.push_back(std::move(fields));
    }
    return rows;
}

double to_double(const std::string &s) { return std::stod(s); }

} // namespace

double StrategyRun::mean_monthly_return() const {
    if (monthly_returns.empty())
        return 0.0;
    return std::accumulate(monthly_returns.begin(), monthly_returns.end(), 0.0) /
           static_cast<double>(monthly_returns.size());
}

Selector policy_selector(policy::PolicyParameters params, train::EvalMode mode,
                         std::uint64_t seed) {
    auto rng = std::make_shared<policy::Rng>(seed);
    return [params = std::move(params), mode, rng](const env::MonthEpisode &ep,
                                                   std::size_t) {
        const auto out = policy::forward(params, ep.state);
        return mode == train::EvalMode::Greedy ? policy::greedy_action(out)
                                               : policy::sample_action(out, *rng);
    };
}

Selector oracle_selector() {
    return [](const env::MonthEpisode &ep, std::size_t) { return ep.best_action(); };
}

Selector fixed_selector(std::size_t action) {
    return [action](const env::MonthEpisode &, std::size_t) { return action; };
}

Selector random_selector(std::uint64_t seed) {
    auto rng = std::make_shared<policy::Rng>(seed);
    return [rng](const env::MonthEpisode &ep, std::size_t) {
        std::uniform_int_distribution<std::size_t> pick(0, ep.k() - 1);
        return pick(*rng);
    };
}

StrategyRun run_strategy(const std::string &name,
                         const std::vector<env::MonthEpisode> &episodes,
                         const Selector &select) {
    if (episodes.empty())
        throw InsufficientDataError("run_strategy: no episodes");
    StrategyRun run;
    run.name = name;
    double growth = 1.0;
    double bench_growth = 1.0;
    std::size_t optimal = 0;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        const auto &ep = episodes[i];
        const std::size_t a = select(ep, i);
        if (a >= ep.k())
            throw ContractViolation(fmt::format(
                "strategy {} chose cluster {} of {}", name, a, ep.k()));
        const double r = ep.realized_returns(static_cast<Eigen::Index>(a));
        growth *= 1.0 + r;
        bench_growth *= 1.0 + ep.benchmark_return;
        if (r == ep.realized_returns.maxCoeff())
            ++optimal;
        run.months.push_back(ep.month);
        run.chosen.push_back(a);
        run.chosen_tickers.push_back(a < ep.cluster_members.size()
                                         ? ep.cluster_members[a]
                                         : std::vector<std::string>{});
        run.monthly_returns.push_back(r);
        run.cumulative.push_back(growth - 1.0);
        run.benchmark.push_back(bench_growth - 1.0);
        run.active.push_back(run.cumulative.back() - run.benchmark.back());
    }
    run.optimal_pick_rate =
        static_cast<double>(optimal) / static_cast<double>(episodes.size());
    return run;
}

StrategyRun baseline_greedy_rolling(const std::vector<env::MonthEpisode> &episodes,
                                    bool allow_single_month) {
    if (episodes.size() < 2 && !allow_single_month)
        throw InsufficientDataError(
            "greedy rolling baseline needs at least 2 months");
    return run_strategy(kGreedyRolling, episodes,
                        [&](const env::MonthEpisode &, std::size_t i) -> std::size_t {
                            return i == 0 ? 0 : episodes[i - 1].best_action();
                        });
}

std::vector<env::MonthEpisode>
static_clustering_episodes(const market::PricePanel &prices,
                           const std::optional<market::BenchmarkSeries> &benchmark,
                           env::EpisodeConfig cfg, const market::YearMonth &first,
                           const market::YearMonth &last) {
    cfg.mode = env::ClusteringMode::Static;
    return env::select_months(env::build_episodes(prices, benchmark, cfg), first,
                              last);
}

StrategyRun
baseline_static_clustering(const market::PricePanel &prices,
                           const std::optional<market::BenchmarkSeries> &benchmark,
                           const env::EpisodeConfig &cfg,
                           const market::YearMonth &first,
                           const market::YearMonth &last, StaticSelector how,
                           const policy::PolicyParameters *params) {
    const auto episodes =
        static_clustering_episodes(prices, benchmark, cfg, first, last);
    StrategyRun run;
    if (how == StaticSelector::Policy) {
        if (params == nullptr)
            throw ContractViolation("static baseline: policy selection needs parameters");
        run = run_strategy(kStaticClustering, episodes, policy_selector(*params));
    } else {
        run = baseline_greedy_rolling(episodes, true);
        run.name = kStaticClustering;
    }
    run.episode_set = "static";
    return run;
}

std::vector<MonthlyReport> summarize_months(const StrategyRun &run,
                                            const std::vector<env::MonthEpisode> &episodes) {
    if (episodes.size() != run.months.size())
        throw ContractViolation("summarize_months: run and episodes differ in length");
    std::vector<MonthlyReport> out;
    out.reserve(episodes.size());
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        const auto &ep = episodes[i];
        MonthlyReport m;
        m.month = ep.month;
        m.chosen_cluster = run.chosen[i];
        m.tickers = run.chosen_tickers[i];
        m.n_stocks = m.tickers.size();
        m.cluster_returns = ep.realized_returns;
        const double mine = ep.realized_returns(static_cast<Eigen::Index>(m.chosen_cluster));
        m.rank = 1 + static_cast<std::size_t>(
                         (ep.realized_returns.array() > mine).count());
        out.push_back(std::move(m));
    }
    return out;
}

void emit_report(const std::vector<StrategyRun> &runs,
                 const std::vector<std::vector<MonthlyReport>> &reports,
                 const std::filesystem::path &out_dir) {
    if (runs.size() != reports.size())
        throw ContractViolation("emit_report: one report list per run required");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw DataError("cannot create " + out_dir.string() + ": " + ec.message());

    auto write_monthly = [&](const std::filesystem::path &path,
                             const std::vector<MonthlyReport> &rep) {
        auto out = open_out(path);
        out << "month,n_stocks,rank,chosen_cluster,tickers\n";
        for (const auto &m : rep)
            out << fmt::format("{},{},{},{},{}\n", m.month.to_string(), m.n_stocks,
                               m.rank, m.chosen_cluster, join(m.tickers, ';'));
        finish(out, path);
    };
    auto write_dist = [&](const std::filesystem::path &path,
                          const std::vector<MonthlyReport> &rep) {
        auto out = open_out(path);
        out << "month,cluster,realized_return,chosen\n";
        for (const auto &m : rep)
            for (Eigen::Index c = 0; c < m.cluster_returns.size(); ++c)
                out << fmt::format("{},{},{},{}\n", m.month.to_string(), c,
                                   m.cluster_returns(c),
                                   static_cast<std::size_t>(c) == m.chosen_cluster ? 1 : 0);
        finish(out, path);
    };

    nlohmann::json summary;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto &run = runs[i];
        const auto cum_path = out_dir / ("cumulative_" + run.name + ".csv");
        auto out = open_out(cum_path);
        out << "month,strategy_cum,benchmark_cum,active\n";
        for (std::size_t m = 0; m < run.months.size(); ++m)
            out << fmt::format("{},{},{},{}\n", run.months[m].to_string(),
                               run.cumulative[m], run.benchmark[m], run.active[m]);
        finish(out, cum_path);

        write_monthly(out_dir / ("monthly_summary_" + run.name + ".csv"), reports[i]);
        write_dist(out_dir / ("cluster_dist_" + run.name + ".csv"), reports[i]);
        if (i == 0) {
            write_monthly(out_dir / "monthly_summary.csv", reports[i]);
            write_dist(out_dir / "cluster_dist.csv", reports[i]);
        }

        summary["strategies"][run.name] = {
            {"cumulative_return", run.final_cumulative()},
            {"mean_monthly_return", run.mean_monthly_return()},
            {"optimal_pick_rate", run.optimal_pick_rate},
            {"months", run.months.size()},
            {"episodes", run.episode_set},
            {"benchmark_cumulative", run.benchmark.empty() ? 0.0 : run.benchmark.back()}};
    }
    summary["primary"] = runs.empty() ? "" : runs.front().name;
    const auto summary_path = out_dir / "summary.json";
    auto out = open_out(summary_path);
    out << summary.dump(2) << '\n';
    finish(out, summary_path);
}

ReportCheck check_report_files(const std::filesystem::path &dir) {
    ReportCheck check;
    nlohmann::json summary;
    {
        std::ifstream in(dir / "summary.json");
        if (!in)
            throw DataError("missing " + (dir / "summary.json").string());
        summary = nlohmann::json::parse(in);
    }

    std::map<std::string, std::map<std::string, double>> final_by_set;
    std::map<std::string, std::vector<double>> oracle_bound; // per set: month max
    for (const auto &[name, info] : summary.at("strategies").items()) {
        const auto set = info.at("episodes").get<std::string>();
        const auto cum = read_csv(dir / ("cumulative_" + name + ".csv"),
                                  "month,strategy_cum,benchmark_cum,active");
        const auto dist = read_csv(dir / ("cluster_dist_" + name + ".csv"),
                                   "month,cluster,realized_return,chosen");

        std::vector<std::string> months;
        std::map<std::string, double> chosen_ret, best_ret;
        for (const auto &row : dist) {
            const double r = to_double(row.at(2));
            if (!best_ret.contains(row[0])) {
                months.push_back(row[0]);
                best_ret[row[0]] = r;
            } else {
                best_ret[row[0]] = std::max(best_ret[row[0]], r);
            }
            if (row.at(3) == "1")
                chosen_ret[row[0]] = r;
        }
        if (months.size() != cum.size()) {
            check.consistency_ok = false;
            check.failures.push_back(name + ": month count differs between files");
            continue;
        }
        double growth = 1.0;
        for (std::size_t m = 0; m < cum.size(); ++m) {
            if (cum[m].at(0) != months[m] || !chosen_ret.contains(months[m])) {
                check.consistency_ok = false;
                check.failures.push_back(name + ": month " + months[m] +
                                         " lacks a chosen cluster");
                break;
            }
            growth *= 1.0 + chosen_ret[months[m]];
            const double err = std::abs((1.0 + to_double(cum[m].at(1))) - growth);
            check.max_compounding_error = std::max(check.max_compounding_error, err);
            if (err > 1e-10) {
                check.compounding_ok = false;
                check.failures.push_back(fmt::format(
                    "{}: compounding error {} at {}", name, err, months[m]));
            }
            const double active_err = std::abs(
                to_double(cum[m].at(3)) -
                (to_double(cum[m].at(1)) - to_double(cum[m].at(2))));
            if (active_err > 1e-12) {
                check.consistency_ok = false;
                check.failures.push_back(name + ": active != strategy - benchmark");
            }
        }
        const double final_csv = cum.empty() ? 0.0 : to_double(cum.back().at(1));
        if (info.at("cumulative_return").get<double>() != final_csv ||
            info.at("months").get<std::size_t>() != cum.size()) {
            check.consistency_ok = false;
            check.failures.push_back(name + ": summary.json disagrees with CSV");
        }
        final_by_set[set][name] = final_csv;

        auto &bound = oracle_bound[set];
        if (bound.empty())
            for (const auto &m : months)
                bound.push_back(best_ret[m]);
    }

    for (const auto &[set, finals] : final_by_set) {
        double oracle_growth = 1.0;
        for (double r : oracle_bound[set])
            oracle_growth *= 1.0 + r;
        const double bound = oracle_growth - 1.0;
        if (finals.contains(kOracle) &&
            std::abs(finals.at(kOracle) - bound) > 1e-10) {
            check.dominance_ok = false;
            check.failures.push_back("oracle does not pick the monthly maximum");
        }
        for (const auto &[name, value] : finals)
            if (value > bound + 1e-12) {
                check.dominance_ok = false;
                check.failures.push_back(fmt::format(
                    "{} ({}) exceeds the per-month-argmax oracle ({})", name, value,
                    bound));
            }
    }
    return check;
}

} // namespace qa3c::backtest
