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
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qa3c/backtest.hpp"
#include "qa3c/errors.hpp"

using namespace qa3c;
using namespace qa3c::backtest;
using Catch::Matchers::WithinAbs;

namespace {

// Hand-built episode: only the fields the backtest reads are filled.
env::MonthEpisode episode(int month, std::vector<double> returns, double bench = 0.0) {
    env::MonthEpisode ep;
    ep.month = market::YearMonth{2022, static_cast<unsigned>(month)};
    ep.realized_returns = Eigen::Map<Eigen::VectorXd>(returns.data(),
                                                      static_cast<Eigen::Index>(returns.size()));
    ep.benchmark_return = bench;
    for (std::size_t c = 0; c < returns.size(); ++c) {
        std::vector<std::string> members;
        for (std::size_t j = 0; j <= c; ++j)
            members.push_back(fmt::format("T{}_{}", c, j));
        ep.cluster_members.push_back(members);
    }
    return ep;
}

std::vector<env::MonthEpisode> random_episodes(std::size_t n, std::size_t k,
                                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    std::vector<env::MonthEpisode> eps;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r(k);
        for (auto &x : r)
            x = u(rng);
        eps.push_back(episode(static_cast<int>(1 + i % 12), r, u(rng)));
    }
    return eps;
}

std::filesystem::path scratch(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("qa3c_bt_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<StrategyRun> all_runs(const std::vector<env::MonthEpisode> &eps) {
    return {run_strategy(kQa3c, eps, fixed_selector(1)),
            baseline_greedy_rolling(eps), run_strategy(kOracle, eps, oracle_selector())};
}

std::vector<std::vector<MonthlyReport>> reports_for(const std::vector<StrategyRun> &runs,
                                                    const std::vector<env::MonthEpisode> &eps) {
    std::vector<std::vector<MonthlyReport>> out;
    for (const auto &r : runs)
        out.push_back(summarize_months(r, eps));
    return out;
}

} // namespace

TEST_CASE("oracle compounds the per-month maximum") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto eps = random_episodes(15, 5, seed);
        const auto run = run_strategy(kOracle, eps, oracle_selector());
        double growth = 1.0;
        for (const auto &ep : eps) {
            double best = -1e300;
            for (Eigen::Index c = 0; c < ep.realized_returns.size(); ++c)
                best = std::max(best, ep.realized_returns(c));
            growth *= 1.0 + best;
        }
        CHECK_THAT(run.final_cumulative(), WithinAbs(growth - 1.0, 1e-12));
        CHECK(run.optimal_pick_rate == 1.0);
        // Nothing beats it.
        for (std::size_t a = 0; a < 5; ++a)
            CHECK(run_strategy("fixed", eps, fixed_selector(a)).final_cumulative() <=
                  run.final_cumulative() + 1e-12);
        CHECK(run_strategy("rand", eps, random_selector(seed)).final_cumulative() <=
              run.final_cumulative() + 1e-12);
    }
}

TEST_CASE("cumulative path has one entry per month and compounds") {
    const auto eps = random_episodes(10, 3, 3);
    const auto run = run_strategy("fixed", eps, fixed_selector(2));
    REQUIRE(run.cumulative.size() == eps.size());
    REQUIRE(run.benchmark.size() == eps.size());
    double g = 1.0, b = 1.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        g *= 1.0 + eps[i].realized_returns(2);
        b *= 1.0 + eps[i].benchmark_return;
        CHECK_THAT(run.cumulative[i], WithinAbs(g - 1.0, 1e-14));
        CHECK_THAT(run.benchmark[i], WithinAbs(b - 1.0, 1e-14));
        CHECK(run.active[i] == run.cumulative[i] - run.benchmark[i]);
        CHECK(run.chosen[i] == 2);
        CHECK(run.chosen_tickers[i] == eps[i].cluster_members[2]);
    }
}

TEST_CASE("zero returns give zero cumulative and a matching benchmark gives zero active") {
    std::vector<env::MonthEpisode> flat;
    for (int m = 1; m <= 6; ++m)
        flat.push_back(episode(m, {0.0, 0.0, 0.0}));
    const auto run = run_strategy("flat", flat, fixed_selector(0));
    for (double c : run.cumulative)
        CHECK(c == 0.0);

    // Benchmark equal to the chosen cluster's return every month.
    auto eps = random_episodes(8, 3, 11);
    for (auto &ep : eps)
        ep.benchmark_return = ep.realized_returns(1);
    const auto same = run_strategy("same", eps, fixed_selector(1));
    for (double a : same.active)
        CHECK(a == 0.0);
}

TEST_CASE("greedy rolling picks the previous month's best cluster") {
    SECTION("persistent winner") {
        std::vector<env::MonthEpisode> eps;
        for (int m = 1; m <= 6; ++m)
            eps.push_back(episode(m, {0.0, 0.01, 0.05, -0.02}));
        const auto run = baseline_greedy_rolling(eps);
        CHECK(run.chosen[0] == 0); // no history in the first month
        for (std::size_t i = 1; i < eps.size(); ++i)
            CHECK(run.chosen[i] == 2);
        CHECK_THAT(run.optimal_pick_rate, WithinAbs(5.0 / 6.0, 1e-15));
    }
    SECTION("alternating winner is always one month late") {
        std::vector<env::MonthEpisode> eps;
        for (int m = 1; m <= 8; ++m)
            eps.push_back(m % 2 ? episode(m, {0.05, -0.05}) : episode(m, {-0.05, 0.05}));
        const auto run = baseline_greedy_rolling(eps);
        for (std::size_t i = 1; i < eps.size(); ++i)
            CHECK(run.chosen[i] == eps[i - 1].best_action());
        // Month 0 picks cluster 0, which wins; every later pick is wrong.
        CHECK_THAT(run.optimal_pick_rate, WithinAbs(1.0 / 8.0, 1e-15));
    }
    SECTION("single month") {
        const std::vector<env::MonthEpisode> one{episode(1, {0.1, 0.2})};
        CHECK_THROWS_AS(baseline_greedy_rolling(one), InsufficientDataError);
        CHECK(baseline_greedy_rolling(one, true).months.size() == 1);
        CHECK_THROWS_AS(run_strategy("x", {}, oracle_selector()), InsufficientDataError);
    }
}

TEST_CASE("out-of-range selection is a contract violation") {
    const auto eps = random_episodes(3, 3, 1);
    CHECK_THROWS_AS(run_strategy("bad", eps, fixed_selector(3)), ContractViolation);
}

TEST_CASE("monthly summary ranks agree with a sort oracle") {
    const auto eps = random_episodes(24, 6, 5);
    for (const auto &run : {run_strategy("rand", eps, random_selector(9)),
                            run_strategy(kOracle, eps, oracle_selector())}) {
        const auto rep = summarize_months(run, eps);
        REQUIRE(rep.size() == eps.size());
        for (std::size_t i = 0; i < rep.size(); ++i) {
            std::vector<double> sorted(eps[i].realized_returns.data(),
                                       eps[i].realized_returns.data() + 6);
            std::sort(sorted.begin(), sorted.end(), std::greater<>());
            const double mine = eps[i].realized_returns(
                static_cast<Eigen::Index>(rep[i].chosen_cluster));
            const auto pos = std::find(sorted.begin(), sorted.end(), mine) - sorted.begin();
            CHECK(rep[i].rank == static_cast<std::size_t>(pos) + 1);
            CHECK(rep[i].n_stocks == eps[i].cluster_members[rep[i].chosen_cluster].size());
            CHECK(rep[i].tickers == eps[i].cluster_members[rep[i].chosen_cluster]);
            if (run.name == kOracle)
                CHECK(rep[i].rank == 1);
        }
    }
    const auto short_run = run_strategy("x", {eps[0]}, oracle_selector());
    CHECK_THROWS_AS(summarize_months(short_run, eps), ContractViolation);
}

TEST_CASE("report files are consistent and reproducible") {
    const auto eps = random_episodes(12, 4, 21);
    const auto runs = all_runs(eps);
    const auto reps = reports_for(runs, eps);
    const auto a = scratch("a");
    const auto b = scratch("b");
    emit_report(runs, reps, a);
    emit_report(runs, reps, b);

    for (const auto &name : {kQa3c, kGreedyRolling, kOracle})
        for (const auto *prefix : {"cumulative_", "monthly_summary_", "cluster_dist_"}) {
            const auto file = std::string(prefix) + name + ".csv";
            REQUIRE(std::filesystem::exists(a / file));
            CHECK(slurp(a / file) == slurp(b / file));
        }
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    CHECK(slurp(a / "monthly_summary.csv") == slurp(a / "monthly_summary_qa3c.csv"));

    const auto head = [](const std::filesystem::path &p) {
        std::ifstream in(p);
        std::string line;
        std::getline(in, line);
        return line;
    };
    CHECK(head(a / "cumulative_qa3c.csv") == "month,strategy_cum,benchmark_cum,active");
    CHECK(head(a / "monthly_summary.csv") == "month,n_stocks,rank,chosen_cluster,tickers");
    CHECK(head(a / "cluster_dist.csv") == "month,cluster,realized_return,chosen");

    std::ifstream in(a / "summary.json");
    const auto summary = nlohmann::json::parse(in);
    CHECK(summary.at("primary") == kQa3c);
    for (const auto &run : runs) {
        const auto &s = summary.at("strategies").at(run.name);
        CHECK(s.at("cumulative_return").get<double>() == run.final_cumulative());
        CHECK(s.at("months").get<std::size_t>() == eps.size());
    }

    const auto check = check_report_files(a);
    INFO(check.failures.size());
    CHECK(check.ok());
    CHECK(check.max_compounding_error < 1e-12);
}

TEST_CASE("report checker catches a strategy above the oracle") {
    const auto eps = random_episodes(6, 3, 2);
    auto runs = all_runs(eps);
    const auto reps = reports_for(runs, eps);
    runs[0].cumulative.back() += 10.0; // breaks compounding and dominance
    const auto dir = scratch("bad");
    emit_report(runs, reps, dir);
    const auto check = check_report_files(dir);
    CHECK_FALSE(check.compounding_ok);
    CHECK_FALSE(check.dominance_ok);
    CHECK_FALSE(check.ok());
    CHECK_THROWS_AS(check_report_files(scratch("missing")), DataError);
}

namespace {

market::SyntheticMarketConfig stationary_market() {
    market::SyntheticMarketConfig m;
    m.n_stocks = 16;
    m.n_days = 21 * 8;
    m.n_regimes = 1;
    m.group_drifts = {{0.01, 0.005, 0.0, -0.005}};
    m.group_vols = {0.0, 0.0, 0.0, 0.0};
    return m;
}

double label_agreement(const env::MonthEpisode &a, const env::MonthEpisode &b) {
    REQUIRE(a.universe == b.universe);
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.labels.size(); ++i)
        same += a.labels[i] == b.labels[i];
    return static_cast<double>(same) / static_cast<double>(a.labels.size());
}

} // namespace

TEST_CASE("static and rolling clusterings agree only when the market is stationary") {
    env::EpisodeConfig cfg;
    cfg.k = 4;
    const market::YearMonth first{2000, 1}, last{2100, 12};
    {
        const auto prices = market::generate_synthetic_market(stationary_market());
        const auto rolling = env::build_episodes(prices, std::nullopt, cfg);
        const auto fixed = static_clustering_episodes(prices, std::nullopt, cfg, first, last);
        REQUIRE(rolling.size() == fixed.size());
        for (std::size_t i = 0; i < rolling.size(); ++i)
            CHECK(label_agreement(rolling[i], fixed[i]) == 1.0);
    }
    {
        market::SyntheticMarketConfig m;
        m.n_stocks = 16;
        m.n_days = 21 * 8;
        const auto prices = market::generate_synthetic_market(m);
        const auto rolling = env::build_episodes(prices, std::nullopt, cfg);
        const auto fixed = static_clustering_episodes(prices, std::nullopt, cfg, first, last);
        REQUIRE(rolling.size() == fixed.size());
        double worst = 1.0;
        for (std::size_t i = 0; i < rolling.size(); ++i)
            worst = std::min(worst, label_agreement(rolling[i], fixed[i]));
        CHECK(worst < 1.0);
        // Static centroids never move; only their canonical order may change.
        const auto rows = [](const Eigen::MatrixXd &c) {
            std::vector<std::vector<double>> out;
            for (Eigen::Index r = 0; r < c.rows(); ++r)
                out.emplace_back();
            for (Eigen::Index r = 0; r < c.rows(); ++r)
                for (Eigen::Index j = 0; j < c.cols(); ++j)
                    out[static_cast<std::size_t>(r)].push_back(c(r, j));
            std::sort(out.begin(), out.end());
            return out;
        };
        for (const auto &ep : fixed)
            CHECK(rows(ep.centroids) == rows(fixed.front().centroids));
    }
}

TEST_CASE("static baseline runs on its own episode set") {
    market::SyntheticMarketConfig m;
    m.n_stocks = 16;
    m.n_days = 21 * 6;
    const auto prices = market::generate_synthetic_market(m);
    env::EpisodeConfig cfg;
    cfg.k = 4;
    const market::YearMonth first{2021, 9}, last{2021, 12};
    const auto run = baseline_static_clustering(prices, std::nullopt, cfg, first, last,
                                                StaticSelector::Greedy);
    CHECK(run.name == kStaticClustering);
    CHECK(run.episode_set == "static");
    CHECK(run.months.size() == 4);
    CHECK(run.months.front() == first);
    CHECK_THROWS_AS(baseline_static_clustering(prices, std::nullopt, cfg, first, last,
                                               StaticSelector::Policy, nullptr),
                    ContractViolation);
    policy::NetworkShape shape;
    shape.k = 4;
    const auto params = policy::PolicyParameters::initialize(shape, 4);
    CHECK(baseline_static_clustering(prices, std::nullopt, cfg, first, last,
                                     StaticSelector::Policy, &params)
              .months.size() == 4);
}

TEST_CASE("a trained policy earns more reward than uniform random selection") {
    market::SyntheticMarketConfig m;
    m.n_stocks = 40;
    m.n_days = 21 * 25;
    m.seed = 5;
    env::EpisodeConfig ec;
    ec.k = 4;
    ec.seed = 5;
    const auto eps = env::build_episodes(market::generate_synthetic_market(m), std::nullopt, ec);
    policy::NetworkShape shape;
    shape.k = 4;
    train::TrainConfig tc;
    tc.epochs = 300;
    tc.learning_rate = 0.02;
    tc.eval_every = 0;
    const env::RewardConfig rc;
    const auto res =
        train::train(eps, policy::PolicyParameters::initialize(shape, 17), tc, rc);
    const double trained = train::evaluate_policy(res.params, eps, rc).mean_reward;

    double random_mean = 0.0;
    constexpr int kSeeds = 20;
    for (int s = 0; s < kSeeds; ++s) {
        const auto run = run_strategy("rand", eps, random_selector(static_cast<std::uint64_t>(s)));
        double total = 0.0;
        for (std::size_t i = 0; i < eps.size(); ++i)
            total += env::reward(run.chosen[i], eps[i].realized_returns, rc);
        random_mean += total / static_cast<double>(eps.size());
    }
    random_mean /= kSeeds;
    CHECK(trained >= random_mean);
}
