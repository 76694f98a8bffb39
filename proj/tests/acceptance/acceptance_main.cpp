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
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "qa3c/app.hpp"
#include "qa3c/backtest.hpp"
#include "qa3c/checkpoint.hpp"
#include "qa3c/clustering.hpp"
#include "qa3c/environment.hpp"
#include "qa3c/market_data.hpp"
#include "qa3c/policy.hpp"
#include "qa3c/quantum.hpp"
#include "qa3c/trainer.hpp"

namespace fs = std::filesystem;
using Eigen::VectorXd;
using namespace qa3c;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------
// Shared fixtures

// Two alternating regimes over 37 synthetic months: one warm-up month, then
// 36 decision months.
market::SyntheticMarketConfig planted_market(std::uint64_t seed) {
    market::SyntheticMarketConfig m;
    m.n_stocks = 40;
    m.n_days = 21 * 37;
    m.seed = seed;
    return m;
}

env::EpisodeConfig planted_episode_cfg(std::uint64_t seed) {
    env::EpisodeConfig e;
    e.k = 4;
    e.seed = seed;
    return e;
}

policy::NetworkShape planted_shape(policy::Bottleneck b = policy::Bottleneck::Quantum) {
    policy::NetworkShape s;
    s.k = 4;
    s.bottleneck = b;
    return s;
}

constexpr std::size_t kPlantedEpochs = 600;
constexpr double kPlantedLr = 0.02;

train::TrainConfig planted_train_cfg(std::uint64_t seed) {
    train::TrainConfig t;
    t.epochs = kPlantedEpochs;
    t.learning_rate = kPlantedLr;
    t.seed = seed;
    t.eval_every = 0;
    return t;
}

std::vector<env::MonthEpisode> planted_episodes(std::uint64_t seed) {
    return env::build_episodes(market::generate_synthetic_market(planted_market(seed)),
                               std::nullopt, planted_episode_cfg(seed));
}

struct PlantedRun {
    std::uint64_t seed = 0;
    double pick_rate = 0.0;
    double greedy_rolling_rate = 0.0;
    train::TrainTrace trace;
};

PlantedRun planted_run(std::uint64_t seed, env::RewardScheme scheme) {
    const auto eps = planted_episodes(seed);
    const env::RewardConfig rc{scheme, 1e-8};
    const auto init = policy::PolicyParameters::initialize(planted_shape(), seed + 100);
    const auto res = train::train(eps, init, planted_train_cfg(seed), rc);
    PlantedRun out;
    out.seed = seed;
    out.pick_rate = train::evaluate_policy(res.params, eps, rc).optimal_pick_rate;
    out.greedy_rolling_rate = backtest::baseline_greedy_rolling(eps).optimal_pick_rate;
    out.trace = res.trace;
    return out;
}

double final_quartile_variance(const train::TrainTrace &trace) {
    const std::size_t n = trace.epochs.size();
    const std::size_t start = n - n / 4;
    double mean = 0.0;
    for (std::size_t i = start; i < n; ++i)
        mean += trace.epochs[i].mean_reward;
    mean /= static_cast<double>(n - start);
    double ss = 0.0;
    for (std::size_t i = start; i < n; ++i)
        ss += std::pow(trace.epochs[i].mean_reward - mean, 2);
    return ss / static_cast<double>(n - start - 1);
}

// ---------------------------------------------------------------------------
// Report checker: reads only the emitted files.

std::vector<std::vector<std::string>> read_csv(const fs::path &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("missing " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

struct FileCheck {
    bool ok = true;
    double max_compound_err = 0.0;
    std::vector<std::string> problems;
};

FileCheck check_backtest_files(const fs::path &dir) {
    FileCheck fc;
    std::ifstream in(dir / "summary.json");
    const auto summary = nlohmann::json::parse(in);
    const auto &strategies = summary.at("strategies");
    std::map<std::string, std::map<std::string, double>> chosen; // strategy -> month -> R
    std::map<std::string, std::map<std::string, double>> best;   // episode set -> month
    for (auto it = strategies.begin(); it != strategies.end(); ++it) {
        const std::string name = it.key();
        const std::string set = it.value().at("episodes");
        for (const auto &row : read_csv(dir / fmt::format("cluster_dist_{}.csv", name))) {
            const double r = std::stod(row.at(2));
            if (row.at(3) == "1")
                chosen[name][row[0]] = r;
            auto &b = best[set + "/" + name][row[0]];
            b = std::max(b == 0.0 ? -1e300 : b, r);
        }
        const auto cum = read_csv(dir / fmt::format("cumulative_{}.csv", name));
        double wealth = 1.0;
        for (const auto &row : cum) {
            wealth *= 1.0 + chosen[name].at(row.at(0));
            const double err = std::abs(wealth - 1.0 - std::stod(row.at(1)));
            fc.max_compound_err = std::max(fc.max_compound_err, err);
        }
        const double reported = it.value().at("cumulative_return");
        fc.max_compound_err = std::max(fc.max_compound_err, std::abs(wealth - 1.0 - reported));
    }
    if (fc.max_compound_err > 1e-10) {
        fc.ok = false;
        fc.problems.push_back(fmt::format("compounding error {:.2e}", fc.max_compound_err));
    }
    if (strategies.contains(backtest::kOracle)) {
        const double oracle_cum = strategies.at(backtest::kOracle).at("cumulative_return");
        const std::string oracle_set = strategies.at(backtest::kOracle).at("episodes");
        for (auto it = strategies.begin(); it != strategies.end(); ++it) {
            if (it.value().at("episodes") != oracle_set)
                continue;
            if (static_cast<double>(it.value().at("cumulative_return")) > oracle_cum + 1e-12) {
                fc.ok = false;
                fc.problems.push_back(it.key() + " beats the oracle");
            }
            for (const auto &[month, r] : chosen[it.key()])
                if (r > chosen[backtest::kOracle].at(month) + 1e-12) {
                    fc.ok = false;
                    fc.problems.push_back(it.key() + " beats the oracle in " + month);
                }
        }
    } else {
        fc.ok = false;
        fc.problems.push_back("no oracle run");
    }
    return fc;
}

std::vector<fs::path> g_backtest_dirs;

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / "qa3c_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

app::EngineConfig planted_engine_config(std::size_t epochs) {
    nlohmann::json doc = {
        {"K", 4},
        {"train_range", {{"start", "2021-08"}, {"end", "2023-07"}}},
        {"validation_range", {{"start", "2023-08"}, {"end", "2024-07"}}},
        {"train", {{"epochs", epochs}, {"lr", kPlantedLr}, {"eval_every", epochs}}},
        {"synthetic", {{"n_days", 21 * 37}}},
    };
    return app::parse_config(doc);
}

// ---------------------------------------------------------------------------
// Criteria

// Richardson-extrapolated central differences on every parameter array.
Outcome criterion_gradients() {
    constexpr double kTol = 1e-5;
    constexpr double kFloor = 1e-6;
    double worst = 0.0;
    std::size_t coords = 0;
    for (auto b : {policy::Bottleneck::Quantum, policy::Bottleneck::Classical}) {
        policy::NetworkShape shape;
        shape.k = 3;
        shape.h1 = 16;
        shape.h2 = 8;
        shape.n_qubits = 4;
        shape.n_layers = 2;
        shape.bottleneck = b;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto params = policy::PolicyParameters::initialize(shape, 1000 + seed);
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> n01(0.0, 0.03);
            VectorXd state(shape.state_dim());
            for (auto &v : state)
                v = n01(rng);
            state.segment(3, 1).setConstant(0.33); // a size fraction
            const std::size_t action = seed % 3;
            const double adv = 0.5 - 0.1 * static_cast<double>(seed);
            const double target = 0.2;
            const policy::LossCoefficients coeffs{0.5, 0.01};
            const auto g = policy::backward(params, policy::forward(params, state), action,
                                            adv, target, coeffs);
            auto probe = params;
            auto total = [&] {
                return policy::loss(policy::forward(probe, state), action, adv, target,
                                    coeffs)
                    .total;
            };
            auto central = [&](Eigen::MatrixXd &m, Eigen::Index i, double h) {
                const double keep = m(i);
                m(i) = keep + h;
                const double up = total();
                m(i) = keep - h;
                const double down = total();
                m(i) = keep;
                return (up - down) / (2 * h);
            };
            std::map<std::string, const Eigen::MatrixXd *> analytic;
            g.grad.for_each([&](std::string_view name, const Eigen::MatrixXd &m) {
                analytic[std::string(name)] = &m;
            });
            probe.for_each([&](std::string_view name, Eigen::MatrixXd &m) {
                const auto &a = *analytic.at(std::string(name));
                for (Eigen::Index i = 0; i < m.size(); ++i) {
                    const double d1 = central(m, i, 1e-3);
                    const double d2 = central(m, i, 5e-4);
                    const double numeric = (4 * d2 - d1) / 3;
                    const double scale =
                        std::max({std::abs(numeric), std::abs(a(i)), kFloor});
                    worst = std::max(worst, std::abs(numeric - a(i)) / scale);
                    ++coords;
                }
            });
        }
    }
    return {worst <= kTol, fmt::format("max relative error {:.2e} over {} coordinates "
                                       "(both bottlenecks, 10 seeds each)",
                                       worst, coords)};
}

Outcome criterion_quantum() {
    double norm_err = 0.0;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ang(-4.0, 4.0);
    std::uniform_real_distribution<double> xin(-0.99, 0.99);
    for (std::size_t q = 1; q <= 8; ++q)
        for (std::size_t d = 1; d <= 4; ++d)
            for (int rep = 0; rep < 4; ++rep) {
                auto spec = quantum::CircuitSpec::zeros(q, d);
                for (auto &t : spec.theta)
                    t = ang(rng);
                VectorXd x(static_cast<Eigen::Index>(q));
                for (auto &v : x)
                    v = xin(rng);
                auto st = quantum::encode(x);
                norm_err = std::max(norm_err, std::abs(st.norm() - 1.0));
                quantum::apply_variational(st, spec);
                norm_err = std::max(norm_err, std::abs(st.norm() - 1.0));
            }
    double z_err = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x = -0.99 + 1.98 * i / 99.0;
        const double theta = -3.0 + 6.0 * ((i * 37) % 100) / 99.0;
        auto spec = quantum::CircuitSpec::zeros(1, 1);
        spec.theta = {theta, 0.7};
        VectorXd xv(1);
        xv << x;
        const double z = quantum::vqc_forward(xv, spec)(0);
        z_err = std::max(z_err, std::abs(z - std::cos(quantum::kPi * x + theta)));
    }
    return {norm_err <= 1e-10 && z_err <= 1e-10,
            fmt::format("norm error {:.2e}, single-qubit <Z> error {:.2e} (100 points)",
                        norm_err, z_err)};
}

Outcome criterion_reward() {
    std::vector<std::string> bad;
    auto rel = [](std::size_t a, std::vector<double> r, double eps) {
        return env::reward_relative_optimality(a, r, eps);
    };
    if (std::abs(rel(0, {0.10, 0.05, 0.00}, 1e-8) - 1.0) > 1e-15)
        bad.push_back("max action");
    if (std::abs(rel(1, {0.10, 0.05, 0.00}, 1e-8) + 0.25) > 1e-7)
        bad.push_back("middle action");
    if (std::abs(rel(2, {0.10, 0.05, 0.00}, 1e-8) + 1.0) > 1e-6)
        bad.push_back("min action");

    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01(0.0, 0.04);
    std::uniform_real_distribution<double> uni(0.1, 10.0);
    double affine_err = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> r(2 + static_cast<std::size_t>(trial % 9));
        for (auto &v : r)
            v = n01(rng);
        const double hi = *std::max_element(r.begin(), r.end());
        const double c = uni(rng), shift = n01(rng);
        std::vector<double> t(r.size());
        std::transform(r.begin(), r.end(), t.begin(), [&](double v) { return c * v + shift; });
        for (std::size_t a = 0; a < r.size(); ++a) {
            const double ra = rel(a, r, 1e-8);
            if (ra > 1.0 || ra <= -1.0 - 1e-6)
                bad.push_back("bound");
            if ((ra == 1.0) != (r[a] == hi))
                bad.push_back("+1 iff argmax");
            for (std::size_t b = 0; b < r.size(); ++b)
                if (r[a] >= r[b] && ra < rel(b, r, 1e-8))
                    bad.push_back("monotonicity");
            affine_err = std::max(affine_err, std::abs(rel(a, r, 1e-12) - rel(a, t, 1e-12)));
        }
    }
    if (affine_err > 1e-6)
        bad.push_back("affine invariance");
    std::sort(bad.begin(), bad.end());
    bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
    std::string what = bad.empty() ? "worked examples, bounds, monotonicity hold" : "";
    for (const auto &b : bad)
        what += b + " violated; ";
    return {bad.empty(), fmt::format("{}; affine error {:.2e}", what, affine_err)};
}

Outcome criterion_state_dim() {
    const auto prices = market::generate_synthetic_market(planted_market(3));
    std::string sizes;
    bool ok = true;
    for (std::size_t k = 2; k <= 8; ++k) {
        auto cfg = planted_episode_cfg(3);
        cfg.k = k;
        const auto eps = env::build_episodes(prices, std::nullopt, cfg);
        for (const auto &ep : eps)
            ok = ok && static_cast<std::size_t>(ep.state.size()) == 4 * k + 2;
        ok = ok && !eps.empty();
        sizes += fmt::format("K={}:{} ", k, eps.front().state.size());
    }
    return {ok, "state lengths " + sizes};
}

constexpr double kBanditLr = 0.05;

Outcome criterion_bandit() {
    constexpr std::size_t kTarget = 2;
    std::size_t wins = 0;
    std::string probs;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        policy::NetworkShape shape; // K=5, Q=6, D=2
        env::MonthEpisode ep;
        ep.month = {2022, 1};
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n01(0.0, 0.05);
        ep.state = VectorXd(shape.state_dim());
        for (auto &v : ep.state)
            v = n01(rng);
        ep.realized_returns = VectorXd::Constant(5, -0.02);
        ep.realized_returns(kTarget) = 0.03;
        ep.realized_returns(0) = 0.01;
        ep.cluster_members.assign(5, {});
        train::TrainConfig tc;
        tc.epochs = 200;
        tc.learning_rate = kBanditLr;
        tc.seed = seed;
        tc.eval_every = 0;
        const auto init = policy::PolicyParameters::initialize(shape, seed);
        const auto res = train::train({ep}, init, tc, env::RewardConfig{});
        const auto out = policy::forward(res.params, ep.state);
        const double p = out.probs(kTarget);
        wins += policy::greedy_action(out) == kTarget && p > 0.95;
        probs += fmt::format("{:.3f} ", p);
    }
    return {wins >= 9, fmt::format("{}/10 seeds with pi(best) > 0.95 after 200 epochs: {}",
                                   wins, probs)};
}

std::vector<PlantedRun> g_planted_relopt;

Outcome criterion_planted() {
    std::size_t wins = 0;
    std::string rates;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto run = planted_run(seed, env::RewardScheme::RelativeOptimality);
        const bool win = run.pick_rate >= 0.25 + 0.15 && run.pick_rate > run.greedy_rolling_rate;
        wins += win;
        rates += fmt::format("seed {}: {:.3f} vs greedy {:.3f}; ", seed, run.pick_rate,
                             run.greedy_rolling_rate);
        g_planted_relopt.push_back(std::move(run));
    }
    return {wins >= 4, fmt::format("{}/5 seeds pass. {}", wins, rates)};
}

Outcome criterion_ablation() {
    std::vector<std::string> bad;
    const auto dir = scratch("ablation");
    const auto cfg = planted_engine_config(60);
    const auto tr = app::cmd_train(cfg, dir / "train");
    if (!tr.ablation_checkpoint)
        bad.push_back("no classical checkpoint");
    const auto q_trace = read_csv(dir / "train" / "trace.csv");
    const auto c_trace = read_csv(dir / "train" / "trace_mlp.csv");
    if (q_trace.size() != 60 || c_trace.size() != 60)
        bad.push_back("trace lengths differ");
    std::ifstream pm(dir / "train" / "parameter_match.json");
    const auto match = nlohmann::json::parse(pm);
    const bool within = match.at("within_tolerance");
    const double dev = match.at("deviation");
    if (!within || std::abs(dev) > 0.10)
        bad.push_back("parameter match outside 10%");
    const auto q = policy::load_checkpoint(tr.checkpoint);
    const auto c = policy::load_checkpoint(*tr.ablation_checkpoint);
    if (q.params.shape.bottleneck != policy::Bottleneck::Quantum ||
        c.params.shape.bottleneck != policy::Bottleneck::Classical)
        bad.push_back("checkpoint bottleneck modes");
    auto q_shape = q.params.shape, c_shape = c.params.shape;
    c_shape.bottleneck = q_shape.bottleneck;
    c_shape.band_width = q_shape.band_width;
    if (!(q_shape == c_shape))
        bad.push_back("shapes differ outside the bottleneck");

    const auto bt = app::cmd_backtest(cfg, tr.checkpoint, tr.ablation_checkpoint,
                                      dir / "backtest");
    g_backtest_dirs.push_back(dir / "backtest");
    const auto *qa = &bt.runs.at(0);
    const backtest::StrategyRun *mlp = nullptr;
    for (const auto &r : bt.runs)
        if (r.name == backtest::kMlpAblation)
            mlp = &r;
    if (qa->name != backtest::kQa3c || !mlp || mlp->months != qa->months)
        bad.push_back("backtest runs not on identical months");

    // A shape with no close classical match must be flagged.
    const auto flagged = policy::parameter_match(2, 4);
    if (flagged.within_tolerance)
        bad.push_back("unmatchable shape not flagged");

    std::string what = bad.empty() ? "identical pipeline for both modes" : "";
    for (const auto &b : bad)
        what += b + "; ";
    return {bad.empty(),
            fmt::format("{}; classical {} vs circuit {} parameters ({:+.1f}%); Q=2,D=4 "
                        "flagged ({:+.1f}%)",
                        what, static_cast<int>(match.at("classical_params")),
                        static_cast<int>(match.at("quantum_params")), 100 * dev,
                        100 * flagged.deviation)};
}

Outcome criterion_reward_stability() {
    std::size_t wins = 0;
    std::string detail;
    for (const auto &rel : g_planted_relopt) {
        const auto z = planted_run(rel.seed, env::RewardScheme::ZScore);
        const double vr = final_quartile_variance(rel.trace);
        const double vz = final_quartile_variance(z.trace);
        wins += vr < vz;
        detail += fmt::format("seed {}: {:.2e} vs {:.2e}; ", rel.seed, vr, vz);
    }
    return {wins >= 3, fmt::format("{}/5 seeds lower under relative optimality. {}", wins,
                                   detail)};
}

int run_cli(const fs::path &cwd, const std::string &args) {
    const auto cmd = fmt::format("cd '{}' && '{}' --log-level warn {} > cli.log 2>&1",
                                 cwd.string(), QA3C_CLI_PATH, args);
    return std::system(cmd.c_str());
}

std::map<std::string, std::string> slurp_tree(const fs::path &root) {
    std::map<std::string, std::string> files;
    for (const auto &e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file() || e.path().filename() == "cli.log")
            continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = ss.str();
    }
    return files;
}

Outcome criterion_determinism() {
    const auto base = scratch("determinism");
    const std::string args =
        "--seed 11 --set K=4 --set train.epochs=80 --set train.eval_every=40 "
        "--set train.lr=0.02 --set synthetic.n_days=777 "
        "--set train_range.end=2023-07 --set validation_range.start=2023-08 "
        "--set validation_range.end=2024-07";
    for (const char *run : {"a", "b"}) {
        fs::create_directories(base / run);
        if (run_cli(base / run, args + " --out out train") != 0 ||
            run_cli(base / run,
                    args + " --out out/backtest backtest --checkpoint out/checkpoint.json") !=
                0)
            return {false, "CLI run failed; see " + (base / run / "cli.log").string()};
    }
    g_backtest_dirs.push_back(base / "a" / "out" / "backtest");
    g_backtest_dirs.push_back(base / "b" / "out" / "backtest");
    const auto a = slurp_tree(base / "a");
    const auto b = slurp_tree(base / "b");
    if (a.size() != b.size())
        return {false, "different file sets"};
    for (const auto &[name, bytes] : a) {
        const auto it = b.find(name);
        if (it == b.end() || it->second != bytes)
            return {false, name + " differs"};
    }
    return {true, fmt::format("{} files byte-identical across two runs", a.size())};
}

Outcome criterion_reports() {
    if (g_backtest_dirs.empty())
        return {false, "no backtests were emitted"};
    double worst = 0.0;
    std::vector<std::string> problems;
    for (const auto &dir : g_backtest_dirs) {
        const auto fc = check_backtest_files(dir);
        worst = std::max(worst, fc.max_compound_err);
        for (const auto &p : fc.problems)
            problems.push_back(dir.filename().string() + ": " + p);
    }
    std::string what;
    for (const auto &p : problems)
        what += p + "; ";
    return {problems.empty(),
            fmt::format("{} backtests checked from files, max compounding error {:.2e} {}",
                        g_backtest_dirs.size(), worst, what)};
}

} // namespace

int main(int argc, char **argv) {
    spdlog::set_level(spdlog::level::warn);
    struct Criterion {
        int id;
        const char *name;
        double budget_s; // 0 = no runtime bound
        std::function<Outcome()> fn;
    };
    // 9 runs last so it sees the backtests emitted by 7 and 10.
    const std::vector<Criterion> criteria{
        {1, "gradient finite differences", 30, criterion_gradients},
        {2, "statevector validity", 5, criterion_quantum},
        {3, "reward contract", 1, criterion_reward},
        {4, "state dimension", 0, criterion_state_dim},
        {5, "bandit convergence", 60, criterion_bandit},
        {6, "planted-regime benchmark", 600, criterion_planted},
        {7, "ablation parity", 0, criterion_ablation},
        {8, "reward-scheme stability", 0, criterion_reward_stability},
        {10, "determinism", 0, criterion_determinism},
        {9, "oracle dominance and compounding", 0, criterion_reports},
    };
    std::vector<int> only;
    for (int i = 1; i < argc; ++i)
        only.push_back(std::atoi(argv[i]));

    bool all = true;
    std::vector<std::string> lines;
    for (const auto &c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end())
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception &e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs > c.budget_s) {
            o.pass = false;
            o.detail += fmt::format(" [over the {:.0f}s budget]", c.budget_s);
        }
        all = all && o.pass;
        const auto line = fmt::format("{} criterion {:>2} {}: {} ({:.1f}s)",
                                      o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail, secs);
        std::cout << line << std::endl;
        lines.push_back(line);
    }
    std::cout << "\n";
    for (const auto &l : lines)
        std::cout << l.substr(0, l.find(':')) << "\n";
    return all ? 0 : 1;
}
