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
#include "qa3c/app.hpp"

#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "qa3c/checkpoint.hpp"
#include "qa3c/errors.hpp"

namespace qa3c::app {

namespace {

void ensure_dir(const std::filesystem::path &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw DataError("cannot write " + path.string());
}

bool enabled(const EngineConfig &cfg, const std::string &name) {
    return std::find(cfg.strategies.begin(), cfg.strategies.end(), name) !=
           cfg.strategies.end();
}

train::TrainResult train_one(const EngineConfig &cfg,
                             const std::vector<env::MonthEpisode> &episodes,
                             policy::Bottleneck b, const std::filesystem::path &out,
                             const std::string &suffix) {
    const auto init =
        policy::PolicyParameters::initialize(cfg.shape(b), cfg.init_seed(b), cfg.tau);
    auto on_epoch = [&](std::size_t epoch, const policy::PolicyParameters &p) {
        policy::save_checkpoint(out / fmt::format("checkpoint{}_epoch{}.json", suffix, epoch),
                                p);
    };
    spdlog::info("training {} bottleneck on {} months for {} epochs",
                 policy::to_string(b), episodes.size(), cfg.train.epochs);
    return train::train(episodes, init, cfg.train, cfg.reward, on_epoch);
}

} // namespace

MarketInputs load_market(const EngineConfig &cfg) {
    MarketInputs m;
    m.prices = cfg.prices_path.empty()
                   ? market::generate_synthetic_market(cfg.synthetic)
                   : market::load_prices(cfg.prices_path);
    if (!cfg.benchmark_path.empty())
        m.benchmark =
            market::load_benchmark(cfg.benchmark_path, market::compute_returns(m.prices));
    return m;
}

std::vector<env::MonthEpisode> rolling_episodes(const EngineConfig &cfg,
                                                const MarketInputs &market) {
    auto ep_cfg = cfg.episodes;
    ep_cfg.mode = env::ClusteringMode::Rolling;
    return env::build_episodes(market.prices, market.benchmark, ep_cfg);
}

void write_resolved_config(const EngineConfig &cfg, const std::filesystem::path &out) {
    write_text(out / "resolved_config.json", to_json(cfg).dump(2) + "\n");
}

TrainOutputs cmd_train(const EngineConfig &cfg, const std::filesystem::path &out) {
    ensure_dir(out);
    write_resolved_config(cfg, out);
    const auto market = load_market(cfg);
    const auto episodes = env::select_months(rolling_episodes(cfg, market),
                                             cfg.train_range.first, cfg.train_range.last);
    if (episodes.empty())
        throw InsufficientDataError("no training months in " +
                                    cfg.train_range.first.to_string() + ".." +
                                    cfg.train_range.last.to_string());
    env::write_episodes_jsonl(out / "episodes_train.jsonl", episodes);

    const auto match = policy::parameter_match(cfg.network.n_qubits, cfg.network.n_layers);
    const auto mlp_shape = cfg.shape(policy::Bottleneck::Classical);
    const nlohmann::json match_doc = {
        {"quantum_params", match.quantum_params},
        {"classical_params", cfg.network.n_qubits * (mlp_shape.resolved_band_width() + 1)},
        {"band_width", mlp_shape.resolved_band_width()},
        {"deviation", match.deviation},
        {"within_tolerance", match.within_tolerance}};
    write_text(out / "parameter_match.json", match_doc.dump(2) + "\n");
    if (!match.within_tolerance)
        spdlog::warn("classical bottleneck has {} parameters vs {} circuit angles "
                     "({:+.1f}%), outside the 10% match",
                     match.classical_params, match.quantum_params,
                     100.0 * match.deviation);

    TrainOutputs res;
    res.train_months = episodes.size();
    const auto q = train_one(cfg, episodes, policy::Bottleneck::Quantum, out, "");
    res.checkpoint = out / "checkpoint.json";
    res.trace = out / "trace.csv";
    policy::save_checkpoint(res.checkpoint, q.params);
    q.trace.write_csv(res.trace);
    res.trace_data = q.trace;

    if (cfg.train_ablation) {
        const auto c = train_one(cfg, episodes, policy::Bottleneck::Classical, out, "_mlp");
        res.ablation_checkpoint = out / "checkpoint_mlp.json";
        policy::save_checkpoint(*res.ablation_checkpoint, c.params);
        c.trace.write_csv(out / "trace_mlp.csv");
    }
    return res;
}

BacktestOutputs cmd_backtest(const EngineConfig &cfg,
                             const std::filesystem::path &checkpoint,
                             const std::optional<std::filesystem::path> &ablation,
                             const std::filesystem::path &out) {
    auto load_matching = [&](const std::filesystem::path &path, policy::Bottleneck b) {
        auto ck = policy::load_checkpoint(path);
        const auto expected = policy::structural_hash(cfg.shape(b));
        if (ck.config_hash != expected)
            throw IncompatibleCheckpointError(fmt::format(
                "{}: checkpoint hash {} does not match configuration hash {}",
                path.string(), ck.config_hash, expected));
        return ck.params;
    };
    const auto qa3c_params = load_matching(checkpoint, policy::Bottleneck::Quantum);
    std::optional<policy::PolicyParameters> mlp_params;
    if (enabled(cfg, backtest::kMlpAblation))
        mlp_params = load_matching(
            ablation.value_or(checkpoint.parent_path() / "checkpoint_mlp.json"),
            policy::Bottleneck::Classical);

    ensure_dir(out);
    write_resolved_config(cfg, out);
    const auto market = load_market(cfg);
    const auto episodes = env::select_months(rolling_episodes(cfg, market),
                                             cfg.validation_range.first,
                                             cfg.validation_range.last);
    if (episodes.empty())
        throw InsufficientDataError("no validation months in range");

    BacktestOutputs res;
    std::vector<std::vector<backtest::MonthlyReport>> reports;
    auto add = [&](backtest::StrategyRun run, const std::vector<env::MonthEpisode> &eps) {
        reports.push_back(backtest::summarize_months(run, eps));
        res.runs.push_back(std::move(run));
    };
    add(backtest::run_strategy(backtest::kQa3c, episodes,
                               backtest::policy_selector(qa3c_params)),
        episodes);
    if (mlp_params)
        add(backtest::run_strategy(backtest::kMlpAblation, episodes,
                                   backtest::policy_selector(*mlp_params)),
            episodes);
    if (enabled(cfg, backtest::kStaticClustering)) {
        const auto static_eps = backtest::static_clustering_episodes(
            market.prices, market.benchmark, cfg.episodes, cfg.validation_range.first,
            cfg.validation_range.last);
        backtest::StrategyRun run;
        if (cfg.static_selector == "policy") {
            run = backtest::run_strategy(backtest::kStaticClustering, static_eps,
                                         backtest::policy_selector(qa3c_params));
        } else {
            run = backtest::baseline_greedy_rolling(static_eps, true);
            run.name = backtest::kStaticClustering;
        }
        run.episode_set = "static";
        add(std::move(run), static_eps);
    }
    if (enabled(cfg, backtest::kGreedyRolling))
        add(backtest::baseline_greedy_rolling(episodes, true), episodes);
    if (enabled(cfg, backtest::kOracle))
        add(backtest::run_strategy(backtest::kOracle, episodes,
                                   backtest::oracle_selector()),
            episodes);

    backtest::emit_report(res.runs, reports, out);
    res.check = backtest::check_report_files(out);
    return res;
}

std::filesystem::path cmd_synth(const EngineConfig &cfg,
                                const std::filesystem::path &out) {
    ensure_dir(out);
    write_resolved_config(cfg, out);
    const auto path = out / "prices.csv";
    market::write_prices(path, market::generate_synthetic_market(cfg.synthetic));
    return path;
}

} // namespace qa3c::app
