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
// qa3c command-line entry point: train, backtest, synth, selfcheck.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qa3c/app.hpp"
#include "qa3c/errors.hpp"
#include "qa3c/selfcheck.hpp"

namespace {

struct GlobalFlags {
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string log_level = "info";
};

qa3c::app::EngineConfig resolve(const GlobalFlags &g) {
    auto doc = g.config.empty() ? nlohmann::json::object()
                                : qa3c::app::load_config_json(g.config);
    for (const auto &kv : g.overrides)
        qa3c::app::apply_override(doc, kv);
    if (g.seed)
        qa3c::app::apply_override(doc, fmt::format("train.seed={}", *g.seed));
    if (!g.out.empty())
        doc["out"] = g.out;
    return qa3c::app::parse_config(doc);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App cli{"Cluster-selection agent with a variational-circuit policy bottleneck"};
    cli.require_subcommand(1);
    GlobalFlags g;
    cli.add_option("--config", g.config, "JSON config file");
    cli.add_option("--out", g.out, "output directory");
    cli.add_option("--set", g.overrides, "override a scalar config key (key.path=value)");
    cli.add_option("--seed", g.seed, "training seed (train.seed)");
    cli.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off");

    auto *train = cli.add_subcommand("train", "train the circuit policy (and the ablation)");
    auto *bt = cli.add_subcommand("backtest", "run the policy and baselines over validation");
    std::string checkpoint;
    std::string ablation;
    bt->add_option("--checkpoint", checkpoint, "checkpoint.json from train")->required();
    bt->add_option("--ablation-checkpoint", ablation,
                   "classical-bottleneck checkpoint (default: next to --checkpoint)");
    auto *synth = cli.add_subcommand("synth", "write the synthetic market as prices.csv");
    auto *check = cli.add_subcommand("selfcheck", "run the built-in invariant suites");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return cli.exit(e) == 0 ? 0 : 1;
    }
    spdlog::set_level(spdlog::level::from_str(g.log_level));
    spdlog::set_default_logger(spdlog::stderr_color_mt("qa3c"));

    try {
        if (check->parsed()) {
            const auto results = qa3c::selfcheck::run_all();
            std::cout << qa3c::selfcheck::format_report(results);
            return qa3c::selfcheck::all_passed(results) ? 0 : 3;
        }
        const auto cfg = resolve(g);
        const std::filesystem::path out = cfg.out_dir;
        if (train->parsed()) {
            const auto res = qa3c::app::cmd_train(cfg, out);
            std::cout << fmt::format("trained on {} months; checkpoint {}\n",
                                     res.train_months, res.checkpoint.string());
        } else if (bt->parsed()) {
            std::optional<std::filesystem::path> abl;
            if (!ablation.empty())
                abl = ablation;
            const auto res = qa3c::app::cmd_backtest(cfg, checkpoint, abl, out);
            for (const auto &run : res.runs)
                std::cout << fmt::format("{:<18} cumulative {:+.4f}  optimal picks {:.3f}\n",
                                         run.name, run.cumulative.back(),
                                         run.optimal_pick_rate);
            if (!res.check.ok()) {
                for (const auto &f : res.check.failures)
                    std::cerr << "report check: " << f << '\n';
                return 3;
            }
        } else if (synth->parsed()) {
            std::cout << qa3c::app::cmd_synth(cfg, out).string() << '\n';
        }
        return 0;
    } catch (const qa3c::Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
