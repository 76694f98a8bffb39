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
#include "qa3c/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "qa3c/backtest.hpp"
#include "qa3c/errors.hpp"

namespace qa3c::app {

using nlohmann::json;

namespace {

const std::vector<std::string> kKnownStrategies = {
    backtest::kQa3c, backtest::kMlpAblation, backtest::kStaticClustering,
    backtest::kGreedyRolling, backtest::kOracle};

void merge_into(json &base, const json &user, const std::string &path) {
    if (!user.is_object())
        throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    for (const auto &[key, value] : user.items()) {
        const std::string field = path.empty() ? key : path + "." + key;
        if (!base.contains(key))
            throw ConfigError(field, "unknown key");
        if (base[key].is_object())
            merge_into(base[key], value, field);
        else
            base[key] = value;
    }
}

/// Typed access that reports the dotted key on failure.
class Reader {
  public:
    explicit Reader(const json &doc) : doc_(doc) {}

    template <class T> T get(const std::string &field) const {
        try {
            return node(field).get<T>();
        } catch (const json::exception &) {
            throw ConfigError(field, "wrong type");
        }
    }
    std::size_t count(const std::string &field) const {
        const auto &n = node(field);
        if (!n.is_number_integer() || n.get<long long>() < 0)
            throw ConfigError(field, "expected a non-negative integer");
        return n.get<std::size_t>();
    }
    market::YearMonth month(const std::string &field) const {
        try {
            return market::YearMonth::parse(get<std::string>(field));
        } catch (const std::invalid_argument &e) {
            throw ConfigError(field, e.what());
        }
    }

  private:
    const json &node(const std::string &field) const {
        const json *cur = &doc_;
        std::size_t start = 0;
        while (true) {
            const auto dot = field.find('.', start);
            cur = &cur->at(field.substr(start, dot - start));
            if (dot == std::string::npos)
                return *cur;
            start = dot + 1;
        }
    }
    const json &doc_;
};

} // namespace

policy::NetworkShape EngineConfig::shape(policy::Bottleneck b) const {
    policy::NetworkShape s = network;
    s.bottleneck = b;
    return s;
}

std::uint64_t EngineConfig::init_seed(policy::Bottleneck b) const {
    return train::mix_seed(train.seed, b == policy::Bottleneck::Quantum ? 1001 : 1002);
}

json default_config_json() {
    const market::SyntheticMarketConfig syn;
    return {
        {"data", {{"prices", ""}, {"benchmark", ""}}},
        {"train_range", {{"start", "2021-08"}, {"end", "2024-08"}}},
        {"validation_range", {{"start", "2024-12"}, {"end", "2025-08"}}},
        {"K", 5},
        {"L", 20},
        {"clustering",
         {{"standardize", false}, {"seed", 0}, {"max_iter", 300}, {"tol", 1e-10}}},
        {"quantum", {{"n_qubits", 6}, {"n_layers", 2}}},
        {"policy",
         {{"h1", 32}, {"h2", 16}, {"tau", policy::kDefaultTau}, {"band_width", 0}}},
        {"reward", {{"scheme", "relative_optimality"}, {"epsilon", 1e-8}}},
        {"train",
         {{"epochs", 4500},
          {"n_workers", 1},
          {"lr", 3e-3},
          {"c_v", 0.5},
          {"c_e", 0.01},
          {"grad_clip", 5.0},
          {"seed", 0},
          {"eval_every", 500},
          {"ablation", true}}},
        {"synthetic",
         {{"n_stocks", syn.n_stocks},
          {"n_days", syn.n_days},
          {"n_regimes", syn.n_regimes},
          {"regime_length", syn.regime_length},
          {"group_drifts", syn.group_drifts},
          {"group_vols", syn.group_vols},
          {"seed", syn.seed},
          {"trading_days_per_month", syn.trading_days_per_month},
          {"start_month", syn.start_month.to_string()}}},
        {"backtest",
         {{"strategies", kKnownStrategies}, {"static_selector", "policy"}}},
        {"out", "out"}};
}

json load_config_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("config not found: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ParseError(path.string(), 0, e.what());
    }
}

void apply_override(json &doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ConfigError(std::string(assignment), "override must be key=value");
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error &) {
        value = raw;
    }
    json *cur = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot - start);
        if (cur->is_null())
            *cur = json::object();
        if (!cur->is_object())
            throw ConfigError(key, "not an object path");
        if (dot == std::string::npos) {
            (*cur)[part] = value;
            return;
        }
        cur = &(*cur)[part];
        start = dot + 1;
    }
}

EngineConfig parse_config(const json &user) {
    json doc = default_config_json();
    merge_into(doc, user, "");
    const Reader r(doc);

    EngineConfig c;
    c.prices_path = r.get<std::string>("data.prices");
    c.benchmark_path = r.get<std::string>("data.benchmark");
    c.train_range = {r.month("train_range.start"), r.month("train_range.end")};
    c.validation_range = {r.month("validation_range.start"),
                          r.month("validation_range.end")};
    if (c.train_range.last < c.train_range.first)
        throw ConfigError("train_range", "end precedes start");
    if (c.validation_range.last < c.validation_range.first)
        throw ConfigError("validation_range", "end precedes start");
    if (!(c.train_range.last < c.validation_range.first))
        throw ConfigError("validation_range",
                          "must start after the training range ends");

    c.episodes.k = r.count("K");
    c.episodes.window = r.count("L");
    c.episodes.standardize = r.get<bool>("clustering.standardize");
    c.episodes.seed = r.get<std::uint64_t>("clustering.seed");
    c.episodes.kmeans.max_iter = r.count("clustering.max_iter");
    c.episodes.kmeans.tol = r.get<double>("clustering.tol");
    c.episodes.validate();

    c.network.k = c.episodes.k;
    c.network.n_qubits = r.count("quantum.n_qubits");
    c.network.n_layers = r.count("quantum.n_layers");
    c.network.h1 = r.count("policy.h1");
    c.network.h2 = r.count("policy.h2");
    c.network.band_width = r.count("policy.band_width");
    c.network.validate();
    c.tau = r.get<double>("policy.tau");
    if (!(c.tau > 0.0) || !std::isfinite(c.tau))
        throw ConfigError("policy.tau", "temperature must be positive");

    c.reward.scheme = env::parse_reward_scheme(r.get<std::string>("reward.scheme"));
    c.reward.epsilon = r.get<double>("reward.epsilon");
    c.reward.validate();

    c.train.epochs = r.count("train.epochs");
    c.train.n_workers = r.count("train.n_workers");
    c.train.learning_rate = r.get<double>("train.lr");
    c.train.coeffs.value = r.get<double>("train.c_v");
    c.train.coeffs.entropy = r.get<double>("train.c_e");
    c.train.grad_clip = r.get<double>("train.grad_clip");
    c.train.seed = r.get<std::uint64_t>("train.seed");
    c.train.eval_every = r.count("train.eval_every");
    c.train.validate();
    c.train_ablation = r.get<bool>("train.ablation");

    auto &s = c.synthetic;
    s.n_stocks = r.count("synthetic.n_stocks");
    s.n_days = r.count("synthetic.n_days");
    s.n_regimes = r.count("synthetic.n_regimes");
    s.regime_length = r.count("synthetic.regime_length");
    s.group_drifts = r.get<std::vector<std::vector<double>>>("synthetic.group_drifts");
    s.group_vols = r.get<std::vector<double>>("synthetic.group_vols");
    s.seed = r.get<std::uint64_t>("synthetic.seed");
    s.trading_days_per_month = r.count("synthetic.trading_days_per_month");
    s.start_month = r.month("synthetic.start_month");
    if (c.prices_path.empty())
        s.validate();

    c.strategies = r.get<std::vector<std::string>>("backtest.strategies");
    for (const auto &name : c.strategies)
        if (std::find(kKnownStrategies.begin(), kKnownStrategies.end(), name) ==
            kKnownStrategies.end())
            throw ConfigError("backtest.strategies", "unknown strategy '" + name + "'");
    c.static_selector = r.get<std::string>("backtest.static_selector");
    if (c.static_selector != "policy" && c.static_selector != "greedy")
        throw ConfigError("backtest.static_selector", "expected 'policy' or 'greedy'");
    c.out_dir = r.get<std::string>("out");
    return c;
}

json to_json(const EngineConfig &c) {
    const auto &s = c.synthetic;
    return {
        {"data", {{"prices", c.prices_path}, {"benchmark", c.benchmark_path}}},
        {"train_range",
         {{"start", c.train_range.first.to_string()},
          {"end", c.train_range.last.to_string()}}},
        {"validation_range",
         {{"start", c.validation_range.first.to_string()},
          {"end", c.validation_range.last.to_string()}}},
        {"K", c.episodes.k},
        {"L", c.episodes.window},
        {"clustering",
         {{"standardize", c.episodes.standardize},
          {"seed", c.episodes.seed},
          {"max_iter", c.episodes.kmeans.max_iter},
          {"tol", c.episodes.kmeans.tol}}},
        {"quantum", {{"n_qubits", c.network.n_qubits}, {"n_layers", c.network.n_layers}}},
        {"policy",
         {{"h1", c.network.h1},
          {"h2", c.network.h2},
          {"tau", c.tau},
          {"band_width", c.network.band_width}}},
        {"reward",
         {{"scheme", std::string(env::to_string(c.reward.scheme))},
          {"epsilon", c.reward.epsilon}}},
        {"train",
         {{"epochs", c.train.epochs},
          {"n_workers", c.train.n_workers},
          {"lr", c.train.learning_rate},
          {"c_v", c.train.coeffs.value},
          {"c_e", c.train.coeffs.entropy},
          {"grad_clip", c.train.grad_clip},
          {"seed", c.train.seed},
          {"eval_every", c.train.eval_every},
          {"ablation", c.train_ablation}}},
        {"synthetic",
         {{"n_stocks", s.n_stocks},
          {"n_days", s.n_days},
          {"n_regimes", s.n_regimes},
          {"regime_length", s.regime_length},
          {"group_drifts", s.group_drifts},
          {"group_vols", s.group_vols},
          {"seed", s.seed},
          {"trading_days_per_month", s.trading_days_per_month},
          {"start_month", s.start_month.to_string()}}},
        {"backtest",
         {{"strategies", c.strategies}, {"static_selector", c.static_selector}}},
        {"out", c.out_dir}};
}

} // namespace qa3c::app
