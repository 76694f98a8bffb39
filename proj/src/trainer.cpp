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
#include "qa3c/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "qa3c/errors.hpp"

namespace qa3c::train {

namespace {

struct WorkerTally {
    double reward = 0.0;
    double entropy = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    std::size_t steps = 0;
    std::vector<std::size_t> actions;
};

struct WorkerContext {
    const std::vector<env::MonthEpisode> &episodes;
    const TrainConfig &cfg;
    const env::RewardConfig &reward_cfg;
    ParameterStore &store;
};

void run_worker_epoch(const WorkerContext &ctx, std::size_t epoch,
                      std::size_t worker, policy::Rng &rng, WorkerTally &tally) {
    std::vector<std::size_t> shard;
    for (std::size_t i = worker; i < ctx.episodes.size(); i += ctx.cfg.n_workers)
        shard.push_back(i);
    std::shuffle(shard.begin(), shard.end(), rng);

    for (std::size_t idx : shard) {
        const auto &ep = ctx.episodes[idx];
        const auto snap = ctx.store.snapshot();
        const auto out = policy::forward(snap, ep.state);
        const std::size_t action = policy::sample_action(out, rng);
        const auto result = env::step(ep, action, ctx.reward_cfg);
        const double advantage = result.reward - out.value;
        auto g = policy::backward(snap, out, action, advantage, result.reward,
                                  ctx.cfg.coeffs);
        if (!std::isfinite(g.loss.total) || !g.grad.all_finite())
            throw TrainingDivergedError(fmt::format(
                "non-finite loss at epoch {}, episode {} ({})", epoch + 1, idx,
                ep.month.to_string()));
        ctx.store.apply(g.grad, ctx.cfg.learning_rate, ctx.cfg.grad_clip);

        tally.reward += result.reward;
        tally.entropy += g.loss.entropy;
        tally.policy_loss += g.loss.policy;
        tally.value_loss += g.loss.value;
        ++tally.steps;
        ++tally.actions[action];
    }
}

} // namespace

void TrainConfig::validate() const {
    if (epochs < 1)
        throw ConfigError("train.epochs", "must be at least 1");
    if (n_workers < 1)
        throw ConfigError("train.n_workers", "must be at least 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("train.lr", "must be a finite non-negative number");
    if (!std::isfinite(grad_clip))
        throw ConfigError("train.grad_clip", "must be finite");
    if (!(coeffs.value >= 0.0))
        throw ConfigError("train.c_v", "must be non-negative");
    if (!(coeffs.entropy >= 0.0))
        throw ConfigError("train.c_e", "must be non-negative");
}

std::string TrainTrace::to_csv() const {
    std::string out = "epoch,mean_reward,entropy,policy_loss,value_loss";
    const std::size_t k = epochs.empty() ? 0 : epochs.front().action_counts.size();
    for (std::size_t a = 0; a < k; ++a)
        out += fmt::format(",action_{}", a);
    out += '\n';
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        const auto &s = epochs[e];
        out += fmt::format("{},{},{},{},{}", e + 1, s.mean_reward, s.mean_entropy,
                           s.policy_loss, s.value_loss);
        for (auto c : s.action_counts)
            out += fmt::format(",{}", c);
        out += '\n';
    }
    return out;
}

void TrainTrace::write_csv(const std::filesystem::path &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << to_csv();
}

double clip_by_global_norm(policy::PolicyParameters &grad, double max_norm) {
    const double norm = std::sqrt(grad.squared_norm());
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        grad.for_each([&](std::string_view, Eigen::MatrixXd &m) { m *= scale; });
    }
    return norm;
}

void apply_gradients(policy::PolicyParameters &params,
                     policy::PolicyParameters grad, double learning_rate,
                     double grad_clip) {
    if (!grad.all_finite())
        throw TrainingDivergedError("apply_gradients: non-finite gradient rejected");
    clip_by_global_norm(grad, grad_clip);
    params.axpy(-learning_rate, grad);
}

ParameterStore::ParameterStore(policy::PolicyParameters initial)
    : params_(std::move(initial)) {}

policy::PolicyParameters ParameterStore::snapshot() const {
    std::shared_lock lock(mutex_);
    return params_;
}

void ParameterStore::apply(const policy::PolicyParameters &grad,
                           double learning_rate, double grad_clip) {
    std::unique_lock lock(mutex_);
    apply_gradients(params_, grad, learning_rate, grad_clip);
    ++updates_;
}

std::size_t ParameterStore::updates() const {
    std::shared_lock lock(mutex_);
    return updates_;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

TrainResult train(const std::vector<env::MonthEpisode> &episodes,
                  const policy::PolicyParameters &initial, const TrainConfig &cfg,
                  const env::RewardConfig &reward_cfg,
                  const EpochCallback &on_epoch) {
    cfg.validate();
    reward_cfg.validate();
    if (episodes.empty())
        throw InsufficientDataError("train: no training episodes");
    const std::size_t k = initial.shape.k;
    for (const auto &ep : episodes)
        if (ep.k() != k)
            throw ConfigError("K", fmt::format("episode {} has {} clusters, network "
                                               "expects {}",
                                               ep.month.to_string(), ep.k(), k));

    ParameterStore store(initial);
    const WorkerContext ctx{episodes, cfg, reward_cfg, store};
    std::vector<policy::Rng> rngs;
    for (std::size_t w = 0; w < cfg.n_workers; ++w)
        rngs.emplace_back(mix_seed(cfg.seed, w));

    TrainResult result;
    result.trace.epochs.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<WorkerTally> tallies(cfg.n_workers);
        for (auto &t : tallies)
            t.actions.assign(k, 0);

        if (cfg.n_workers == 1) {
            run_worker_epoch(ctx, epoch, 0, rngs[0], tallies[0]);
        } else {
            std::vector<std::exception_ptr> errors(cfg.n_workers);
            {
                std::vector<std::jthread> workers;
                for (std::size_t w = 0; w < cfg.n_workers; ++w)
                    workers.emplace_back([&, w] {
                        try {
                            run_worker_epoch(ctx, epoch, w, rngs[w], tallies[w]);
                        } catch (...) {
                            errors[w] = std::current_exception();
                        }
                    });
            }
            for (auto &e : errors)
                if (e)
                    std::rethrow_exception(e);
        }

        EpochStats stats;
        stats.action_counts.assign(k, 0);
        std::size_t steps = 0;
        for (const auto &t : tallies) {
            stats.mean_reward += t.reward;
            stats.mean_entropy += t.entropy;
            stats.policy_loss += t.policy_loss;
            stats.value_loss += t.value_loss;
            steps += t.steps;
            for (std::size_t a = 0; a < k; ++a)
                stats.action_counts[a] += t.actions[a];
        }
        const auto denom = static_cast<double>(std::max<std::size_t>(steps, 1));
        stats.mean_reward /= denom;
        stats.mean_entropy /= denom;
        stats.policy_loss /= denom;
        stats.value_loss /= denom;
        result.trace.epochs.push_back(std::move(stats));

        if (on_epoch && cfg.eval_every > 0 && (epoch + 1) % cfg.eval_every == 0)
            on_epoch(epoch + 1, store.snapshot());
    }
    result.params = store.snapshot();
    return result;
}

EvalMode parse_eval_mode(std::string_view text) {
    if (text.empty() || text == "greedy" || text == "greedy_argmax")
        return EvalMode::Greedy;
    if (text == "sampled")
        return EvalMode::Sampled;
    throw ConfigError("eval.mode", "expected 'greedy' or 'sampled'");
}

Evaluation evaluate_policy(const policy::PolicyParameters &params,
                           const std::vector<env::MonthEpisode> &episodes,
                           const env::RewardConfig &reward_cfg, EvalMode mode,
                           std::uint64_t seed) {
    Evaluation ev;
    policy::Rng rng(seed);
    std::size_t optimal = 0;
    for (const auto &ep : episodes) {
        const auto out = policy::forward(params, ep.state);
        const std::size_t a = mode == EvalMode::Greedy ? policy::greedy_action(out)
                                                       : policy::sample_action(out, rng);
        const auto r = env::step(ep, a, reward_cfg);
        ev.mean_reward += r.reward;
        if (r.chosen_return == r.best_return)
            ++optimal;
        ev.actions.push_back(a);
    }
    if (!episodes.empty()) {
        ev.mean_reward /= static_cast<double>(episodes.size());
        ev.optimal_pick_rate =
            static_cast<double>(optimal) / static_cast<double>(episodes.size());
    }
    return ev;
}

} // namespace qa3c::train
