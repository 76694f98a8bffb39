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
 * Asynchronous advantage actor-critic over monthly episodes.
 *
 * A ParameterStore holds the global network. Workers take a snapshot,
 * sample one episode and action, compute the single-step advantage
 * A = r - v(s) and the gradient against that snapshot, then apply the whole
 * clipped gradient to the store under an exclusive lock. Updates may be
 * computed against stale snapshots; each one lands atomically.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "qa3c/environment.hpp"
#include "qa3c/policy.hpp"

namespace qa3c::train {

struct TrainConfig {
    std::size_t epochs = 4500;
    std::size_t n_workers = 1;
    double learning_rate = 3e-3;
    policy::LossCoefficients coeffs;
    double grad_clip = 5.0; ///< <= 0 disables clipping
    std::uint64_t seed = 0;
    std::size_t eval_every = 500; ///< 0 disables the epoch callback

    void validate() const;
};

struct EpochStats {
    double mean_reward = 0.0;
    double mean_entropy = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    std::vector<std::size_t> action_counts;
};

struct TrainTrace {
    std::vector<EpochStats> epochs;

    /// `epoch,mean_reward,entropy,policy_loss,value_loss,action_0,...`
    [[nodiscard]] std::string to_csv() const;
    void write_csv(const std::filesystem::path &path) const;
};

/// Rescales `grad` in place so its global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_by_global_norm(policy::PolicyParameters &grad, double max_norm);

/// Global-norm clip then params -= lr * grad. Throws TrainingDivergedError on
/// a non-finite gradient.
void apply_gradients(policy::PolicyParameters &params,
                     policy::PolicyParameters grad, double learning_rate,
                     double grad_clip);

class ParameterStore {
  public:
    explicit ParameterStore(policy::PolicyParameters initial);

    [[nodiscard]] policy::PolicyParameters snapshot() const;
    void apply(const policy::PolicyParameters &grad, double learning_rate,
               double grad_clip);
    [[nodiscard]] std::size_t updates() const;

  private:
    mutable std::shared_mutex mutex_;
    policy::PolicyParameters params_;
    std::size_t updates_ = 0;
};

struct TrainResult {
    policy::PolicyParameters params;
    TrainTrace trace;
};

/// Called with the 1-based epoch number every `eval_every` epochs.
using EpochCallback =
    std::function<void(std::size_t epoch, const policy::PolicyParameters &)>;

/// With n_workers = 1 the run is bit-reproducible for a fixed seed.
[[nodiscard]] TrainResult train(const std::vector<env::MonthEpisode> &episodes,
                                const policy::PolicyParameters &initial,
                                const TrainConfig &cfg,
                                const env::RewardConfig &reward_cfg,
                                const EpochCallback &on_epoch = {});

enum class EvalMode { Greedy, Sampled };

[[nodiscard]] EvalMode parse_eval_mode(std::string_view text);

struct Evaluation {
    double mean_reward = 0.0;
    std::vector<std::size_t> actions;
    double optimal_pick_rate = 0.0;
};

[[nodiscard]] Evaluation evaluate_policy(const policy::PolicyParameters &params,
                                         const std::vector<env::MonthEpisode> &episodes,
                                         const env::RewardConfig &reward_cfg,
                                         EvalMode mode = EvalMode::Greedy,
                                         std::uint64_t seed = 0);

/// SplitMix64 step, used to derive independent worker seeds.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace qa3c::train
