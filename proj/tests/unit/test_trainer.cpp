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

#include <cmath>
#include <random>
#include <thread>

#include "qa3c/errors.hpp"
#include "qa3c/trainer.hpp"

using namespace qa3c;
using namespace qa3c::train;
using Catch::Matchers::WithinAbs;
using Eigen::VectorXd;

namespace {

policy::NetworkShape shape_k(std::size_t k,
                             policy::Bottleneck b = policy::Bottleneck::Quantum) {
    policy::NetworkShape s;
    s.k = k;
    s.h1 = 12;
    s.h2 = 8;
    s.n_qubits = 4;
    s.bottleneck = b;
    return s;
}

env::MonthEpisode bandit_episode(std::size_t k, std::size_t best, unsigned seed) {
    env::MonthEpisode ep;
    ep.month = {2022, 1};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 0.05);
    ep.state = VectorXd(static_cast<Eigen::Index>(4 * k + 2));
    for (auto &v : ep.state)
        v = n01(rng);
    ep.realized_returns = VectorXd::Constant(static_cast<Eigen::Index>(k), -0.01);
    ep.realized_returns(static_cast<Eigen::Index>(best)) = 0.02;
    ep.cluster_members.assign(k, {});
    return ep;
}

std::vector<env::MonthEpisode> random_episodes(std::size_t n, std::size_t k, unsigned seed) {
    std::vector<env::MonthEpisode> eps;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 0.05);
    for (std::size_t i = 0; i < n; ++i) {
        env::MonthEpisode ep;
        ep.month = {2020 + static_cast<int>(i / 12), static_cast<unsigned>(i % 12 + 1)};
        ep.state = VectorXd(static_cast<Eigen::Index>(4 * k + 2));
        for (auto &v : ep.state)
            v = n01(rng);
        ep.realized_returns = VectorXd(static_cast<Eigen::Index>(k));
        for (auto &v : ep.realized_returns)
            v = n01(rng);
        ep.cluster_members.assign(k, {});
        eps.push_back(ep);
    }
    return eps;
}

TrainConfig quick(std::size_t epochs, double lr, std::uint64_t seed = 0) {
    TrainConfig c;
    c.epochs = epochs;
    c.learning_rate = lr;
    c.seed = seed;
    c.eval_every = 0;
    return c;
}

} // namespace

TEST_CASE("two-armed bandit converges") {
    int wins = 0;
    for (unsigned seed = 0; seed < 5; ++seed) {
        const auto ep = bandit_episode(2, 0, seed);
        const auto init = policy::PolicyParameters::initialize(shape_k(2), seed);
        const auto res = train::train({ep}, init, quick(200, 0.05, seed), {});
        const auto out = policy::forward(res.params, ep.state);
        wins += out.probs(0) > 0.95;
        const auto ev = evaluate_policy(res.params, {ep}, {});
        CHECK(ev.optimal_pick_rate == 1.0);
        CHECK(ev.mean_reward == 1.0);
    }
    CHECK(wins == 5);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
    const auto init = policy::PolicyParameters::initialize(shape_k(3), 2);
    const auto res = train::train(random_episodes(6, 3, 1), init, quick(5, 0.0), {});
    CHECK(res.params.flatten() == init.flatten());
}

TEST_CASE("single-worker training is reproducible") {
    for (auto b : {policy::Bottleneck::Quantum, policy::Bottleneck::Classical}) {
        const auto eps = random_episodes(10, 3, 2);
        const auto init = policy::PolicyParameters::initialize(shape_k(3, b), 5);
        const auto a = train::train(eps, init, quick(15, 0.01, 9), {});
        const auto c = train::train(eps, init, quick(15, 0.01, 9), {});
        CHECK(a.trace.to_csv() == c.trace.to_csv());
        CHECK(a.params.flatten() == c.params.flatten());
        const auto d = train::train(eps, init, quick(15, 0.01, 10), {});
        CHECK(d.trace.to_csv() != a.trace.to_csv());
    }
}

TEST_CASE("trace shape and entropy sanity") {
    const auto eps = random_episodes(8, 4, 3);
    const auto init = policy::PolicyParameters::initialize(shape_k(4), 1);
    std::vector<std::size_t> called;
    auto cfg = quick(12, 0.02);
    cfg.eval_every = 5;
    const auto res = train::train(eps, init, cfg, {},
                                  [&](std::size_t e, const policy::PolicyParameters &) {
                                      called.push_back(e);
                                  });
    CHECK(called == std::vector<std::size_t>{5, 10});
    REQUIRE(res.trace.epochs.size() == 12);
    for (const auto &e : res.trace.epochs) {
        CHECK(e.mean_entropy <= std::log(4.0) + 1e-12);
        std::size_t total = 0;
        for (auto c : e.action_counts)
            total += c;
        CHECK(total == 8);
    }
    CHECK(res.trace.epochs.front().mean_entropy >= 0.99 * std::log(4.0));
    const auto csv = res.trace.to_csv();
    CHECK(csv.rfind("epoch,mean_reward,entropy,policy_loss,value_loss,action_0,action_1,"
                    "action_2,action_3\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
}

TEST_CASE("apply_gradients arithmetic") {
    const auto shape = shape_k(3);
    auto p = policy::PolicyParameters::initialize(shape, 1);
    const auto before = p.flatten();
    apply_gradients(p, policy::PolicyParameters::zeros(shape), 0.1, 5.0);
    CHECK(p.flatten() == before);

    auto g = policy::PolicyParameters::zeros(shape);
    VectorXd flat = VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
    flat(0) = 6.0;
    flat(flat.size() - 1) = 8.0; // norm 10
    g.unflatten(flat);
    apply_gradients(p, g, 0.01, 1.0);
    CHECK_THAT((p.flatten() - before).norm(), WithinAbs(0.01, 1e-15));

    // Unclipped SGD on fixed gradients is additive.
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01(0.0, 0.1);
    auto g1 = g, g2 = g;
    VectorXd f1(flat.size()), f2(flat.size());
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
        f1(i) = n01(rng);
        f2(i) = n01(rng);
    }
    g1.unflatten(f1);
    g2.unflatten(f2);
    auto seq = policy::PolicyParameters::initialize(shape, 2);
    auto once = seq;
    apply_gradients(seq, g1, 0.05, 0.0);
    apply_gradients(seq, g2, 0.05, 0.0);
    g1.unflatten(f1 + f2);
    apply_gradients(once, g1, 0.05, 0.0);
    CHECK((seq.flatten() - once.flatten()).cwiseAbs().maxCoeff() < 1e-15);

    flat(2) = std::numeric_limits<double>::quiet_NaN();
    g.unflatten(flat);
    CHECK_THROWS_AS(apply_gradients(p, g, 0.01, 1.0), TrainingDivergedError);
}

TEST_CASE("parameter store updates are linearizable") {
    const auto shape = shape_k(3);
    const auto init = policy::PolicyParameters::initialize(shape, 4);
    ParameterStore store(init);
    constexpr int kThreads = 4, kPer = 50;
    auto g = policy::PolicyParameters::zeros(shape);
    g.unflatten(VectorXd::LinSpaced(static_cast<Eigen::Index>(g.size()), -1.0, 1.0) * 0.01);
    {
        std::vector<std::jthread> ts;
        for (int t = 0; t < kThreads; ++t)
            ts.emplace_back([&] {
                for (int i = 0; i < kPer; ++i) {
                    const auto snap = store.snapshot();
                    CHECK(snap.all_finite());
                    store.apply(g, 0.1, 0.0);
                }
            });
    }
    CHECK(store.updates() == kThreads * kPer);
    const VectorXd expect = init.flatten() - 0.1 * kThreads * kPer * g.flatten();
    CHECK((store.snapshot().flatten() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("multi-worker training runs every episode once per epoch") {
    const auto eps = random_episodes(9, 3, 6);
    const auto init = policy::PolicyParameters::initialize(shape_k(3), 6);
    auto cfg = quick(4, 0.01, 2);
    cfg.n_workers = 3;
    const auto res = train::train(eps, init, cfg, {});
    REQUIRE(res.trace.epochs.size() == 4);
    for (const auto &e : res.trace.epochs) {
        std::size_t total = 0;
        for (auto c : e.action_counts)
            total += c;
        CHECK(total == 9);
    }
    CHECK(res.params.all_finite());
}

TEST_CASE("divergence names the epoch and episode") {
    auto eps = random_episodes(3, 3, 7);
    eps[1].state(0) = std::numeric_limits<double>::infinity();
    const auto init = policy::PolicyParameters::initialize(shape_k(3, policy::Bottleneck::Classical), 1);
    try {
        (void)train::train(eps, init, quick(2, 0.01), {});
        FAIL("expected divergence");
    } catch (const TrainingDivergedError &e) {
        const std::string what = e.what();
        CHECK(what.find("epoch 1") != std::string::npos);
        CHECK(what.find("episode 1") != std::string::npos);
    }
}

TEST_CASE("training input checks") {
    const auto init = policy::PolicyParameters::initialize(shape_k(3), 1);
    CHECK_THROWS_AS(train::train({}, init, quick(2, 0.01), {}), InsufficientDataError);
    CHECK_THROWS_AS(train::train(random_episodes(2, 4, 1), init, quick(2, 0.01), {}),
                    ConfigError);
    CHECK_THROWS_AS(quick(0, 0.01).validate(), ConfigError);
    CHECK_THROWS_AS(quick(1, -0.01).validate(), ConfigError);
}

TEST_CASE("uniform policy picks the optimum at the base rate") {
    const auto eps = random_episodes(3000, 5, 8);
    const auto zero = policy::PolicyParameters::zeros(shape_k(5));
    const auto ev = evaluate_policy(zero, eps, {});
    const double sigma = std::sqrt(0.2 * 0.8 / 3000.0);
    CHECK(std::abs(ev.optimal_pick_rate - 0.2) < 3 * sigma);
    const auto sampled = evaluate_policy(zero, eps, {}, EvalMode::Sampled, 3);
    CHECK(std::abs(sampled.optimal_pick_rate - 0.2) < 3 * sigma);
    CHECK(ev.actions.size() == 3000);
    CHECK(parse_eval_mode("") == EvalMode::Greedy);
    CHECK(parse_eval_mode("sampled") == EvalMode::Sampled);
}
