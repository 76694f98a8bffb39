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
#include "qa3c/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <fmt/format.h>

#include "qa3c/clustering.hpp"
#include "qa3c/environment.hpp"
#include "qa3c/kernels.hpp"
#include "qa3c/policy.hpp"
#include "qa3c/quantum.hpp"

namespace qa3c::selfcheck {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SuiteResult gradient_suite(policy::Bottleneck b) {
    constexpr double kStep = 1e-5;
    constexpr double kFloor = 1e-4;
    SuiteResult r{fmt::format("gradient_fd_{}", policy::to_string(b)), true, 0.0, 1e-5,
                  ""};
    policy::NetworkShape shape{.k = 3, .h1 = 8, .h2 = 6, .n_qubits = 4, .n_layers = 2,
                               .bottleneck = b};
    const policy::LossCoefficients coeffs{0.5, 0.01};
    std::size_t coords = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto params = policy::PolicyParameters::initialize(shape, seed);
        std::mt19937_64 rng(seed * 7919);
        std::normal_distribution<double> n01(0.0, 0.05);
        VectorXd state(shape.state_dim());
        for (auto &v : state)
            v = n01(rng);
        const std::size_t action = seed % shape.k;
        const double adv = 0.7, target = 0.3;
        const auto cache = policy::forward(params, state);
        const auto grad = policy::backward(params, cache, action, adv, target, coeffs);
        const VectorXd analytic = grad.grad.flatten();
        VectorXd flat = params.flatten();
        auto probe = params;
        auto eval = [&](const VectorXd &p) {
            probe.unflatten(p);
            return policy::loss(policy::forward(probe, state), action, adv, target, coeffs)
                .total;
        };
        for (Eigen::Index i = 0; i < flat.size(); ++i) {
            const double keep = flat[i];
            flat[i] = keep + kStep;
            const double up = eval(flat);
            flat[i] = keep - kStep;
            const double down = eval(flat);
            flat[i] = keep;
            const double numeric = (up - down) / (2 * kStep);
            const double scale =
                std::max({std::abs(numeric), std::abs(analytic[i]), kFloor});
            r.max_error = std::max(r.max_error, std::abs(numeric - analytic[i]) / scale);
            ++coords;
        }
    }
    r.passed = r.max_error <= r.tolerance;
    r.detail = fmt::format("{} coordinates, 3 seeds", coords);
    return r;
}

SuiteResult quantum_suite() {
    SuiteResult r{"quantum_norm_analytic", true, 0.0, 1e-10, ""};
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> angle(-quantum::kPi, quantum::kPi);
    std::uniform_real_distribution<double> xin(-0.95, 0.95);
    for (int trial = 0; trial < 20; ++trial) {
        quantum::CircuitSpec spec = quantum::CircuitSpec::zeros(5, 3);
        for (auto &t : spec.theta)
            t = angle(rng);
        VectorXd x(5);
        for (auto &v : x)
            v = xin(rng);
        auto st = quantum::encode(x);
        quantum::apply_variational(st, spec);
        r.max_error = std::max(r.max_error, std::abs(st.norm() - 1.0));
    }
    for (int i = 0; i < 100; ++i) {
        const double x = -0.99 + 1.98 * i / 99.0;
        const double theta = 0.37 * i - 5.0;
        quantum::QuantumState st(1);
        st.apply_ry(0, quantum::kPi * x);
        st.apply_ry(0, theta);
        const double z = quantum::expectations_z(st)[0];
        r.max_error = std::max(r.max_error, std::abs(z - std::cos(quantum::kPi * x + theta)));
    }
    r.passed = r.max_error <= r.tolerance;
    r.detail = "20 random circuits, 100-point single-qubit grid";
    return r;
}

SuiteResult reward_suite() {
    SuiteResult r{"reward_bounds", true, 0.0, 1e-9, ""};
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01(0.0, 0.05);
    int violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> ret(2 + trial % 7);
        for (auto &v : ret)
            v = n01(rng);
        const auto best = static_cast<std::size_t>(
            std::max_element(ret.begin(), ret.end()) - ret.begin());
        for (std::size_t a = 0; a < ret.size(); ++a) {
            const double rew = env::reward_relative_optimality(a, ret, 1e-8);
            if (rew > 1.0 || rew < -1.0 - r.tolerance)
                ++violations;
            if (a == best)
                r.max_error = std::max(r.max_error, std::abs(rew - 1.0));
        }
    }
    // Hand-computed: returns {0.10, 0.05, 0.00} give {1, -0.25, -(1 - 0)^2}.
    const std::vector<double> worked{0.10, 0.05, 0.00};
    const double expect[] = {1.0, -0.25, -1.0};
    for (std::size_t a = 0; a < 3; ++a)
        r.max_error = std::max(
            r.max_error, std::abs(env::reward_relative_optimality(a, worked, 1e-12) - expect[a]));
    r.passed = violations == 0 && r.max_error <= r.tolerance;
    r.detail = fmt::format("{} bound violations", violations);
    return r;
}

// Minimum inertia over every labelling of n points into k non-empty groups.
double exhaustive_inertia(const MatrixXd &pts, std::size_t k) {
    const auto n = static_cast<std::size_t>(pts.rows());
    std::vector<int> labels(n, 0);
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
        if (i == n) {
            if (static_cast<std::size_t>(used) != k)
                return;
            double total = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(pts.cols());
                int cnt = 0;
                for (std::size_t j = 0; j < n; ++j)
                    if (labels[j] == static_cast<int>(c)) {
                        mean += pts.row(static_cast<Eigen::Index>(j));
                        ++cnt;
                    }
                mean /= cnt;
                for (std::size_t j = 0; j < n; ++j)
                    if (labels[j] == static_cast<int>(c))
                        total += (pts.row(static_cast<Eigen::Index>(j)) - mean).squaredNorm();
            }
            best = std::min(best, total);
            return;
        }
        for (int c = 0; c <= std::min(used, static_cast<int>(k) - 1); ++c) {
            labels[i] = c;
            rec(i + 1, std::max(used, c + 1));
        }
    };
    rec(0, 0);
    return best;
}

SuiteResult kmeans_suite() {
    SuiteResult r{"kmeans_oracle", true, 0.0, 1e-9, ""};
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01(0.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 6; ++trial) {
        // Three well-separated blobs of three points each.
        MatrixXd pts(9, 3);
        for (int i = 0; i < 9; ++i)
            for (int c = 0; c < 3; ++c)
                pts(i, c) = 10.0 * (i / 3) * (c == trial % 3 ? 1.0 : 0.3) + 0.2 * n01(rng);
        const auto fit = cluster::kmeans_fit(pts, 3, static_cast<std::uint64_t>(trial));
        const double oracle = exhaustive_inertia(pts, 3);
        r.max_error = std::max(r.max_error, std::abs(fit.inertia - oracle) / std::max(1.0, oracle));
        for (std::size_t h = 1; h < fit.inertia_history.size(); ++h)
            if (fit.inertia_history[h] > fit.inertia_history[h - 1] + 1e-12)
                r.max_error = std::max(r.max_error,
                                       fit.inertia_history[h] - fit.inertia_history[h - 1]);
        ++checked;
    }
    r.passed = r.max_error <= r.tolerance;
    r.detail = fmt::format("{} fixtures against exhaustive partitions", checked);
    return r;
}

SuiteResult kernel_suite() {
    SuiteResult r{"kernel_parity", true, 0.0, 1e-12, ""};
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01(0.0, 1.0);
    constexpr std::size_t kQubits = 15;
    std::vector<kernels::Complex> a(std::size_t{1} << kQubits);
    for (auto &v : a)
        v = {n01(rng), n01(rng)};
    auto b = a;
    for (std::size_t q = 0; q < kQubits; q += 3) {
        const auto g = quantum::ry_gate(0.3 + q);
        kernels::apply_gate(a, q, g);
        kernels::reference::apply_gate(b, q, g);
        kernels::apply_cnot(a, q, (q + 1) % kQubits);
        kernels::reference::apply_cnot(b, q, (q + 1) % kQubits);
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        r.max_error = std::max(r.max_error, std::abs(a[i] - b[i]));
    const auto za = kernels::expectation_z(a, kQubits);
    const auto zb = kernels::reference::expectation_z(b, kQubits);
    for (std::size_t q = 0; q < kQubits; ++q)
        r.max_error = std::max(r.max_error, std::abs(za[q] - zb[q]) / a.size());

    MatrixXd pts = MatrixXd::NullaryExpr(5000, 3, [&] { return n01(rng); });
    MatrixXd cen = MatrixXd::NullaryExpr(6, 3, [&] { return n01(rng); });
    std::vector<int> la(5000), lb(5000);
    std::vector<double> da(5000), db(5000);
    kernels::assign_nearest(pts, cen, la, da);
    kernels::reference::assign_nearest(pts, cen, lb, db);
    int mismatched = 0;
    for (std::size_t i = 0; i < la.size(); ++i) {
        mismatched += la[i] != lb[i];
        r.max_error = std::max(r.max_error, std::abs(da[i] - db[i]));
    }
    r.passed = mismatched == 0 && r.max_error <= r.tolerance;
    r.detail = fmt::format("{} label mismatches", mismatched);
    return r;
}

} // namespace

std::vector<SuiteResult> run_all() {
    const std::vector<std::pair<std::string, std::function<SuiteResult()>>> suites{
        {"gradient_fd_quantum", [] { return gradient_suite(policy::Bottleneck::Quantum); }},
        {"gradient_fd_classical",
         [] { return gradient_suite(policy::Bottleneck::Classical); }},
        {"quantum_norm_analytic", quantum_suite},
        {"reward_bounds", reward_suite},
        {"kmeans_oracle", kmeans_suite},
        {"kernel_parity", kernel_suite},
    };
    std::vector<SuiteResult> out;
    for (const auto &[name, fn] : suites) {
        try {
            out.push_back(fn());
        } catch (const std::exception &e) {
            out.push_back({name, false, 0.0, 0.0, std::string("threw: ") + e.what()});
        }
    }
    return out;
}

std::string format_report(const std::vector<SuiteResult> &results) {
    std::string s;
    for (const auto &r : results)
        s += fmt::format("{}  {:<24} max_error={:.3e} tol={:.0e}  {}\n",
                         r.passed ? "PASS" : "FAIL", r.name, r.max_error, r.tolerance,
                         r.detail);
    return s;
}

bool all_passed(const std::vector<SuiteResult> &results) {
    return std::all_of(results.begin(), results.end(),
                       [](const SuiteResult &r) { return r.passed; });
}

} // namespace qa3c::selfcheck
