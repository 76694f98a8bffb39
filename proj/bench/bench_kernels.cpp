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
// Parallel kernels against their serial reference versions.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "qa3c/kernels.hpp"
#include "qa3c/quantum.hpp"

namespace {

using qa3c::kernels::Complex;

std::vector<Complex> random_state(std::size_t n_qubits) {
    std::mt19937_64 rng(n_qubits);
    std::normal_distribution<double> n01;
    std::vector<Complex> amps(std::size_t{1} << n_qubits);
    for (auto &a : amps)
        a = {n01(rng), n01(rng)};
    return amps;
}

template <bool Parallel> void BM_ApplyGate(benchmark::State &st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    auto amps = random_state(n);
    const auto g = qa3c::quantum::ry_gate(0.4);
    for (auto _ : st) {
        for (std::size_t q = 0; q < n; ++q) {
            if constexpr (Parallel)
                qa3c::kernels::apply_gate(amps, q, g);
            else
                qa3c::kernels::reference::apply_gate(amps, q, g);
        }
        benchmark::DoNotOptimize(amps.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(n * amps.size()));
}

template <bool Parallel> void BM_Cnot(benchmark::State &st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    auto amps = random_state(n);
    for (auto _ : st) {
        for (std::size_t q = 0; q < n; ++q) {
            if constexpr (Parallel)
                qa3c::kernels::apply_cnot(amps, q, (q + 1) % n);
            else
                qa3c::kernels::reference::apply_cnot(amps, q, (q + 1) % n);
        }
        benchmark::DoNotOptimize(amps.data());
    }
}

template <bool Parallel> void BM_ExpectationZ(benchmark::State &st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto amps = random_state(n);
    for (auto _ : st) {
        auto z = Parallel ? qa3c::kernels::expectation_z(amps, n)
                          : qa3c::kernels::reference::expectation_z(amps, n);
        benchmark::DoNotOptimize(z.data());
    }
}

template <bool Parallel> void BM_AssignNearest(benchmark::State &st) {
    const auto n = static_cast<Eigen::Index>(st.range(0));
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01;
    const Eigen::MatrixXd pts = Eigen::MatrixXd::NullaryExpr(n, 3, [&] { return n01(rng); });
    const Eigen::MatrixXd cen = Eigen::MatrixXd::NullaryExpr(8, 3, [&] { return n01(rng); });
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (auto _ : st) {
        if constexpr (Parallel)
            qa3c::kernels::assign_nearest(pts, cen, labels, d2);
        else
            qa3c::kernels::reference::assign_nearest(pts, cen, labels, d2);
        benchmark::DoNotOptimize(labels.data());
    }
}

} // namespace

BENCHMARK(BM_ApplyGate<true>)->DenseRange(10, 20, 5);
BENCHMARK(BM_ApplyGate<false>)->DenseRange(10, 20, 5);
BENCHMARK(BM_Cnot<true>)->DenseRange(10, 20, 5);
BENCHMARK(BM_Cnot<false>)->DenseRange(10, 20, 5);
BENCHMARK(BM_ExpectationZ<true>)->DenseRange(10, 20, 5);
BENCHMARK(BM_ExpectationZ<false>)->DenseRange(10, 20, 5);
BENCHMARK(BM_AssignNearest<true>)->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(BM_AssignNearest<false>)->RangeMultiplier(8)->Range(512, 1 << 18);

BENCHMARK_MAIN();
