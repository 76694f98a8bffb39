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
#include "qa3c/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

namespace qa3c::kernels {

namespace {

constexpr std::size_t kReadoutBlock = 4096;

/// Spreads `i` by inserting a zero bit at position `bit`.
inline std::size_t insert_zero(std::size_t i, std::size_t bit) {
    const std::size_t low = i & ((std::size_t{1} << bit) - 1);
    return ((i >> bit) << (bit + 1)) | low;
}

inline double squared_distance(const Eigen::MatrixXd &points, Eigen::Index i,
                               const Eigen::MatrixXd &centroids,
                               Eigen::Index k) {
    double d = 0.0;
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
        const double diff = points(i, c) - centroids(k, c);
        d += diff * diff;
    }
    return d;
}

} // namespace

namespace {

// Plain real arithmetic; std::complex multiplication adds NaN recovery
// branches that dominate on small states.
inline void rotate_pair(Complex *data, std::size_t i0, std::size_t i1, const Gate &g) {
    const double r0 = data[i0].real(), m0 = data[i0].imag();
    const double r1 = data[i1].real(), m1 = data[i1].imag();
    data[i0] = {g[0].real() * r0 - g[0].imag() * m0 + g[1].real() * r1 - g[1].imag() * m1,
                g[0].real() * m0 + g[0].imag() * r0 + g[1].real() * m1 + g[1].imag() * r1};
    data[i1] = {g[2].real() * r0 - g[2].imag() * m0 + g[3].real() * r1 - g[3].imag() * m1,
                g[2].real() * m0 + g[2].imag() * r0 + g[3].real() * m1 + g[3].imag() * r1};
}

} // namespace

void apply_gate(std::span<Complex> amps, std::size_t qubit, const Gate &g) {
    const std::size_t half = amps.size() / 2;
    const std::size_t stride = std::size_t{1} << qubit;
    Complex *data = amps.data();
    if (amps.size() < kParallelAmplitudes) {
        for (std::size_t base = 0; base < amps.size(); base += 2 * stride)
            for (std::size_t j = base; j < base + stride; ++j)
                rotate_pair(data, j, j | stride, g);
        return;
    }
    const auto n = static_cast<std::ptrdiff_t>(half);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::size_t i0 = insert_zero(static_cast<std::size_t>(i), qubit);
        rotate_pair(data, i0, i0 | stride, g);
    }
}

void apply_cnot(std::span<Complex> amps, std::size_t control,
                std::size_t target) {
    const std::size_t lo = std::min(control, target);
    const std::size_t hi = std::max(control, target);
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    const auto n = static_cast<std::ptrdiff_t>(amps.size() / 4);
    Complex *data = amps.data();
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelAmplitudes)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::size_t base =
            insert_zero(insert_zero(static_cast<std::size_t>(i), lo), hi) | cbit;
        std::swap(data[base], data[base | tbit]);
    }
}

std::vector<double> expectation_z(std::span<const Complex> amps,
                                  std::size_t n_qubits) {
    const std::size_t n_blocks = (amps.size() + kReadoutBlock - 1) / kReadoutBlock;
    std::vector<double> partial(n_blocks * n_qubits, 0.0);
    const auto nb = static_cast<std::ptrdiff_t>(n_blocks);
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelAmplitudes)
    for (std::ptrdiff_t blk = 0; blk < nb; ++blk) {
        const std::size_t begin = static_cast<std::size_t>(blk) * kReadoutBlock;
        const std::size_t end = std::min(amps.size(), begin + kReadoutBlock);
        double *out = partial.data() + static_cast<std::size_t>(blk) * n_qubits;
        for (std::size_t b = begin; b < end; ++b) {
            const double p = std::norm(amps[b]);
            for (std::size_t q = 0; q < n_qubits; ++q)
                out[q] += ((b >> q) & 1U) ? -p : p;
        }
    }
    std::vector<double> z(n_qubits, 0.0);
    for (std::size_t blk = 0; blk < n_blocks; ++blk)
        for (std::size_t q = 0; q < n_qubits; ++q)
            z[q] += partial[blk * n_qubits + q];
    return z;
}

void assign_nearest(const Eigen::MatrixXd &points,
                    const Eigen::MatrixXd &centroids, std::span<int> labels,
                    std::span<double> dist2) {
    const auto n = static_cast<std::ptrdiff_t>(points.rows());
    const Eigen::Index k_count = centroids.rows();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) >= kParallelPoints)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        int best = 0;
        double best_d = squared_distance(points, i, centroids, 0);
        for (Eigen::Index k = 1; k < k_count; ++k) {
            const double d = squared_distance(points, i, centroids, k);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(k);
            }
        }
        labels[static_cast<std::size_t>(i)] = best;
        dist2[static_cast<std::size_t>(i)] = best_d;
    }
}

} // namespace qa3c::kernels
