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
#include <limits>

#include "qa3c/kernels.hpp"

// Serial reference kernels. These deliberately use the most literal form of
// each operation (out-of-place, full basis scans) rather than the paired
// index arithmetic of the parallel versions.

namespace qa3c::kernels::reference {

void apply_gate(std::span<Complex> amps, std::size_t qubit, const Gate &g) {
    const std::size_t bit = std::size_t{1} << qubit;
    std::vector<Complex> out(amps.size());
    for (std::size_t b = 0; b < amps.size(); ++b) {
        const std::size_t row = (b & bit) ? 1 : 0;
        const std::size_t b0 = b & ~bit;
        const std::size_t b1 = b | bit;
        out[b] = g[2 * row] * amps[b0] + g[2 * row + 1] * amps[b1];
    }
    std::copy(out.begin(), out.end(), amps.begin());
}

void apply_cnot(std::span<Complex> amps, std::size_t control,
                std::size_t target) {
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    std::vector<Complex> out(amps.size());
    for (std::size_t b = 0; b < amps.size(); ++b)
        out[(b & cbit) ? (b ^ tbit) : b] = amps[b];
    std::copy(out.begin(), out.end(), amps.begin());
}

std::vector<double> expectation_z(std::span<const Complex> amps,
                                  std::size_t n_qubits) {
    std::vector<double> z(n_qubits, 0.0);
    for (std::size_t q = 0; q < n_qubits; ++q)
        for (std::size_t b = 0; b < amps.size(); ++b) {
            const double p = amps[b].real() * amps[b].real() +
                             amps[b].imag() * amps[b].imag();
            z[q] += ((b >> q) & 1U) == 0 ? p : -p;
        }
    return z;
}

void assign_nearest(const Eigen::MatrixXd &points,
                    const Eigen::MatrixXd &centroids, std::span<int> labels,
                    std::span<double> dist2) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        double best_d = std::numeric_limits<double>::infinity();
        int best = 0;
        for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
            const double d = (points.row(i) - centroids.row(k)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(k);
            }
        }
        labels[static_cast<std::size_t>(i)] = best;
        dist2[static_cast<std::size_t>(i)] = best_d;
    }
}

} // namespace qa3c::kernels::reference
