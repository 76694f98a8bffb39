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
 * Data-parallel inner loops: statevector gate application, Pauli-Z readout
 * and nearest-centroid assignment.
 *
 * `qa3c::kernels` holds the OpenMP versions used by the engine. The
 * `qa3c::kernels::reference` namespace holds plain serial versions written
 * independently of the parallel index arithmetic; tests and the benchmark
 * compare the two.
 *
 * Qubit q is bit q of the basis index (little-endian).
 */
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qa3c::kernels {

using Complex = std::complex<double>;
/// Row-major 2x2 unitary {m00, m01, m10, m11}.
using Gate = std::array<Complex, 4>;

/// Below this many amplitudes the kernels stay on the calling thread.
inline constexpr std::size_t kParallelAmplitudes = std::size_t{1} << 14;
/// Points below which nearest-centroid assignment stays serial.
inline constexpr std::size_t kParallelPoints = 4096;

void apply_gate(std::span<Complex> amps, std::size_t qubit, const Gate &g);
void apply_cnot(std::span<Complex> amps, std::size_t control,
                std::size_t target);
/// <Z_q> for every qubit. Partial sums run over fixed-size blocks and are
/// combined in block order, so results do not depend on the thread count.
[[nodiscard]] std::vector<double>
expectation_z(std::span<const Complex> amps, std::size_t n_qubits);

/// Nearest centroid by squared Euclidean distance; ties go to the lowest id.
/// Writes the squared distance to the chosen centroid into `dist2`.
void assign_nearest(const Eigen::MatrixXd &points,
                    const Eigen::MatrixXd &centroids, std::span<int> labels,
                    std::span<double> dist2);

namespace reference {

void apply_gate(std::span<Complex> amps, std::size_t qubit, const Gate &g);
void apply_cnot(std::span<Complex> amps, std::size_t control,
                std::size_t target);
[[nodiscard]] std::vector<double>
expectation_z(std::span<const Complex> amps, std::size_t n_qubits);
void assign_nearest(const Eigen::MatrixXd &points,
                    const Eigen::MatrixXd &centroids, std::span<int> labels,
                    std::span<double> dist2);

} // namespace reference

} // namespace qa3c::kernels
