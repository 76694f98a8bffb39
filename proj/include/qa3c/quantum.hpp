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
 * Dense statevector simulation of the variational bottleneck circuit.
 *
 * Ansatz: RY(pi * x_q) angle encoding on |0...0>, then D layers of
 * RY(theta[d][q][0]) RZ(theta[d][q][1]) on every qubit followed by a CNOT
 * ring q -> (q + 1) mod Q (no entanglers for Q = 1). Readout is <Z_q> per
 * qubit. Gradients use the two-term parameter-shift rule.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qa3c/kernels.hpp"

namespace qa3c::quantum {

using kernels::Complex;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr std::size_t kMaxQubits = 24;

class QuantumState {
  public:
    /// |0...0> on `n_qubits` qubits.
    explicit QuantumState(std::size_t n_qubits);

    [[nodiscard]] std::size_t n_qubits() const { return n_qubits_; }
    [[nodiscard]] std::span<Complex> amplitudes() { return amps_; }
    [[nodiscard]] std::span<const Complex> amplitudes() const { return amps_; }
    [[nodiscard]] double norm() const;

    void apply_ry(std::size_t qubit, double angle);
    void apply_rz(std::size_t qubit, double angle);
    void apply_cnot(std::size_t control, std::size_t target);

  private:
    std::size_t n_qubits_;
    std::vector<Complex> amps_;
};

[[nodiscard]] kernels::Gate ry_gate(double angle);
[[nodiscard]] kernels::Gate rz_gate(double angle);

struct CircuitSpec {
    std::size_t n_qubits = 6;
    std::size_t n_layers = 2;
    /// Flattened D x Q x 2; see index().
    std::vector<double> theta;

    [[nodiscard]] static CircuitSpec zeros(std::size_t n_qubits,
                                           std::size_t n_layers);
    [[nodiscard]] std::size_t n_params() const {
        return n_layers * n_qubits * 2;
    }
    /// rotation 0 = RY, 1 = RZ.
    [[nodiscard]] std::size_t index(std::size_t layer, std::size_t qubit,
                                    std::size_t rotation) const {
        return (layer * n_qubits + qubit) * 2 + rotation;
    }
    void validate() const;
};

/// Product state RY(pi x_q)|0>. Throws EncodingDomainError if |x_q| >= 1.
[[nodiscard]] QuantumState encode(std::span<const double> x);
[[nodiscard]] QuantumState encode(const Eigen::VectorXd &x);

void apply_variational(QuantumState &state, const CircuitSpec &spec);

/// <Z_q> = sum_b (+1 if bit q of b is 0 else -1) |amp_b|^2.
[[nodiscard]] Eigen::VectorXd expectations_z(const QuantumState &state);

[[nodiscard]] Eigen::VectorXd vqc_forward(const Eigen::VectorXd &x,
                                          const CircuitSpec &spec);

/// Column j of the result is vqc_forward of column j of `inputs`.
[[nodiscard]] Eigen::MatrixXd vqc_forward_batch(const Eigen::MatrixXd &inputs,
                                                const CircuitSpec &spec);

struct VqcGradients {
    Eigen::MatrixXd d_theta; ///< Q x n_params, d<Z_i>/d theta_j
    Eigen::MatrixXd d_x;     ///< Q x Q, d<Z_i>/d x_j
};

[[nodiscard]] VqcGradients vqc_gradients(const Eigen::VectorXd &x,
                                         const CircuitSpec &spec);

} // namespace qa3c::quantum
