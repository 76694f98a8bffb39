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
#include "qa3c/quantum.hpp"

#include <cmath>

#include <fmt/format.h>

#include "qa3c/errors.hpp"

namespace qa3c::quantum {

namespace {

constexpr double kShift = kPi / 2.0;

/// Runs the circuit from raw encoding angles (already multiplied by pi).
Eigen::VectorXd run_circuit(const Eigen::VectorXd &angles,
                            std::span<const double> theta, std::size_t layers) {
    const auto q_count = static_cast<std::size_t>(angles.size());
    QuantumState state(q_count);
    for (std::size_t q = 0; q < q_count; ++q)
        state.apply_ry(q, angles(static_cast<Eigen::Index>(q)));
    for (std::size_t d = 0; d < layers; ++d) {
        for (std::size_t q = 0; q < q_count; ++q) {
            state.apply_ry(q, theta[(d * q_count + q) * 2]);
            state.apply_rz(q, theta[(d * q_count + q) * 2 + 1]);
        }
        if (q_count > 1)
            for (std::size_t q = 0; q < q_count; ++q)
                state.apply_cnot(q, (q + 1) % q_count);
    }
    return expectations_z(state);
}

void check_input(const Eigen::VectorXd &x, const CircuitSpec &spec) {
    spec.validate();
    if (static_cast<std::size_t>(x.size()) != spec.n_qubits)
        throw ContractViolation(fmt::format(
            "vqc: input length {} != qubit count {}", x.size(), spec.n_qubits));
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!(std::abs(x(i)) < 1.0))
            throw EncodingDomainError(fmt::format(
                "encode: x[{}] = {} outside (-1, 1)", i, x(i)));
}

} // namespace

QuantumState::QuantumState(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits == 0 || n_qubits > kMaxQubits)
        throw ContractViolation(
            fmt::format("qubit count {} outside [1, {}]", n_qubits, kMaxQubits));
    amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amps_[0] = 1.0;
}

double QuantumState::norm() const {
    double s = 0.0;
    for (const auto &a : amps_)
        s += std::norm(a);
    return std::sqrt(s);
}

kernels::Gate ry_gate(double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    return {Complex{c, 0.0}, Complex{-s, 0.0}, Complex{s, 0.0}, Complex{c, 0.0}};
}

kernels::Gate rz_gate(double angle) {
    const Complex phase = std::polar(1.0, -angle / 2.0);
    return {phase, Complex{0.0, 0.0}, Complex{0.0, 0.0}, std::conj(phase)};
}

void QuantumState::apply_ry(std::size_t qubit, double angle) {
    kernels::apply_gate(amps_, qubit, ry_gate(angle));
}

void QuantumState::apply_rz(std::size_t qubit, double angle) {
    kernels::apply_gate(amps_, qubit, rz_gate(angle));
}

void QuantumState::apply_cnot(std::size_t control, std::size_t target) {
    kernels::apply_cnot(amps_, control, target);
}

CircuitSpec CircuitSpec::zeros(std::size_t n_qubits, std::size_t n_layers) {
    CircuitSpec spec;
    spec.n_qubits = n_qubits;
    spec.n_layers = n_layers;
    spec.theta.assign(spec.n_params(), 0.0);
    return spec;
}

void CircuitSpec::validate() const {
    if (n_qubits == 0 || n_qubits > kMaxQubits)
        throw ConfigError("quantum.n_qubits",
                          fmt::format("must be in [1, {}]", kMaxQubits));
    if (n_layers == 0)
        throw ConfigError("quantum.n_layers", "must be at least 1");
    if (theta.size() != n_params())
        throw ContractViolation(fmt::format(
            "circuit: {} angles given, {} expected", theta.size(), n_params()));
    for (double t : theta)
        if (!std::isfinite(t))
            throw ContractViolation("circuit: non-finite angle");
}

QuantumState encode(std::span<const double> x) {
    QuantumState state(x.size());
    for (std::size_t q = 0; q < x.size(); ++q) {
        if (!(std::abs(x[q]) < 1.0))
            throw EncodingDomainError(
                fmt::format("encode: x[{}] = {} outside (-1, 1)", q, x[q]));
        state.apply_ry(q, kPi * x[q]);
    }
    return state;
}

QuantumState encode(const Eigen::VectorXd &x) {
    return encode(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

void apply_variational(QuantumState &state, const CircuitSpec &spec) {
    spec.validate();
    if (state.n_qubits() != spec.n_qubits)
        throw ContractViolation("apply_variational: qubit count mismatch");
    const std::size_t q_count = spec.n_qubits;
    for (std::size_t d = 0; d < spec.n_layers; ++d) {
        for (std::size_t q = 0; q < q_count; ++q) {
            state.apply_ry(q, spec.theta[spec.index(d, q, 0)]);
            state.apply_rz(q, spec.theta[spec.index(d, q, 1)]);
        }
        if (q_count > 1)
            for (std::size_t q = 0; q < q_count; ++q)
                state.apply_cnot(q, (q + 1) % q_count);
    }
}

Eigen::VectorXd expectations_z(const QuantumState &state) {
    const auto z = kernels::expectation_z(state.amplitudes(), state.n_qubits());
    return Eigen::Map<const Eigen::VectorXd>(z.data(),
                                             static_cast<Eigen::Index>(z.size()));
}

Eigen::VectorXd vqc_forward(const Eigen::VectorXd &x, const CircuitSpec &spec) {
    check_input(x, spec);
    return run_circuit(kPi * x, spec.theta, spec.n_layers);
}

Eigen::MatrixXd vqc_forward_batch(const Eigen::MatrixXd &inputs,
                                  const CircuitSpec &spec) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(spec.n_qubits), inputs.cols());
    for (Eigen::Index j = 0; j < inputs.cols(); ++j)
        check_input(inputs.col(j), spec);
    const auto n = static_cast<std::ptrdiff_t>(inputs.cols());
#pragma omp parallel for schedule(static) if (n * (std::ptrdiff_t{1} << spec.n_qubits) >= 1 << 14)
    for (std::ptrdiff_t j = 0; j < n; ++j)
        out.col(j) = run_circuit(kPi * inputs.col(j), spec.theta, spec.n_layers);
    return out;
}

VqcGradients vqc_gradients(const Eigen::VectorXd &x, const CircuitSpec &spec) {
    check_input(x, spec);
    const auto q_count = static_cast<Eigen::Index>(spec.n_qubits);
    const auto p_count = static_cast<Eigen::Index>(spec.n_params());
    const Eigen::VectorXd angles = kPi * x;

    VqcGradients g{Eigen::MatrixXd(q_count, p_count),
                   Eigen::MatrixXd(q_count, q_count)};
    // One task per shifted parameter: circuit angles first, then encodings.
    const auto tasks = static_cast<std::ptrdiff_t>(p_count + q_count);
#pragma omp parallel for schedule(static) if (tasks * (std::ptrdiff_t{1} << spec.n_qubits) >= 1 << 16)
    for (std::ptrdiff_t t = 0; t < tasks; ++t) {
        if (t < p_count) {
            std::vector<double> shifted = spec.theta;
            shifted[static_cast<std::size_t>(t)] += kShift;
            const Eigen::VectorXd plus = run_circuit(angles, shifted, spec.n_layers);
            shifted[static_cast<std::size_t>(t)] -= 2.0 * kShift;
            const Eigen::VectorXd minus = run_circuit(angles, shifted, spec.n_layers);
            g.d_theta.col(t) = 0.5 * (plus - minus);
        } else {
            const Eigen::Index j = t - p_count;
            Eigen::VectorXd shifted = angles;
            shifted(j) += kShift;
            const Eigen::VectorXd plus = run_circuit(shifted, spec.theta, spec.n_layers);
            shifted(j) -= 2.0 * kShift;
            const Eigen::VectorXd minus = run_circuit(shifted, spec.theta, spec.n_layers);
            // chain factor: angle = pi * x
            g.d_x.col(j) = kPi * 0.5 * (plus - minus);
        }
    }
    return g;
}

} // namespace qa3c::quantum
