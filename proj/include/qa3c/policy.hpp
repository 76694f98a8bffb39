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
 * Hybrid actor-critic network.
 *
 *   h1 = tanh(W1 s + b1)
 *   x  = tanh(W2 h1 + b2)
 *   u  = VQC(x; theta)              (quantum bottleneck)
 *      | tanh(band(Wb) x + bb)      (classical ablation)
 *   o  = W4 tanh(W3 u + b3) + b4
 *   pi = softmax(o / tau)
 *   v  = Wv h1 + bv
 *
 * The classical bottleneck is a circulant band map: output q reads inputs
 * q, q+1, ..., q+w-1 (mod Q), so its parameter count Q(w+1) can be matched
 * against the 2DQ circuit angles.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "qa3c/clustering.hpp"
#include "qa3c/quantum.hpp"

namespace qa3c::policy {

using Rng = std::mt19937_64;

enum class Bottleneck { Quantum, Classical };

[[nodiscard]] std::string_view to_string(Bottleneck b);
[[nodiscard]] Bottleneck parse_bottleneck(std::string_view text);

inline constexpr double kDefaultTau = 1.3;
/// Scale of the W4/b4 init bound relative to 1/sqrt(fan_in).
inline constexpr double kLogitInitGain = 0.1;

struct BottleneckMatch {
    std::size_t band_width = 0;
    std::size_t classical_params = 0;
    std::size_t quantum_params = 0;
    double deviation = 0.0; ///< (classical - quantum) / quantum
    bool within_tolerance = false;
};

/// Picks the band width whose classical parameter count is closest to the
/// circuit's 2DQ angles. `within_tolerance` flags |deviation| <= tolerance.
[[nodiscard]] BottleneckMatch parameter_match(std::size_t n_qubits,
                                              std::size_t n_layers,
                                              double tolerance = 0.10);

struct NetworkShape {
    std::size_t k = 5;
    std::size_t h1 = 32;
    std::size_t h2 = 16;
    std::size_t n_qubits = 6;
    std::size_t n_layers = 2;
    Bottleneck bottleneck = Bottleneck::Quantum;
    /// Classical band width; 0 selects parameter_match().
    std::size_t band_width = 0;

    [[nodiscard]] std::size_t state_dim() const { return cluster::state_dim(k); }
    [[nodiscard]] std::size_t resolved_band_width() const;
    void validate() const;
    bool operator==(const NetworkShape &) const = default;
};

/// Stable FNV-1a hash of every field that determines parameter shapes.
[[nodiscard]] std::string structural_hash(const NetworkShape &shape);

struct PolicyParameters {
    NetworkShape shape;
    double tau = kDefaultTau;

    Eigen::MatrixXd w1, b1, w2, b2;
    Eigen::MatrixXd theta;                      ///< quantum: n_params x 1
    Eigen::MatrixXd bottleneck_w, bottleneck_b; ///< classical: Q x w, Q x 1
    Eigen::MatrixXd w3, b3, w4, b4, wv, bv;

    /// Zero-valued arrays of the right shapes.
    [[nodiscard]] static PolicyParameters zeros(const NetworkShape &shape,
                                                double tau = kDefaultTau);
    /// Uniform(+-1/sqrt(fan_in)) weights (W4, b4 scaled by kLogitInitGain),
    /// theta Uniform(+-pi/8).
    [[nodiscard]] static PolicyParameters initialize(const NetworkShape &shape,
                                                     std::uint64_t seed,
                                                     double tau = kDefaultTau);

    /// Calls fn(name, array) for every trainable array in a fixed order.
    template <class Fn> void for_each(Fn &&fn) {
        fn("W1", w1); fn("b1", b1); fn("W2", w2); fn("b2", b2);
        if (shape.bottleneck == Bottleneck::Quantum) {
            fn("theta", theta);
        } else {
            fn("bottleneck_w", bottleneck_w);
            fn("bottleneck_b", bottleneck_b);
        }
        fn("W3", w3); fn("b3", b3); fn("W4", w4); fn("b4", b4);
        fn("Wv", wv); fn("bv", bv);
    }
    template <class Fn> void for_each(Fn &&fn) const {
        const_cast<PolicyParameters *>(this)->for_each(
            [&](std::string_view name, Eigen::MatrixXd &m) {
                fn(name, static_cast<const Eigen::MatrixXd &>(m));
            });
    }

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd &flat);
    [[nodiscard]] double squared_norm() const;
    [[nodiscard]] bool all_finite() const;
    /// this += scale * other (shapes must match).
    void axpy(double scale, const PolicyParameters &other);
    [[nodiscard]] quantum::CircuitSpec circuit() const;
};

struct PolicyOutput {
    Eigen::VectorXd logits;
    Eigen::VectorXd probs;
    double value = 0.0;
    // cached activations
    Eigen::VectorXd state, h1, x, u, h3;
};

/// Temperature softmax, max-subtracted.
[[nodiscard]] Eigen::VectorXd softmax(const Eigen::VectorXd &logits, double tau);
/// Shannon entropy in nats; 0 log 0 = 0.
[[nodiscard]] double entropy(const Eigen::VectorXd &probs);

[[nodiscard]] PolicyOutput forward(const PolicyParameters &params,
                                   const cluster::AgentState &state);

/// Inverse-CDF categorical draw.
[[nodiscard]] std::size_t sample_action(const PolicyOutput &out, Rng &rng);
[[nodiscard]] std::size_t greedy_action(const PolicyOutput &out);

struct LossCoefficients {
    double value = 0.5;
    double entropy = 0.01;
};

struct LossTerms {
    double total = 0.0;
    double policy = 0.0; ///< -log pi(a) * advantage
    double value = 0.0;  ///< (target - v)^2, before c_v
    double entropy = 0.0;
};

/// L = -log pi(a) A + c_v (target - v)^2 - c_e H(pi). Advantage and target
/// are constants.
[[nodiscard]] LossTerms loss(const PolicyOutput &out, std::size_t action,
                             double advantage, double value_target,
                             const LossCoefficients &coeffs);

struct Gradient {
    PolicyParameters grad;
    LossTerms loss;
};

/// dL/dparams by the chain rule from a forward() cache; the circuit Jacobians
/// come from the parameter-shift rule.
[[nodiscard]] Gradient backward(const PolicyParameters &params,
                                const PolicyOutput &cache, std::size_t action,
                                double advantage, double value_target,
                                const LossCoefficients &coeffs);

} // namespace qa3c::policy
