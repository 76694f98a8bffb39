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
#include "qa3c/policy.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qa3c/errors.hpp"

namespace qa3c::policy {

namespace {

Eigen::MatrixXd uniform(Eigen::Index rows, Eigen::Index cols, double bound,
                        Rng &rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd m(rows, cols);
    // column-major fill order, fixed for reproducibility
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = dist(rng);
    return m;
}

constexpr double kOpenBound = 1.0 - std::numeric_limits<double>::epsilon();

Eigen::VectorXd band_apply(const Eigen::MatrixXd &w, const Eigen::VectorXd &x) {
    const Eigen::Index q_count = w.rows();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(q_count);
    for (Eigen::Index q = 0; q < q_count; ++q)
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            z(q) += w(q, j) * x((q + j) % q_count);
    return z;
}

void check_dims(const NetworkShape &shape, const cluster::AgentState &state) {
    if (static_cast<std::size_t>(state.size()) != shape.state_dim())
        throw ConfigError("policy",
                          fmt::format("state length {} != 4K+2 = {}",
                                      state.size(), shape.state_dim()));
}

} // namespace

std::string_view to_string(Bottleneck b) {
    return b == Bottleneck::Quantum ? "quantum" : "classical";
}

Bottleneck parse_bottleneck(std::string_view text) {
    if (text == "quantum")
        return Bottleneck::Quantum;
    if (text == "classical")
        return Bottleneck::Classical;
    throw ConfigError("policy.bottleneck",
                      "expected 'quantum' or 'classical', got '" +
                          std::string(text) + "'");
}

BottleneckMatch parameter_match(std::size_t n_qubits, std::size_t n_layers,
                                double tolerance) {
    if (n_qubits == 0)
        throw ConfigError("quantum.n_qubits", "must be at least 1");
    if (n_layers == 0)
        throw ConfigError("quantum.n_layers", "must be at least 1");
    BottleneckMatch best;
    best.quantum_params = 2 * n_layers * n_qubits;
    auto gap = [&](std::size_t count) {
        return count > best.quantum_params ? count - best.quantum_params
                                           : best.quantum_params - count;
    };
    for (std::size_t w = 1; w <= n_qubits; ++w) {
        const std::size_t count = n_qubits * (w + 1);
        if (best.band_width == 0 || gap(count) < gap(best.classical_params)) {
            best.band_width = w;
            best.classical_params = count;
        }
    }
    best.deviation = (static_cast<double>(best.classical_params) -
                      static_cast<double>(best.quantum_params)) /
                     static_cast<double>(best.quantum_params);
    best.within_tolerance = std::abs(best.deviation) <= tolerance + 1e-12;
    return best;
}

std::size_t NetworkShape::resolved_band_width() const {
    return band_width != 0 ? band_width
                           : parameter_match(n_qubits, n_layers).band_width;
}

void NetworkShape::validate() const {
    if (k < 2)
        throw ConfigError("K", "cluster count must be at least 2");
    if (h1 == 0)
        throw ConfigError("policy.h1", "must be at least 1");
    if (h2 == 0)
        throw ConfigError("policy.h2", "must be at least 1");
    if (n_qubits == 0 || n_qubits > quantum::kMaxQubits)
        throw ConfigError("quantum.n_qubits",
                          fmt::format("must be in [1, {}]", quantum::kMaxQubits));
    if (n_layers == 0)
        throw ConfigError("quantum.n_layers", "must be at least 1");
    if (band_width > n_qubits)
        throw ConfigError("policy.band_width", "must not exceed n_qubits");
}

std::string structural_hash(const NetworkShape &shape) {
    const std::string canon = fmt::format(
        "qa3c-net;k={};h1={};h2={};q={};d={};bottleneck={};band={}", shape.k,
        shape.h1, shape.h2, shape.n_qubits, shape.n_layers,
        to_string(shape.bottleneck),
        shape.bottleneck == Bottleneck::Classical ? shape.resolved_band_width()
                                                  : 0);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

PolicyParameters PolicyParameters::zeros(const NetworkShape &shape, double tau) {
    shape.validate();
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ConfigError("policy.tau", "temperature must be positive");
    PolicyParameters p;
    p.shape = shape;
    p.tau = tau;
    const auto s = static_cast<Eigen::Index>(shape.state_dim());
    const auto h1 = static_cast<Eigen::Index>(shape.h1);
    const auto h2 = static_cast<Eigen::Index>(shape.h2);
    const auto q = static_cast<Eigen::Index>(shape.n_qubits);
    const auto k = static_cast<Eigen::Index>(shape.k);
    p.w1 = Eigen::MatrixXd::Zero(h1, s);
    p.b1 = Eigen::MatrixXd::Zero(h1, 1);
    p.w2 = Eigen::MatrixXd::Zero(q, h1);
    p.b2 = Eigen::MatrixXd::Zero(q, 1);
    if (shape.bottleneck == Bottleneck::Quantum) {
        p.theta = Eigen::MatrixXd::Zero(
            static_cast<Eigen::Index>(2 * shape.n_layers * shape.n_qubits), 1);
    } else {
        p.bottleneck_w = Eigen::MatrixXd::Zero(
            q, static_cast<Eigen::Index>(shape.resolved_band_width()));
        p.bottleneck_b = Eigen::MatrixXd::Zero(q, 1);
    }
    p.w3 = Eigen::MatrixXd::Zero(h2, q);
    p.b3 = Eigen::MatrixXd::Zero(h2, 1);
    p.w4 = Eigen::MatrixXd::Zero(k, h2);
    p.b4 = Eigen::MatrixXd::Zero(k, 1);
    p.wv = Eigen::MatrixXd::Zero(1, h1);
    p.bv = Eigen::MatrixXd::Zero(1, 1);
    return p;
}

PolicyParameters PolicyParameters::initialize(const NetworkShape &shape,
                                              std::uint64_t seed, double tau) {
    PolicyParameters p = zeros(shape, tau);
    Rng rng(seed);
    auto layer = [&](Eigen::MatrixXd &w, Eigen::MatrixXd &b, double gain = 1.0) {
        const double bound = gain / std::sqrt(static_cast<double>(w.cols()));
        w = uniform(w.rows(), w.cols(), bound, rng);
        b = uniform(b.rows(), 1, bound, rng);
    };
    layer(p.w1, p.b1);
    layer(p.w2, p.b2);
    if (shape.bottleneck == Bottleneck::Quantum)
        p.theta = uniform(p.theta.rows(), 1, quantum::kPi / 8.0, rng);
    else
        layer(p.bottleneck_w, p.bottleneck_b);
    layer(p.w3, p.b3);
    // Small logit layer: the untrained policy starts close to uniform.
    layer(p.w4, p.b4, kLogitInitGain);
    layer(p.wv, p.bv);
    return p;
}

std::size_t PolicyParameters::size() const {
    std::size_t n = 0;
    for_each([&](std::string_view, const Eigen::MatrixXd &m) {
        n += static_cast<std::size_t>(m.size());
    });
    return n;
}

Eigen::VectorXd PolicyParameters::flatten() const {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(size()));
    Eigen::Index at = 0;
    for_each([&](std::string_view, const Eigen::MatrixXd &m) {
        flat.segment(at, m.size()) =
            Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        at += m.size();
    });
    return flat;
}

void PolicyParameters::unflatten(const Eigen::VectorXd &flat) {
    if (static_cast<std::size_t>(flat.size()) != size())
        throw ContractViolation("unflatten: size mismatch");
    Eigen::Index at = 0;
    for_each([&](std::string_view, Eigen::MatrixXd &m) {
        Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(at, m.size());
        at += m.size();
    });
}

double PolicyParameters::squared_norm() const {
    double s = 0.0;
    for_each([&](std::string_view, const Eigen::MatrixXd &m) {
        s += m.squaredNorm();
    });
    return s;
}

bool PolicyParameters::all_finite() const {
    bool ok = true;
    for_each([&](std::string_view, const Eigen::MatrixXd &m) {
        ok = ok && m.allFinite();
    });
    return ok;
}

void PolicyParameters::axpy(double scale, const PolicyParameters &other) {
    if (!(shape == other.shape))
        throw ContractViolation("axpy: parameter shapes differ");
    std::vector<const Eigen::MatrixXd *> src;
    other.for_each([&](std::string_view, const Eigen::MatrixXd &m) {
        src.push_back(&m);
    });
    std::size_t i = 0;
    for_each([&](std::string_view, Eigen::MatrixXd &m) {
        m += scale * *src[i++];
    });
}

quantum::CircuitSpec PolicyParameters::circuit() const {
    quantum::CircuitSpec spec;
    spec.n_qubits = shape.n_qubits;
    spec.n_layers = shape.n_layers;
    spec.theta.assign(theta.data(), theta.data() + theta.size());
    return spec;
}

Eigen::VectorXd softmax(const Eigen::VectorXd &logits, double tau) {
    const Eigen::VectorXd z = logits / tau;
    const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
    // Floor at the smallest normal double so log(pi) stays finite when a
    // logit gap underflows exp().
    return (e / e.sum()).cwiseMax(std::numeric_limits<double>::min());
}

double entropy(const Eigen::VectorXd &probs) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i)
        if (probs(i) > 0.0)
            h -= probs(i) * std::log(probs(i));
    return h;
}

PolicyOutput forward(const PolicyParameters &p, const cluster::AgentState &state) {
    check_dims(p.shape, state);
    PolicyOutput out;
    out.state = state;
    out.h1 = (p.w1 * state + p.b1).array().tanh();
    out.x = (p.w2 * out.h1 + p.b2).array().tanh();
    // tanh can round to exactly +-1; the encoder needs the open interval.
    out.x = out.x.cwiseMax(-kOpenBound).cwiseMin(kOpenBound);
    if (p.shape.bottleneck == Bottleneck::Quantum)
        out.u = quantum::vqc_forward(out.x, p.circuit());
    else
        out.u = (band_apply(p.bottleneck_w, out.x) + p.bottleneck_b).array().tanh();
    out.h3 = (p.w3 * out.u + p.b3).array().tanh();
    out.logits = p.w4 * out.h3 + p.b4;
    out.probs = softmax(out.logits, p.tau);
    out.value = (p.wv * out.h1)(0) + p.bv(0, 0);
    return out;
}

std::size_t sample_action(const PolicyOutput &out, Rng &rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double cdf = 0.0;
    std::size_t last_positive = 0;
    for (Eigen::Index k = 0; k < out.probs.size(); ++k) {
        if (out.probs(k) <= 0.0)
            continue;
        cdf += out.probs(k);
        last_positive = static_cast<std::size_t>(k);
        if (u < cdf)
            return last_positive;
    }
    return last_positive;
}

std::size_t greedy_action(const PolicyOutput &out) {
    Eigen::Index best = 0;
    out.probs.maxCoeff(&best);
    return static_cast<std::size_t>(best);
}

LossTerms loss(const PolicyOutput &out, std::size_t action, double advantage,
               double value_target, const LossCoefficients &coeffs) {
    if (action >= static_cast<std::size_t>(out.probs.size()))
        throw ContractViolation("loss: action out of range");
    LossTerms t;
    t.policy = -std::log(out.probs(static_cast<Eigen::Index>(action))) * advantage;
    const double err = value_target - out.value;
    t.value = err * err;
    t.entropy = entropy(out.probs);
    t.total = t.policy + coeffs.value * t.value - coeffs.entropy * t.entropy;
    return t;
}

Gradient backward(const PolicyParameters &p, const PolicyOutput &c,
                  std::size_t action, double advantage, double value_target,
                  const LossCoefficients &coeffs) {
    Gradient g{PolicyParameters::zeros(p.shape, p.tau),
               loss(c, action, advantage, value_target, coeffs)};
    auto &d = g.grad;
    const Eigen::VectorXd &pi = c.probs;

    // dL/do through the temperature softmax
    Eigen::VectorXd d_logits = advantage * pi;
    d_logits(static_cast<Eigen::Index>(action)) -= advantage;
    const double h = g.loss.entropy;
    for (Eigen::Index k = 0; k < pi.size(); ++k)
        if (pi(k) > 0.0)
            d_logits(k) += coeffs.entropy * pi(k) * (std::log(pi(k)) + h);
    d_logits /= p.tau;
    const double d_value = -2.0 * coeffs.value * (value_target - c.value);

    d.w4 = d_logits * c.h3.transpose();
    d.b4 = d_logits;
    const Eigen::VectorXd d_z3 =
        (p.w4.transpose() * d_logits).cwiseProduct((1.0 - c.h3.array().square()).matrix());
    d.w3 = d_z3 * c.u.transpose();
    d.b3 = d_z3;
    const Eigen::VectorXd d_u = p.w3.transpose() * d_z3;

    Eigen::VectorXd d_x;
    if (p.shape.bottleneck == Bottleneck::Quantum) {
        const auto jac = quantum::vqc_gradients(c.x, p.circuit());
        d.theta = jac.d_theta.transpose() * d_u;
        d_x = jac.d_x.transpose() * d_u;
    } else {
        const Eigen::VectorXd d_zb =
            d_u.cwiseProduct((1.0 - c.u.array().square()).matrix());
        const Eigen::Index q_count = p.bottleneck_w.rows();
        d_x = Eigen::VectorXd::Zero(q_count);
        for (Eigen::Index q = 0; q < q_count; ++q)
            for (Eigen::Index j = 0; j < p.bottleneck_w.cols(); ++j) {
                const Eigen::Index in = (q + j) % q_count;
                d.bottleneck_w(q, j) = d_zb(q) * c.x(in);
                d_x(in) += p.bottleneck_w(q, j) * d_zb(q);
            }
        d.bottleneck_b = d_zb;
    }

    const Eigen::VectorXd d_z2 =
        d_x.cwiseProduct((1.0 - c.x.array().square()).matrix());
    d.w2 = d_z2 * c.h1.transpose();
    d.b2 = d_z2;
    d.wv = d_value * c.h1.transpose();
    d.bv(0, 0) = d_value;
    const Eigen::VectorXd d_h1 = p.w2.transpose() * d_z2 + p.wv.transpose() * d_value;
    const Eigen::VectorXd d_z1 =
        d_h1.cwiseProduct((1.0 - c.h1.array().square()).matrix());
    d.w1 = d_z1 * c.state.transpose();
    d.b1 = d_z1;
    return g;
}

} // namespace qa3c::policy
