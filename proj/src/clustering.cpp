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
#include "qa3c/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "qa3c/errors.hpp"
#include "qa3c/kernels.hpp"
#include "qa3c/market_data.hpp"

namespace qa3c::cluster {

namespace {

void check_features(const Eigen::MatrixXd &features, std::size_t k) {
    if (k < 2)
        throw ConfigError("K", "cluster count must be at least 2");
    if (static_cast<std::size_t>(features.rows()) < k)
        throw InfeasibleClusteringError(fmt::format(
            "k-means: {} points cannot form {} clusters", features.rows(), k));
    if (!features.allFinite())
        throw ContractViolation("k-means: non-finite feature entry");
}

} // namespace

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd &features, std::size_t k,
                                 std::uint64_t seed) {
    check_features(features, k);
    const auto n = features.rows();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), features.cols());
    centroids.row(0) = features.row(pick(rng));
    Eigen::VectorXd d2 =
        (features.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (Eigen::Index c = 1; c < static_cast<Eigen::Index>(k); ++c) {
        const double total = d2.sum();
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            const double target = unit(rng) * total;
            double acc = 0.0;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc > target && d2(i) > 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centroids.row(c) = features.row(chosen);
        d2 = d2.cwiseMin(
            (features.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }
    return centroids;
}

std::vector<int> assign_labels(const Eigen::MatrixXd &features,
                               const Eigen::MatrixXd &centroids) {
    std::vector<int> labels(static_cast<std::size_t>(features.rows()));
    std::vector<double> dist2(labels.size());
    if (!labels.empty())
        kernels::assign_nearest(features, centroids, labels, dist2);
    return labels;
}

double inertia(const Eigen::MatrixXd &features, std::span<const int> labels,
               const Eigen::MatrixXd &centroids) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < features.rows(); ++i)
        total += (features.row(i) -
                  centroids.row(labels[static_cast<std::size_t>(i)]))
                     .squaredNorm();
    return total;
}

ClusterAssignment lloyd(const Eigen::MatrixXd &features,
                        Eigen::MatrixXd centroids, const KMeansOptions &opts) {
    const auto k = static_cast<std::size_t>(centroids.rows());
    check_features(features, k);
    const auto n = static_cast<std::size_t>(features.rows());

    ClusterAssignment out;
    std::vector<int> labels(n);
    std::vector<double> dist2(n);
    std::vector<std::size_t> counts(k);

    for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
        kernels::assign_nearest(features, centroids, labels, dist2);
        out.inertia_history.push_back(
            std::accumulate(dist2.begin(), dist2.end(), 0.0));
        ++out.iterations;

        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(centroids.rows(), centroids.cols());
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            next.row(labels[i]) += features.row(static_cast<Eigen::Index>(i));
            ++counts[static_cast<std::size_t>(labels[i])];
        }

        // Farthest points first; each empty cluster takes the next unused one.
        std::vector<std::size_t> by_distance;
        std::size_t next_far = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const auto row = static_cast<Eigen::Index>(c);
            if (counts[c] > 0) {
                next.row(row) /= static_cast<double>(counts[c]);
                continue;
            }
            if (by_distance.empty()) {
                by_distance.resize(n);
                std::iota(by_distance.begin(), by_distance.end(), 0);
                std::stable_sort(by_distance.begin(), by_distance.end(),
                                 [&](std::size_t a, std::size_t b) {
                                     return dist2[a] > dist2[b];
                                 });
            }
            next.row(row) = features.row(
                static_cast<Eigen::Index>(by_distance[next_far % n]));
            ++next_far;
        }

        const double shift = (next - centroids).rowwise().norm().maxCoeff();
        centroids = std::move(next);
        if (shift < opts.tol)
            break;
    }

    kernels::assign_nearest(features, centroids, labels, dist2);
    out.inertia = std::accumulate(dist2.begin(), dist2.end(), 0.0);
    out.inertia_history.push_back(out.inertia);
    out.labels = std::move(labels);
    out.centroids = std::move(centroids);
    return out;
}

ClusterAssignment kmeans_fit(const Eigen::MatrixXd &features, std::size_t k,
                             std::uint64_t seed, const KMeansOptions &opts) {
    return lloyd(features, kmeans_plus_plus(features, k, seed), opts);
}

std::vector<ClusterFeatures> cluster_features(const Eigen::MatrixXd &features,
                                              std::span<const int> labels,
                                              std::size_t k) {
    std::vector<ClusterFeatures> out(k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        if (c >= k)
            throw ContractViolation("cluster_features: label out of range");
        const auto row = static_cast<Eigen::Index>(i);
        out[c].m5_mean += features(row, 0);
        out[c].m20_mean += features(row, 1);
        out[c].v20_mean += features(row, 2);
        ++counts[c];
    }
    const auto total = static_cast<double>(labels.size());
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0)
            continue;
        const auto cnt = static_cast<double>(counts[c]);
        out[c].m5_mean /= cnt;
        out[c].m20_mean /= cnt;
        out[c].v20_mean /= cnt;
        out[c].size_frac = cnt / total;
    }
    return out;
}

MarketFeatures market_features(const Eigen::Ref<const Eigen::VectorXd> &r,
                               std::size_t end_index) {
    if (end_index + 1 < market::kLongWindow ||
        end_index >= static_cast<std::size_t>(r.size()))
        throw InsufficientDataError(fmt::format(
            "market_features: end_index {} needs {} prior benchmark returns",
            end_index, market::kLongWindow));
    return {market::compound(r, end_index, market::kShortWindow),
            market::compound(r, end_index, market::kLongWindow)};
}

AgentState assemble_state(std::span<const ClusterFeatures> cf,
                          const MarketFeatures &mf) {
    AgentState s(static_cast<Eigen::Index>(state_dim(cf.size())));
    Eigen::Index at = 0;
    for (const auto &f : cf) {
        s(at++) = f.m5_mean;
        s(at++) = f.m20_mean;
        s(at++) = f.v20_mean;
        s(at++) = f.size_frac;
    }
    s(at++) = mf.m5;
    s(at) = mf.m20;
    return s;
}

CanonicalClusters canonicalize_clusters(const ClusterAssignment &assignment,
                                        const std::vector<ClusterFeatures> &cf) {
    const std::size_t k = cf.size();
    CanonicalClusters out;
    out.order.resize(k);
    std::iota(out.order.begin(), out.order.end(), 0);
    std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
        return cf[static_cast<std::size_t>(a)].m20_mean >
               cf[static_cast<std::size_t>(b)].m20_mean;
    });

    std::vector<int> new_id(k);
    for (std::size_t n = 0; n < k; ++n)
        new_id[static_cast<std::size_t>(out.order[n])] = static_cast<int>(n);

    out.assignment = assignment;
    for (auto &label : out.assignment.labels)
        label = new_id[static_cast<std::size_t>(label)];
    if (assignment.centroids.rows() == static_cast<Eigen::Index>(k))
        for (std::size_t n = 0; n < k; ++n)
            out.assignment.centroids.row(static_cast<Eigen::Index>(n)) =
                assignment.centroids.row(out.order[n]);
    out.features.reserve(k);
    for (int old : out.order)
        out.features.push_back(cf[static_cast<std::size_t>(old)]);
    return out;
}

} // namespace qa3c::cluster
