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
 * Rolling K-Means over per-stock window features, cluster aggregate features
 * and agent-state assembly.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qa3c::cluster {

struct ClusterAssignment {
    std::vector<int> labels;      ///< per-row cluster id in [0, K)
    Eigen::MatrixXd centroids;    ///< K x d
    double inertia = 0.0;         ///< sum of squared distances to centroids
    std::size_t iterations = 0;
    /// Inertia after every assignment step, final assignment last.
    std::vector<double> inertia_history;

    [[nodiscard]] std::size_t k() const {
        return static_cast<std::size_t>(centroids.rows());
    }
};

struct ClusterFeatures {
    double m5_mean = 0.0;
    double m20_mean = 0.0;
    double v20_mean = 0.0;
    double size_frac = 0.0;

    bool operator==(const ClusterFeatures &) const = default;
};

struct MarketFeatures {
    double m5 = 0.0;
    double m20 = 0.0;
};

/// [F(0), ..., F(K-1), M]; length 4K + 2.
using AgentState = Eigen::VectorXd;

struct KMeansOptions {
    std::size_t max_iter = 300;
    double tol = 1e-10;
};

[[nodiscard]] constexpr std::size_t state_dim(std::size_t k) {
    return 4 * k + 2;
}

/// k-means++ seeding followed by Lloyd iterations. Deterministic in `seed`.
/// Throws InfeasibleClusteringError when rows < K.
[[nodiscard]] ClusterAssignment kmeans_fit(const Eigen::MatrixXd &features,
                                           std::size_t k, std::uint64_t seed,
                                           const KMeansOptions &opts = {});

[[nodiscard]] Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd &features,
                                               std::size_t k,
                                               std::uint64_t seed);

/// Lloyd iterations from the given initial centroids. Empty clusters are
/// re-seeded at the point farthest from its assigned centroid.
[[nodiscard]] ClusterAssignment lloyd(const Eigen::MatrixXd &features,
                                      Eigen::MatrixXd centroids,
                                      const KMeansOptions &opts = {});

[[nodiscard]] std::vector<int> assign_labels(const Eigen::MatrixXd &features,
                                             const Eigen::MatrixXd &centroids);

[[nodiscard]] double inertia(const Eigen::MatrixXd &features,
                             std::span<const int> labels,
                             const Eigen::MatrixXd &centroids);

/// Per-cluster column means of [m5, m20, v20] and member fraction. Empty
/// clusters are all zeros.
[[nodiscard]] std::vector<ClusterFeatures>
cluster_features(const Eigen::MatrixXd &features, std::span<const int> labels,
                 std::size_t k);

/// Compounded 5- and 20-day benchmark returns ending at `end_index`.
[[nodiscard]] MarketFeatures
market_features(const Eigen::Ref<const Eigen::VectorXd> &benchmark_returns,
                std::size_t end_index);

[[nodiscard]] AgentState assemble_state(std::span<const ClusterFeatures> cf,
                                        const MarketFeatures &mf);

struct CanonicalClusters {
    ClusterAssignment assignment;
    std::vector<ClusterFeatures> features;
    /// order[new_id] = old_id
    std::vector<int> order;
};

/// Re-indexes clusters by descending m20 mean (ties by original id) so that
/// action ids keep a stable meaning from month to month.
[[nodiscard]] CanonicalClusters
canonicalize_clusters(const ClusterAssignment &assignment,
                      const std::vector<ClusterFeatures> &cf);

} // namespace qa3c::cluster
