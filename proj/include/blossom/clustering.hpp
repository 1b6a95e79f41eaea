// SPDX-License-Identifier: Apache-2.0
#pragma once

// Flower-cluster association: Lloyd's k-means with k-means++ seeding,
// silhouette scoring, and silhouette-driven choice of k.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "blossom/error.hpp"
#include "blossom/geometry.hpp"

namespace blossom {

struct KmeansConfig {
    std::size_t restarts = 10;
    std::size_t max_iterations = 100;
    double convergence_epsilon = 1e-9;
    std::uint64_t seed = 0;
};

struct ClusterAssignment {
    std::size_t k = 0;
    std::vector<std::size_t> labels;  // one per point, each < k
    std::vector<Point2> centroids;    // mean of the points carrying each label
    double sse = 0.0;                 // within-cluster sum of squared distances
};

struct KSelectionResult {
    std::size_t chosen_k = 0;
    ClusterAssignment assignment;
    std::map<std::size_t, double> mean_silhouette_by_k;
};

/// Called after every Lloyd iteration with the restart index, the 1-based
/// iteration number and the SSE at the end of that iteration.
using KmeansObserver = std::function<void(std::size_t, std::size_t, double)>;

/// Per-label arithmetic means. Labels must be dense in [0, max label].
inline std::vector<Point2> cluster_centroids(std::span<const Point2> points,
                                             std::span<const std::size_t> labels) {
    if (points.size() != labels.size()) {
        throw Error(ErrorCode::invalid_argument, "points and labels differ in length");
    }
    const std::size_t k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<Point2> sums(k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        sums[labels[i]].x += points[i].x;
        sums[labels[i]].y += points[i].y;
        ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        const auto n = static_cast<double>(counts[c]);
        sums[c] = {sums[c].x / n, sums[c].y / n};
    }
    return sums;
}

namespace detail {

inline double assignment_sse(std::span<const Point2> points, std::span<const std::size_t> labels,
                             std::span<const Point2> centroids) {
    double sse = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        sse += squared_distance(points[i], centroids[labels[i]]);
    }
    return sse;
}

inline std::mt19937_64 restart_engine(std::uint64_t seed, std::size_t restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(restart) >> 32)};
    return std::mt19937_64(seq);
}

/// k-means++: first center uniform, the rest drawn with probability
/// proportional to squared distance from the nearest chosen center.
inline std::vector<Point2> seed_plus_plus(std::span<const Point2> points, std::size_t k,
                                          std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<Point2> centers;
    centers.reserve(k);
    std::vector<bool> chosen(n, false);

    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::size_t pick = first(rng);
    centers.push_back(points[pick]);
    chosen[pick] = true;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], points[pick]);

    while (centers.size() < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        if (total > 0.0) {
            std::uniform_real_distribution<double> uni(0.0, total);
            const double target = uni(rng);
            double acc = 0.0;
            pick = n;
            std::size_t last_positive = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                last_positive = i;
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) pick = last_positive;
        } else {
            // Every remaining point coincides with a center.
            pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
        }
        centers.push_back(points[pick]);
        chosen[pick] = true;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(points[i], points[pick]));
        }
    }
    return centers;
}

/// Nearest-centroid assignment, ties to the lower cluster index.
inline void assign_nearest(std::span<const Point2> points, std::span<const Point2> centroids,
                           std::vector<std::size_t>& labels) {
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t best = 0;
        double best_d = squared_distance(points[i], centroids[0]);
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            const double d = squared_distance(points[i], centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
    }
}

/// Moves the point farthest from its centroid (taken from a cluster with
/// at least two members) into each empty cluster.
inline void reseed_empty(std::span<const Point2> points, std::vector<Point2>& centroids,
                         std::vector<std::size_t>& labels) {
    const std::size_t k = centroids.size();
    std::vector<std::size_t> counts(k, 0);
    for (auto l : labels) ++counts[l];
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        std::size_t far = points.size();
        double far_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (counts[labels[i]] < 2) continue;
            const double d = squared_distance(points[i], centroids[labels[i]]);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        --counts[labels[far]];
        labels[far] = c;
        counts[c] = 1;
        centroids[c] = points[far];
    }
}

inline ClusterAssignment lloyd(std::span<const Point2> points, std::size_t k,
                               const KmeansConfig& config, std::size_t restart,
                               const KmeansObserver& observer) {
    auto rng = restart_engine(config.seed, restart);
    ClusterAssignment result;
    result.k = k;
    result.centroids = seed_plus_plus(points, k, rng);
    result.labels.assign(points.size(), 0);

    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 1; iter <= config.max_iterations; ++iter) {
        assign_nearest(points, result.centroids, result.labels);
        reseed_empty(points, result.centroids, result.labels);
        result.centroids = cluster_centroids(points, result.labels);
        result.sse = assignment_sse(points, result.labels, result.centroids);
        if (observer) observer(restart, iter, result.sse);
        if (previous - result.sse <= config.convergence_epsilon) break;
        previous = result.sse;
    }
    return result;
}

} // namespace detail

/// Best of `config.restarts` seeded Lloyd runs (lowest SSE, ties to the
/// earliest restart). Every returned cluster is non-empty.
inline ClusterAssignment kmeans(std::span<const Point2> points, std::size_t k,
                                const KmeansConfig& config = {},
                                const KmeansObserver& observer = {}) {
    if (points.empty()) throw Error(ErrorCode::empty_input, "k-means needs at least one point");
    if (k < 1 || k > points.size()) {
        throw Error(ErrorCode::invalid_k, "k=" + std::to_string(k) + " with " +
                                              std::to_string(points.size()) + " points");
    }
    if (config.restarts < 1 || config.max_iterations < 1) {
        throw Error(ErrorCode::invalid_argument, "restarts and max_iterations must be positive");
    }

    ClusterAssignment best;
    bool have_best = false;
    for (std::size_t r = 0; r < config.restarts; ++r) {
        auto candidate = detail::lloyd(points, k, config, r, observer);
        if (!have_best || candidate.sse < best.sse) {
            best = std::move(candidate);
            have_best = true;
        }
    }
    return best;
}

namespace detail {

inline std::size_t validated_cluster_count(std::span<const Point2> points,
                                           std::span<const std::size_t> labels) {
    if (points.size() != labels.size()) {
        throw Error(ErrorCode::invalid_argument, "points and labels differ in length");
    }
    if (points.empty()) throw Error(ErrorCode::empty_input, "silhouette of an empty point set");
    const std::size_t k = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<bool> seen(k, false);
    std::size_t populated = 0;
    for (auto l : labels) {
        if (!seen[l]) ++populated;
        seen[l] = true;
    }
    if (populated < 2) {
        throw Error(ErrorCode::single_cluster, "silhouette is undefined for a single cluster");
    }
    return k;
}

inline double silhouette_unchecked(std::span<const Point2> points,
                                   std::span<const std::size_t> labels, std::size_t k,
                                   std::size_t i, std::vector<double>& sums,
                                   std::vector<std::size_t>& counts) {
    sums.assign(k, 0.0);
    counts.assign(k, 0);
    for (std::size_t j = 0; j < points.size(); ++j) {
        ++counts[labels[j]];
        if (j != i) sums[labels[j]] += euclidean_distance(points[i], points[j]);
    }
    const std::size_t own = labels[i];
    if (counts[own] == 1) return 0.0;
    const double a = sums[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        if (c == own || counts[c] == 0) continue;
        b = std::min(b, sums[c] / static_cast<double>(counts[c]));
    }
    const double scale = std::max(a, b);
    if (scale <= 0.0) return 0.0;
    return (b - a) / scale;
}

} // namespace detail

/// Silhouette of point `i`: (b - a) / max(a, b), with a the mean distance
/// to the rest of its own cluster and b the smallest mean distance to any
/// other cluster. Members of singleton clusters score 0.
inline double silhouette_coefficient(std::span<const Point2> points,
                                     std::span<const std::size_t> labels, std::size_t i) {
    const std::size_t k = detail::validated_cluster_count(points, labels);
    if (i >= points.size()) throw Error(ErrorCode::invalid_argument, "point index out of range");
    std::vector<double> sums;
    std::vector<std::size_t> counts;
    return detail::silhouette_unchecked(points, labels, k, i, sums, counts);
}

inline double mean_silhouette(std::span<const Point2> points, std::span<const std::size_t> labels) {
    const std::size_t k = detail::validated_cluster_count(points, labels);
    std::vector<double> sums;
    std::vector<std::size_t> counts;
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        total += detail::silhouette_unchecked(points, labels, k, i, sums, counts);
    }
    return total / static_cast<double>(points.size());
}

/// Mean silhouettes closer than this count as equal when choosing k.
inline constexpr double silhouette_tie_tolerance = 1e-12;

/// Sweeps k over [2, min(k_max, n - 1)] and keeps the k with the highest
/// mean silhouette (smallest k on ties). Falls back to k = 1 when the sweep
/// is empty or its best score does not exceed `k1_threshold`.
inline KSelectionResult select_k(std::span<const Point2> points, std::size_t k_max,
                                 const KmeansConfig& config = {}, double k1_threshold = 0.0) {
    if (points.empty()) throw Error(ErrorCode::empty_input, "k selection needs at least one point");
    if (k_max < 1) throw Error(ErrorCode::invalid_argument, "k_max must be at least 1");

    KSelectionResult result;
    const std::size_t upper = std::min(k_max, points.size() - 1);
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 2; k <= upper; ++k) {
        auto assignment = kmeans(points, k, config);
        const double score = mean_silhouette(points, assignment.labels);
        result.mean_silhouette_by_k[k] = score;
        if (score > best_score + silhouette_tie_tolerance) {
            best_score = score;
            result.chosen_k = k;
            result.assignment = std::move(assignment);
        }
    }
    if (result.chosen_k == 0 || best_score <= k1_threshold) {
        result.chosen_k = 1;
        result.assignment = kmeans(points, 1, config);
    }
    return result;
}

/// Raster-order identities: ids[c] is the rank of centroid c by ascending
/// x, then ascending y, then original index.
inline std::vector<std::size_t> assign_cluster_ids(std::span<const Point2> centroids) {
    std::vector<std::size_t> order(centroids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (centroids[a].x != centroids[b].x) return centroids[a].x < centroids[b].x;
        if (centroids[a].y != centroids[b].y) return centroids[a].y < centroids[b].y;
        return a < b;
    });
    std::vector<std::size_t> ids(centroids.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) ids[order[rank]] = rank;
    return ids;
}

} // namespace blossom
