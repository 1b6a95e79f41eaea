// SPDX-License-Identifier: Apache-2.0
#pragma once

// Per-frame flower-cluster reports: filter, centroid, choose k, order the
// clusters for the robot, tally categories.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "blossom/annotation_io.hpp"
#include "blossom/clustering.hpp"
#include "blossom/error.hpp"
#include "blossom/format.hpp"
#include "blossom/geometry.hpp"

namespace blossom {

struct PipelineConfig {
    std::size_t k_max = 20;
    double k1_threshold = 0.0;
    std::optional<std::set<CategoryIndex>> category_filter; // unset keeps every category
    KmeansConfig kmeans;
    std::optional<std::size_t> max_items_warning;
};

struct ClusterReport {
    std::size_t id = 0;
    Point2 centroid;
    std::vector<std::size_t> member_indices; // detection indices in the source frame, ascending
    std::map<CategoryIndex, std::size_t> category_counts;
    std::vector<std::string> warnings;
};

struct FrameClusterReport {
    std::string frame_id;
    std::size_t chosen_k = 0;             // 0 only when no detection survives the filter
    std::size_t detection_count = 0;      // after filtering
    std::vector<ClusterReport> clusters;  // ordered by id, ids in raster order
    std::map<std::size_t, double> sweep_scores;
};

inline FrameClusterReport process_frame(const FrameAnnotations& frame, const PipelineConfig& config) {
    if (config.k_max < 1) throw Error(ErrorCode::invalid_argument, "k_max must be at least 1");

    FrameClusterReport report;
    report.frame_id = frame.frame_id;

    std::vector<std::size_t> kept;
    std::vector<Point2> points;
    for (std::size_t i = 0; i < frame.detections.size(); ++i) {
        const auto& det = frame.detections[i];
        if (config.category_filter && !config.category_filter->contains(det.category)) continue;
        kept.push_back(i);
        points.push_back(box_centroid(det.box));
    }
    report.detection_count = kept.size();
    if (kept.empty()) return report;

    auto selection = select_k(points, config.k_max, config.kmeans, config.k1_threshold);
    report.chosen_k = selection.chosen_k;
    report.sweep_scores = std::move(selection.mean_silhouette_by_k);

    const auto& assignment = selection.assignment;
    const auto ids = assign_cluster_ids(assignment.centroids);
    report.clusters.resize(assignment.k);
    for (std::size_t c = 0; c < assignment.k; ++c) {
        report.clusters[ids[c]].id = ids[c];
        report.clusters[ids[c]].centroid = assignment.centroids[c];
    }
    for (std::size_t j = 0; j < kept.size(); ++j) {
        auto& cluster = report.clusters[ids[assignment.labels[j]]];
        cluster.member_indices.push_back(kept[j]);
        ++cluster.category_counts[frame.detections[kept[j]].category];
    }
    if (config.max_items_warning) {
        const auto limit = *config.max_items_warning;
        for (auto& cluster : report.clusters) {
            if (cluster.member_indices.size() > limit) {
                cluster.warnings.push_back("cluster " + std::to_string(cluster.id) + " has " +
                                           std::to_string(cluster.member_indices.size()) +
                                           " members, more than the configured maximum of " +
                                           std::to_string(limit));
            }
        }
    }
    return report;
}

/// Processes frames independently, in order. With more than one thread the
/// frames are spread over workers; output and error reporting are the same
/// as the sequential run (the first failing frame in input order wins).
inline std::vector<FrameClusterReport> run_sequence(std::span<const FrameAnnotations> frames,
                                                    const PipelineConfig& config,
                                                    std::size_t threads = 1) {
    const auto wrap = [&](std::size_t index, const std::exception& e) {
        return Error(ErrorCode::frame_failed, "frame '" + frames[index].frame_id + "': " + e.what());
    };

    std::vector<FrameClusterReport> reports(frames.size());
    if (threads <= 1 || frames.size() <= 1) {
        for (std::size_t i = 0; i < frames.size(); ++i) {
            try {
                reports[i] = process_frame(frames[i], config);
            } catch (const std::exception& e) {
                throw wrap(i, e);
            }
        }
        return reports;
    }

    std::vector<std::exception_ptr> failures(frames.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < frames.size(); i = next++) {
            try {
                reports[i] = process_frame(frames[i], config);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    const std::size_t count = std::min(threads, frames.size());
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    pool.clear(); // joins

    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const std::exception& e) {
            throw wrap(i, e);
        }
    }
    return reports;
}

inline nlohmann::json to_json(const PipelineConfig& config) {
    nlohmann::json filter = nullptr;
    if (config.category_filter) filter = std::vector<CategoryIndex>(config.category_filter->begin(), config.category_filter->end());
    char epsilon[32];
    std::snprintf(epsilon, sizeof epsilon, "%.3g", config.kmeans.convergence_epsilon);
    return {
        {"category_filter", std::move(filter)},
        {"k1_threshold", config.k1_threshold},
        {"k_max", config.k_max},
        {"kmeans",
         {{"convergence_epsilon", epsilon},
          {"max_iterations", config.kmeans.max_iterations},
          {"restarts", config.kmeans.restarts},
          {"seed", config.kmeans.seed}}},
        {"max_items_warning", config.max_items_warning ? nlohmann::json(*config.max_items_warning) : nlohmann::json(nullptr)},
    };
}

inline nlohmann::json to_json(const FrameClusterReport& report, const Taxonomy& taxonomy = {}) {
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& cluster : report.clusters) {
        nlohmann::json counts = nlohmann::json::object();
        for (std::size_t c = 0; c < taxonomy.size(); ++c) counts[taxonomy.name(static_cast<CategoryIndex>(c))] = 0;
        for (const auto& [category, n] : cluster.category_counts) counts[taxonomy.name(category)] = n;
        clusters.push_back({
            {"category_counts", std::move(counts)},
            {"centroid", {{"x", cluster.centroid.x}, {"y", cluster.centroid.y}}},
            {"id", cluster.id},
            {"member_count", cluster.member_indices.size()},
            {"member_indices", cluster.member_indices},
            {"warnings", cluster.warnings},
        });
    }
    nlohmann::json sweep = nlohmann::json::object();
    for (const auto& [k, score] : report.sweep_scores) sweep[std::to_string(k)] = score;
    return {
        {"chosen_k", report.chosen_k},
        {"clusters", std::move(clusters)},
        {"detection_count", report.detection_count},
        {"frame_id", report.frame_id},
        {"sweep_scores", std::move(sweep)},
    };
}

/// The full `cluster` report document: configuration echo plus one entry
/// per frame, in input order. Centroids are normalized coordinates.
inline nlohmann::json reports_to_json(std::span<const FrameClusterReport> reports,
                                      const PipelineConfig& config, const Taxonomy& taxonomy = {}) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& r : reports) frames.push_back(to_json(r, taxonomy));
    return {{"config", to_json(config)}, {"frames", std::move(frames)}};
}

/// One row per cluster: frame_id, cluster_id, cx, cy, member_count, then
/// one count column per taxonomy category.
inline std::string reports_to_csv(std::span<const FrameClusterReport> reports, const Taxonomy& taxonomy = {}) {
    std::string out = "frame_id,cluster_id,cx,cy,member_count";
    for (const auto& name : taxonomy.names()) out += "," + name;
    out += '\n';
    for (const auto& r : reports) {
        for (const auto& cluster : r.clusters) {
            out += r.frame_id + "," + std::to_string(cluster.id) + "," + format_fixed(cluster.centroid.x) + "," +
                   format_fixed(cluster.centroid.y) + "," + std::to_string(cluster.member_indices.size());
            for (std::size_t c = 0; c < taxonomy.size(); ++c) {
                const auto it = cluster.category_counts.find(static_cast<CategoryIndex>(c));
                out += "," + std::to_string(it == cluster.category_counts.end() ? 0 : it->second);
            }
            out += '\n';
        }
    }
    return out;
}

} // namespace blossom
