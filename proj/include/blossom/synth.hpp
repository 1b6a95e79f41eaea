// SPDX-License-Identifier: Apache-2.0
#pragma once

// Seeded synthetic orchard frames with known cluster structure, and a
// noise model that turns them into imperfect detector output.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "blossom/annotation_io.hpp"
#include "blossom/error.hpp"
#include "blossom/geometry.hpp"

namespace blossom {

struct SceneSpec {
    std::size_t cluster_count = 1;
    std::size_t members_min = 1;
    std::size_t members_max = 1;
    double intra_spread = 0.0;   // std-dev of member offsets
    double min_separation = 0.1; // between cluster centers
    double box_w = 0.04;
    double box_h = 0.04;
    double opened_fraction = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] bool well_separated() const noexcept { return min_separation > 4.0 * intra_spread; }
};

struct SyntheticScene {
    FrameAnnotations frame;               // ground truth
    std::vector<std::size_t> true_labels; // one per detection
    std::vector<Point2> true_centers;
};

/// Center draws allowed before a spec is declared infeasible.
inline constexpr std::size_t center_placement_budget = 10000;

/// SplitMix64 finalizer over (seed, index); used to give each generated
/// frame its own seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace detail {

inline std::mt19937_64 seeded_engine(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return std::mt19937_64(seq);
}

inline void validate(const SceneSpec& spec) {
    const auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_argument, what); };
    if (spec.cluster_count < 1) fail("cluster_count must be positive");
    if (spec.members_min < 1 || spec.members_min > spec.members_max) fail("members range must satisfy 1 <= min <= max");
    if (!(spec.intra_spread >= 0.0)) fail("intra_spread must be non-negative");
    if (!(spec.min_separation > 0.0)) fail("min_separation must be positive");
    if (!(spec.box_w > 0.0 && spec.box_w <= 1.0 && spec.box_h > 0.0 && spec.box_h <= 1.0)) fail("box size must lie in (0,1]");
    if (!(spec.opened_fraction >= 0.0 && spec.opened_fraction <= 1.0)) fail("opened_fraction must lie in [0,1]");
}

} // namespace detail

/// Rejection-samples centers in [0.1, 0.9]^2, then scatters each cluster's
/// members with clamped isotropic Gaussian offsets. Detections are emitted
/// cluster by cluster.
inline SyntheticScene generate_scene(const SceneSpec& spec, std::string frame_id = "scene") {
    detail::validate(spec);
    auto rng = detail::seeded_engine(spec.seed);

    SyntheticScene scene;
    scene.frame.frame_id = std::move(frame_id);
    std::uniform_real_distribution<double> place(0.1, 0.9);
    std::size_t draws = 0;
    while (scene.true_centers.size() < spec.cluster_count) {
        if (draws++ >= center_placement_budget) {
            throw Error(ErrorCode::infeasible_spec,
                        "could not place " + std::to_string(spec.cluster_count) +
                            " centers at separation " + std::to_string(spec.min_separation) +
                            " within " + std::to_string(center_placement_budget) + " draws");
        }
        const Point2 candidate{place(rng), place(rng)};
        const bool clear = std::all_of(scene.true_centers.begin(), scene.true_centers.end(), [&](Point2 c) {
            return euclidean_distance(c, candidate) >= spec.min_separation;
        });
        if (clear) scene.true_centers.push_back(candidate);
    }

    std::uniform_int_distribution<std::size_t> members(spec.members_min, spec.members_max);
    std::normal_distribution<double> offset(0.0, 1.0);
    std::bernoulli_distribution is_opened(spec.opened_fraction);
    for (std::size_t c = 0; c < spec.cluster_count; ++c) {
        const std::size_t count = members(rng);
        for (std::size_t m = 0; m < count; ++m) {
            const double dx = spec.intra_spread * offset(rng);
            const double dy = spec.intra_spread * offset(rng);
            Detection det;
            det.box = {std::clamp(scene.true_centers[c].x + dx, 0.0, 1.0),
                       std::clamp(scene.true_centers[c].y + dy, 0.0, 1.0), spec.box_w, spec.box_h};
            det.category = is_opened(rng) ? opened : unopened;
            scene.frame.detections.push_back(det);
            scene.true_labels.push_back(c);
        }
    }
    return scene;
}

/// Simulated detector output: each ground-truth box is dropped with
/// probability `drop_rate`, otherwise jittered and given a confidence in
/// [0.5, 1); Poisson(spurious_rate * |GT|) false boxes are added anywhere
/// with confidence in [0.1, 0.5), each copying the size and category of a
/// random ground-truth box.
inline FrameAnnotations perturb_detections(const SyntheticScene& scene, double jitter,
                                           double drop_rate, double spurious_rate,
                                           std::uint64_t seed) {
    if (!(jitter >= 0.0)) throw Error(ErrorCode::invalid_argument, "jitter must be non-negative");
    if (!(drop_rate >= 0.0 && drop_rate < 1.0) || !(spurious_rate >= 0.0 && spurious_rate < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "drop and spurious rates must lie in [0,1)");
    }
    auto rng = detail::seeded_engine(seed);
    std::bernoulli_distribution drop(drop_rate);
    std::normal_distribution<double> offset(0.0, 1.0);
    std::uniform_real_distribution<double> kept_confidence(0.5, 1.0);

    FrameAnnotations out;
    out.frame_id = scene.frame.frame_id;
    const auto& truth = scene.frame.detections;
    for (const auto& gt : truth) {
        if (drop(rng)) continue;
        Detection det = gt;
        if (jitter > 0.0) {
            det.box.cx = std::clamp(det.box.cx + jitter * offset(rng), 0.0, 1.0);
            det.box.cy = std::clamp(det.box.cy + jitter * offset(rng), 0.0, 1.0);
        }
        det.confidence = kept_confidence(rng);
        out.detections.push_back(det);
    }

    const double mean_spurious = spurious_rate * static_cast<double>(truth.size());
    if (mean_spurious > 0.0) {
        std::poisson_distribution<std::size_t> spurious(mean_spurious);
        std::uniform_real_distribution<double> anywhere(0.0, 1.0);
        std::uniform_real_distribution<double> low_confidence(0.1, 0.5);
        std::uniform_int_distribution<std::size_t> template_box(0, truth.size() - 1);
        const std::size_t count = spurious(rng);
        for (std::size_t i = 0; i < count; ++i) {
            Detection det;
            const auto& like = truth[template_box(rng)];
            det.box = {anywhere(rng), anywhere(rng), like.box.w, like.box.h};
            det.category = like.category;
            det.confidence = low_confidence(rng);
            out.detections.push_back(det);
        }
    }
    return out;
}

/// Sidecar document carrying the scene's hidden structure.
inline nlohmann::json scene_truth_json(const SyntheticScene& scene) {
    nlohmann::json centers = nlohmann::json::array();
    for (const auto& c : scene.true_centers) centers.push_back({{"x", c.x}, {"y", c.y}});
    return {
        {"cluster_count", scene.true_centers.size()},
        {"frame_id", scene.frame.frame_id},
        {"true_centers", std::move(centers)},
        {"true_labels", scene.true_labels},
    };
}

} // namespace blossom
