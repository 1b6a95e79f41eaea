// SPDX-License-Identifier: Apache-2.0
#pragma once

// Detection scoring against ground truth: greedy IoU matching, precision,
// recall, all-point interpolated AP and mAP.

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "blossom/annotation_io.hpp"
#include "blossom/error.hpp"
#include "blossom/format.hpp"
#include "blossom/geometry.hpp"

namespace blossom {

struct ConfusionCounts {
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t false_negative = 0;

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// TP / (TP + FP); 1 when nothing was predicted.
inline double precision(const ConfusionCounts& c) noexcept {
    const auto denom = c.true_positive + c.false_positive;
    return denom == 0 ? 1.0 : static_cast<double>(c.true_positive) / static_cast<double>(denom);
}

/// TP / (TP + FN); 1 when there was nothing to find.
inline double recall(const ConfusionCounts& c) noexcept {
    const auto denom = c.true_positive + c.false_negative;
    return denom == 0 ? 1.0 : static_cast<double>(c.true_positive) / static_cast<double>(denom);
}

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
    double confidence = 0.0;
};

/// One point per ranked prediction, raw (un-interpolated) precision.
struct PrCurve {
    std::vector<PrPoint> points;
};

struct MatchResult {
    std::vector<std::size_t> ranking;                   // prediction indices, processing order
    std::vector<std::optional<std::size_t>> matched_gt; // per prediction, input order
    std::vector<std::size_t> unmatched_gt;              // ascending

    [[nodiscard]] bool is_true_positive(std::size_t prediction) const {
        return matched_gt[prediction].has_value();
    }

    [[nodiscard]] ConfusionCounts counts() const {
        ConfusionCounts c;
        for (const auto& m : matched_gt) (m ? c.true_positive : c.false_positive) += 1;
        c.false_negative = unmatched_gt.size();
        return c;
    }
};

namespace detail {

inline void require_confidence(std::span<const Detection> predictions) {
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (!predictions[i].confidence) {
            throw Error(ErrorCode::missing_confidence,
                        "prediction " + std::to_string(i) + " has no confidence");
        }
    }
}

/// Indices by descending confidence, ties in input order.
inline std::vector<std::size_t> rank_by_confidence(std::span<const Detection> predictions) {
    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *predictions[a].confidence > *predictions[b].confidence;
    });
    return order;
}

} // namespace detail

/// Greedy matching in descending confidence: each prediction claims the
/// unmatched same-category ground truth with the highest IoU (lowest index
/// on ties) when that IoU reaches `iou_threshold`.
inline MatchResult match_detections(std::span<const Detection> predictions,
                                    std::span<const Detection> ground_truth,
                                    double iou_threshold = 0.5) {
    detail::require_confidence(predictions);
    MatchResult result;
    result.ranking = detail::rank_by_confidence(predictions);
    result.matched_gt.assign(predictions.size(), std::nullopt);
    std::vector<bool> taken(ground_truth.size(), false);

    for (auto p : result.ranking) {
        const auto& pred = predictions[p];
        std::optional<std::size_t> best;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < ground_truth.size(); ++g) {
            if (taken[g] || ground_truth[g].category != pred.category) continue;
            const double overlap = iou(pred.box, ground_truth[g].box);
            if (overlap > best_iou) {
                best_iou = overlap;
                best = g;
            }
        }
        if (best && best_iou >= iou_threshold) {
            taken[*best] = true;
            result.matched_gt[p] = best;
        }
    }
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
        if (!taken[g]) result.unmatched_gt.push_back(g);
    }
    return result;
}

/// A prediction's outcome after matching, in ranking order.
struct RankedOutcome {
    double confidence = 0.0;
    bool true_positive = false;
};

/// All-point interpolated AP over outcomes already sorted by descending
/// confidence: precision is replaced by its running maximum from the tail
/// and integrated exactly over recall.
inline double average_precision_ranked(std::span<const RankedOutcome> ranked,
                                       std::size_t gt_count, PrCurve* curve = nullptr) {
    const std::size_t n = ranked.size();
    std::vector<double> precisions(n);
    std::vector<double> recalls(n);
    ConfusionCounts running;
    for (std::size_t i = 0; i < n; ++i) {
        (ranked[i].true_positive ? running.true_positive : running.false_positive) += 1;
        running.false_negative = gt_count - running.true_positive;
        precisions[i] = precision(running);
        recalls[i] = recall(running);
    }
    if (curve) {
        curve->points.clear();
        for (std::size_t i = 0; i < n; ++i) {
            curve->points.push_back({recalls[i], precisions[i], ranked[i].confidence});
        }
    }
    if (gt_count == 0) return 0.0;

    std::vector<double> envelope(precisions);
    for (std::size_t i = n; i-- > 1;) envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);

    double ap = 0.0;
    double previous_recall = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (recalls[i] > previous_recall) {
            ap += (recalls[i] - previous_recall) * envelope[i];
            previous_recall = recalls[i];
        }
    }
    return std::clamp(ap, 0.0, 1.0);
}

/// AP of one category within a single image.
inline double average_precision(std::span<const Detection> predictions,
                                std::span<const Detection> ground_truth, CategoryIndex category,
                                double iou_threshold = 0.5, PrCurve* curve = nullptr) {
    detail::require_confidence(predictions);
    std::vector<Detection> preds;
    std::vector<Detection> truth;
    for (const auto& d : predictions) if (d.category == category) preds.push_back(d);
    for (const auto& d : ground_truth) if (d.category == category) truth.push_back(d);

    const auto match = match_detections(preds, truth, iou_threshold);
    std::vector<RankedOutcome> ranked;
    ranked.reserve(preds.size());
    for (auto p : match.ranking) ranked.push_back({*preds[p].confidence, match.is_true_positive(p)});
    return average_precision_ranked(ranked, truth.size(), curve);
}

/// Arithmetic mean of per-category AP.
inline double mean_average_precision(const std::map<CategoryIndex, double>& per_category_ap) {
    if (per_category_ap.empty()) {
        throw Error(ErrorCode::no_categories, "mAP needs at least one category with a defined AP");
    }
    double sum = 0.0;
    for (const auto& [category, ap] : per_category_ap) sum += ap;
    return sum / static_cast<double>(per_category_ap.size());
}

struct CategoryEvaluation {
    double ap = 0.0;
    ConfusionCounts counts; // at the report's confidence threshold
    PrCurve pr_curve;
};

struct EvalReport {
    std::map<CategoryIndex, CategoryEvaluation> per_category;
    double map_at_50 = 0.0; // mAP at `iou_threshold`; named for the default
    double precision = 0.0;
    double recall = 0.0;
    double iou_threshold = 0.5;
    double confidence_threshold = 0.25;
};

/// Scores a dataset frame by frame. AP and mAP use every prediction; the
/// scalar precision and recall pool the counts of predictions at or above
/// `confidence_threshold` across categories. Ground-truth frames without a
/// prediction frame contribute false negatives only.
inline EvalReport evaluate_dataset(std::span<const FrameAnnotations> pred_frames,
                                   std::span<const FrameAnnotations> gt_frames,
                                   double iou_threshold = 0.5,
                                   double confidence_threshold = 0.25) {
    std::map<std::string, std::size_t> gt_index;
    for (std::size_t i = 0; i < gt_frames.size(); ++i) {
        if (!gt_index.emplace(gt_frames[i].frame_id, i).second) {
            throw Error(ErrorCode::invalid_argument,
                        "duplicate ground-truth frame '" + gt_frames[i].frame_id + "'");
        }
    }
    std::vector<const FrameAnnotations*> pred_for_gt(gt_frames.size(), nullptr);
    for (const auto& frame : pred_frames) {
        const auto it = gt_index.find(frame.frame_id);
        if (it == gt_index.end()) {
            throw Error(ErrorCode::frame_id_mismatch,
                        "prediction frame '" + frame.frame_id + "' has no ground truth");
        }
        if (pred_for_gt[it->second]) {
            throw Error(ErrorCode::invalid_argument,
                        "duplicate prediction frame '" + frame.frame_id + "'");
        }
        try {
            detail::require_confidence(frame.detections);
        } catch (const Error& e) {
            throw Error(ErrorCode::missing_confidence, "frame '" + frame.frame_id + "': " + e.what());
        }
        pred_for_gt[it->second] = &frame;
    }

    std::set<CategoryIndex> categories;
    for (const auto& f : gt_frames) for (const auto& d : f.detections) categories.insert(d.category);
    for (const auto& f : pred_frames) for (const auto& d : f.detections) categories.insert(d.category);

    EvalReport report;
    report.iou_threshold = iou_threshold;
    report.confidence_threshold = confidence_threshold;
    ConfusionCounts pooled;
    std::map<CategoryIndex, double> aps;

    for (auto category : categories) {
        std::vector<RankedOutcome> outcomes;
        std::size_t gt_count = 0;
        for (std::size_t f = 0; f < gt_frames.size(); ++f) {
            std::vector<Detection> truth;
            for (const auto& d : gt_frames[f].detections) if (d.category == category) truth.push_back(d);
            gt_count += truth.size();
            if (!pred_for_gt[f]) continue;
            std::vector<Detection> preds;
            for (const auto& d : pred_for_gt[f]->detections) if (d.category == category) preds.push_back(d);
            const auto match = match_detections(preds, truth, iou_threshold);
            for (std::size_t p = 0; p < preds.size(); ++p) {
                outcomes.push_back({*preds[p].confidence, match.is_true_positive(p)});
            }
        }
        // Frame order then input order breaks confidence ties.
        std::stable_sort(outcomes.begin(), outcomes.end(),
                         [](const RankedOutcome& a, const RankedOutcome& b) { return a.confidence > b.confidence; });

        CategoryEvaluation eval;
        eval.ap = average_precision_ranked(outcomes, gt_count, &eval.pr_curve);
        for (const auto& o : outcomes) {
            if (o.confidence < confidence_threshold) continue;
            (o.true_positive ? eval.counts.true_positive : eval.counts.false_positive) += 1;
        }
        eval.counts.false_negative = gt_count - eval.counts.true_positive;
        pooled.true_positive += eval.counts.true_positive;
        pooled.false_positive += eval.counts.false_positive;
        pooled.false_negative += eval.counts.false_negative;
        aps[category] = eval.ap;
        report.per_category.emplace(category, std::move(eval));
    }

    report.map_at_50 = mean_average_precision(aps);
    report.precision = precision(pooled);
    report.recall = recall(pooled);
    return report;
}

inline nlohmann::json to_json(const EvalReport& report, const Taxonomy& taxonomy = {}) {
    nlohmann::json per_category = nlohmann::json::object();
    for (const auto& [category, eval] : report.per_category) {
        nlohmann::json curve = nlohmann::json::array();
        for (const auto& p : eval.pr_curve.points) {
            curve.push_back({{"confidence", p.confidence}, {"precision", p.precision}, {"recall", p.recall}});
        }
        per_category[taxonomy.name(category)] = {
            {"ap", eval.ap},
            {"category_index", category},
            {"counts",
             {{"false_negative", eval.counts.false_negative},
              {"false_positive", eval.counts.false_positive},
              {"true_positive", eval.counts.true_positive}}},
            {"pr_curve", std::move(curve)},
        };
    }
    return {
        {"confidence_threshold", report.confidence_threshold},
        {"iou_threshold", report.iou_threshold},
        {"map_at_50", report.map_at_50},
        {"per_category", std::move(per_category)},
        {"precision", report.precision},
        {"recall", report.recall},
        {"vacuous_ratio_convention", "precision and recall are 1 when their denominator is 0"},
    };
}

/// Header plus one row in the column order model, mAP@0.5, precision, recall.
inline std::string metrics_table_csv(const std::string& model_tag, double map_at_50,
                                     double precision_value, double recall_value) {
    return "model,mAP@0.5,precision,recall\n" + model_tag + "," + format_fixed(map_at_50) + "," +
           format_fixed(precision_value) + "," + format_fixed(recall_value) + "\n";
}

inline std::string metrics_table_csv(const std::string& model_tag, const EvalReport& report) {
    return metrics_table_csv(model_tag, report.map_at_50, report.precision, report.recall);
}

} // namespace blossom
