// SPDX-License-Identifier: Apache-2.0
#pragma once

// Command-line front end: `cluster`, `evaluate` and `synth`.
//
// Exit status: 0 success, 1 input or validation failure, 2 usage error.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blossom/annotation_io.hpp"
#include "blossom/error.hpp"
#include "blossom/evaluation.hpp"
#include "blossom/format.hpp"
#include "blossom/pipeline.hpp"
#include "blossom/render.hpp"
#include "blossom/synth.hpp"

namespace blossom::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_input_error = 1;
inline constexpr int exit_usage_error = 2;

inline constexpr const char* seed_env_var = "BLOSSOM_SEED";

/// Bad flag values found after CLI11 has accepted the command line.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

namespace fs = std::filesystem;

/// "AxB" with positive integers (canvas) or positive decimals (box size).
template <typename T>
std::pair<T, T> parse_pair(const std::string& text, char separator, const std::string& flag) {
    const auto pos = text.find(separator);
    const auto fail = [&] {
        throw UsageError(flag + ": expected <a>" + std::string(1, separator) + "<b>, got '" + text + "'");
    };
    if (pos == std::string::npos) fail();
    T a{};
    T b{};
    const auto parse_one = [&](std::string_view part, T& value) {
        const auto* end = part.data() + part.size();
        auto [ptr, ec] = std::from_chars(part.data(), end, value);
        if (part.empty() || ec != std::errc{} || ptr != end || !(value > T{})) fail();
    };
    parse_one(std::string_view(text).substr(0, pos), a);
    parse_one(std::string_view(text).substr(pos + 1), b);
    return {a, b};
}

inline std::pair<std::size_t, std::size_t> parse_members(const std::string& text) {
    const auto pos = text.find("..");
    std::size_t lo = 0;
    std::size_t hi = 0;
    const auto number = [&](std::string_view part, std::size_t& value) {
        const auto* end = part.data() + part.size();
        auto [ptr, ec] = std::from_chars(part.data(), end, value);
        return !part.empty() && ec == std::errc{} && ptr == end;
    };
    const bool ok = pos == std::string::npos
                        ? number(text, lo) && (hi = lo, true)
                        : number(std::string_view(text).substr(0, pos), lo) &&
                              number(std::string_view(text).substr(pos + 2), hi);
    if (!ok || lo < 1 || lo > hi) {
        throw UsageError("--members: expected A..B with 1 <= A <= B, got '" + text + "'");
    }
    return {lo, hi};
}

inline Taxonomy load_taxonomy(const std::string& names_flag, const fs::path& fallback_dir) {
    if (!names_flag.empty()) return Taxonomy::parse(read_text_file(names_flag));
    const auto implicit = fallback_dir / "names";
    if (fs::is_regular_file(implicit)) return Taxonomy::parse(read_text_file(implicit));
    return {};
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        write_text_file(path, content);
    }
}

struct ClusterOptions {
    std::string labels_dir;
    std::size_t k_max = 20;
    double k1_threshold = 0.0;
    std::vector<std::string> categories;
    std::size_t max_items = 0;
    std::uint64_t seed = 0;
    std::size_t restarts = 10;
    std::size_t max_iterations = 100;
    std::string mode = "auto";
    std::string names;
    std::size_t threads = 1;
    std::string out;
    std::string csv;
    std::string render_dir;
    std::string canvas = "640x640";
};

inline int run_cluster(const ClusterOptions& o, std::ostream& out) {
    const auto canvas = parse_pair<std::size_t>(o.canvas, 'x', "--canvas");
    const auto taxonomy = load_taxonomy(o.names, o.labels_dir);

    PipelineConfig config;
    config.k_max = o.k_max;
    config.k1_threshold = o.k1_threshold;
    config.kmeans.seed = o.seed;
    config.kmeans.restarts = o.restarts;
    config.kmeans.max_iterations = o.max_iterations;
    if (o.max_items > 0) config.max_items_warning = o.max_items;
    if (!o.categories.empty()) {
        std::set<CategoryIndex> filter;
        for (const auto& token : o.categories) {
            const auto index = taxonomy.find(token);
            if (!index) throw UsageError("--category: unknown category '" + token + "'");
            filter.insert(*index);
        }
        config.category_filter = std::move(filter);
    }

    std::optional<LabelMode> mode;
    if (o.mode == "gt") mode = LabelMode::ground_truth;
    if (o.mode == "pred") mode = LabelMode::prediction;

    const auto frames = load_label_dir(o.labels_dir, mode);
    const auto reports = run_sequence(frames, config, o.threads);

    emit(o.out, dump_canonical(reports_to_json(reports, config, taxonomy)), out);
    if (!o.csv.empty()) write_text_file(o.csv, reports_to_csv(reports, taxonomy));
    if (!o.render_dir.empty()) {
        for (std::size_t i = 0; i < frames.size(); ++i) {
            write_text_file(fs::path(o.render_dir) / (frames[i].frame_id + ".svg"),
                            render_overlay(frames[i], reports[i], {canvas.first, canvas.second}));
        }
    }
    return exit_ok;
}

struct EvaluateOptions {
    std::string pred_dir;
    std::string gt_dir;
    double iou = 0.5;
    double conf = 0.25;
    std::string names;
    std::string out;
    std::string csv;
    std::string model_tag = "model";
};

inline int run_evaluate(const EvaluateOptions& o, std::ostream& out) {
    const auto taxonomy = load_taxonomy(o.names, o.gt_dir);
    const auto truth = load_label_dir(o.gt_dir, LabelMode::ground_truth);
    const auto preds = load_label_dir(o.pred_dir, LabelMode::prediction);
    const auto report = evaluate_dataset(preds, truth, o.iou, o.conf);
    emit(o.out, dump_canonical(to_json(report, taxonomy)), out);
    if (!o.csv.empty()) write_text_file(o.csv, metrics_table_csv(o.model_tag, report));
    return exit_ok;
}

struct SynthOptions {
    std::size_t clusters = 0;
    std::string members;
    double spread = 0.0;
    double separation = 0.0;
    double opened_frac = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t frames = 1;
    std::string box = "0.04x0.04";
    bool predictions = false;
    double jitter = 0.005;
    double drop = 0.1;
    double spurious = 0.2;
};

/// Writes `labels/` (ground truth), `truth/` (sidecar JSON) and, with
/// --predictions, `pred/` under the output directory.
inline int run_synth(const SynthOptions& o, std::ostream& out) {
    const auto [lo, hi] = parse_members(o.members);
    const auto [bw, bh] = parse_pair<double>(o.box, 'x', "--box");
    const fs::path root(o.out);
    for (std::size_t f = 0; f < o.frames; ++f) {
        SceneSpec spec;
        spec.cluster_count = o.clusters;
        spec.members_min = lo;
        spec.members_max = hi;
        spec.intra_spread = o.spread;
        spec.min_separation = o.separation;
        spec.box_w = bw;
        spec.box_h = bh;
        spec.opened_fraction = o.opened_frac;
        spec.seed = derive_seed(o.seed, f);

        char name[32];
        std::snprintf(name, sizeof name, "frame_%04zu", f);
        const auto scene = generate_scene(spec, name);
        write_text_file(root / "labels" / (std::string(name) + ".txt"),
                        serialize_label_file(scene.frame, LabelMode::ground_truth));
        write_text_file(root / "truth" / (std::string(name) + ".json"), dump_canonical(scene_truth_json(scene)));
        if (o.predictions) {
            const auto preds = perturb_detections(scene, o.jitter, o.drop, o.spurious, derive_seed(spec.seed, 0x70726564));
            write_text_file(root / "pred" / (std::string(name) + ".txt"),
                            serialize_label_file(preds, LabelMode::prediction));
        }
    }
    out << "wrote " << o.frames << " frame(s) to " << root.string() << "\n";
    return exit_ok;
}

} // namespace detail

/// Runs the CLI on `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"Flower-cluster reports and detection evaluation for YOLO label files", "blossom"};
    app.require_subcommand(1);

    detail::ClusterOptions cluster;
    auto* cmd_cluster = app.add_subcommand("cluster", "Cluster detections per frame and report cluster centroids");
    cmd_cluster->add_option("labels-dir", cluster.labels_dir, "Directory of .txt label files")->required();
    cmd_cluster->add_option("--k-max", cluster.k_max, "Largest k tried by the silhouette sweep")->check(CLI::PositiveNumber);
    cmd_cluster->add_option("--k1-threshold", cluster.k1_threshold, "Best silhouette at or below this falls back to k=1");
    cmd_cluster->add_option("--category", cluster.categories, "Keep only this category (name or index); repeatable");
    cmd_cluster->add_option("--max-items", cluster.max_items, "Warn when a cluster has more members than this")->check(CLI::PositiveNumber);
    cmd_cluster->add_option("--seed", cluster.seed, "k-means seed")->envname(seed_env_var);
    cmd_cluster->add_option("--restarts", cluster.restarts, "k-means restarts per k")->check(CLI::PositiveNumber);
    cmd_cluster->add_option("--max-iterations", cluster.max_iterations, "Lloyd iteration cap")->check(CLI::PositiveNumber);
    cmd_cluster->add_option("--mode", cluster.mode, "Label format: gt, pred or auto (per file)")->check(CLI::IsMember({"auto", "gt", "pred"}));
    cmd_cluster->add_option("--names", cluster.names, "Category names file (default: <labels-dir>/names if present)");
    cmd_cluster->add_option("--threads", cluster.threads, "Worker threads across frames")->check(CLI::PositiveNumber);
    cmd_cluster->add_option("--out", cluster.out, "JSON report path (default: stdout)");
    cmd_cluster->add_option("--csv", cluster.csv, "Per-cluster CSV path");
    auto* render = cmd_cluster->add_option("--render", cluster.render_dir, "Directory for per-frame SVG overlays");
    cmd_cluster->add_option("--canvas", cluster.canvas, "Overlay size in pixels, WxH")->needs(render);

    detail::EvaluateOptions evaluate;
    auto* cmd_evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
    cmd_evaluate->add_option("--pred", evaluate.pred_dir, "Prediction label directory")->required();
    cmd_evaluate->add_option("--gt", evaluate.gt_dir, "Ground-truth label directory")->required();
    cmd_evaluate->add_option("--iou", evaluate.iou, "IoU threshold for a match")->check(CLI::Range(0.0, 1.0));
    cmd_evaluate->add_option("--conf", evaluate.conf, "Confidence threshold for scalar precision/recall")->check(CLI::Range(0.0, 1.0));
    cmd_evaluate->add_option("--names", evaluate.names, "Category names file (default: <gt>/names if present)");
    cmd_evaluate->add_option("--out", evaluate.out, "JSON report path (default: stdout)");
    cmd_evaluate->add_option("--csv", evaluate.csv, "Metrics table CSV path");
    cmd_evaluate->add_option("--model-tag", evaluate.model_tag, "Model column of the metrics table");

    detail::SynthOptions synth;
    auto* cmd_synth = app.add_subcommand("synth", "Generate synthetic frames with known clusters");
    cmd_synth->add_option("--clusters", synth.clusters, "Clusters per frame")->required()->check(CLI::PositiveNumber);
    cmd_synth->add_option("--members", synth.members, "Members per cluster, A..B")->required();
    cmd_synth->add_option("--spread", synth.spread, "Std-dev of member offsets")->required()->check(CLI::NonNegativeNumber);
    cmd_synth->add_option("--separation", synth.separation, "Minimum distance between cluster centers")->required()->check(CLI::PositiveNumber);
    cmd_synth->add_option("--opened-frac", synth.opened_frac, "Probability a flower is opened")->check(CLI::Range(0.0, 1.0));
    cmd_synth->add_option("--seed", synth.seed, "Generator seed")->required()->envname(seed_env_var);
    cmd_synth->add_option("--out", synth.out, "Output directory")->required();
    cmd_synth->add_option("--frames", synth.frames, "Number of frames")->check(CLI::PositiveNumber);
    cmd_synth->add_option("--box", synth.box, "Box size as normalized WxH");
    cmd_synth->add_flag("--predictions", synth.predictions, "Also write perturbed predictions to pred/");
    cmd_synth->add_option("--jitter", synth.jitter, "Prediction center jitter (std-dev)")->check(CLI::NonNegativeNumber);
    cmd_synth->add_option("--drop", synth.drop, "Probability a flower is missed")->check(CLI::Range(0.0, 0.999999));
    cmd_synth->add_option("--spurious", synth.spurious, "Spurious detections per ground-truth box")->check(CLI::Range(0.0, 0.999999));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage_error;
    }

    try {
        if (cmd_cluster->parsed()) return detail::run_cluster(cluster, out);
        if (cmd_evaluate->parsed()) return detail::run_evaluate(evaluate, out);
        return detail::run_synth(synth, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }
}

} // namespace blossom::cli
