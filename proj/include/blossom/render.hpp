// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>

#include "blossom/annotation_io.hpp"
#include "blossom/error.hpp"
#include "blossom/format.hpp"
#include "blossom/pipeline.hpp"

namespace blossom {

struct Canvas {
    std::size_t width = 640;
    std::size_t height = 640;
};

namespace detail {

inline std::string xml_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string_view category_stroke(CategoryIndex category) {
    switch (category) {
    case unopened: return "#ffa500"; // orange
    case opened: return "#8b0000";   // dark red
    default: return "#808080";
    }
}

inline std::string px(double v) { return format_fixed(v, 2); }

} // namespace detail

inline constexpr std::string_view centroid_marker_color = "#1e90ff";

/// SVG overlay of one frame: every detection box (clipped to the canvas and
/// stroked by category), a "+" at each cluster centroid, and the cluster id
/// beside it.
inline std::string render_overlay(const FrameAnnotations& frame, const FrameClusterReport& report,
                                  Canvas canvas = {}) {
    if (canvas.width == 0 || canvas.height == 0) {
        throw Error(ErrorCode::invalid_argument, "canvas dimensions must be positive");
    }
    const double W = static_cast<double>(canvas.width);
    const double H = static_cast<double>(canvas.height);
    const auto w = std::to_string(canvas.width);
    const auto h = std::to_string(canvas.height);

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h +
           "\" viewBox=\"0 0 " + w + " " + h + "\">\n";
    svg += "  <title>" + detail::xml_escape(frame.frame_id) + "</title>\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + w + "\" height=\"" + h + "\" fill=\"#ffffff\"/>\n";

    if (!frame.detections.empty()) {
        svg += "  <g id=\"detections\" fill=\"none\" stroke-width=\"2\">\n";
        for (const auto& det : frame.detections) {
            const double x0 = std::clamp((det.box.cx - det.box.w / 2) * W, 0.0, W);
            const double x1 = std::clamp((det.box.cx + det.box.w / 2) * W, 0.0, W);
            const double y0 = std::clamp((det.box.cy - det.box.h / 2) * H, 0.0, H);
            const double y1 = std::clamp((det.box.cy + det.box.h / 2) * H, 0.0, H);
            svg += "    <rect x=\"" + detail::px(x0) + "\" y=\"" + detail::px(y0) + "\" width=\"" +
                   detail::px(x1 - x0) + "\" height=\"" + detail::px(y1 - y0) + "\" stroke=\"" +
                   std::string(detail::category_stroke(det.category)) + "\"/>\n";
        }
        svg += "  </g>\n";
    }

    if (!report.clusters.empty()) {
        constexpr double arm = 8.0;
        svg += "  <g id=\"clusters\" stroke=\"" + std::string(centroid_marker_color) +
               "\" stroke-width=\"2\" fill=\"" + std::string(centroid_marker_color) +
               "\" font-family=\"sans-serif\" font-size=\"14\">\n";
        for (const auto& cluster : report.clusters) {
            const double x = cluster.centroid.x * W;
            const double y = cluster.centroid.y * H;
            svg += "    <path d=\"M " + detail::px(x - arm) + " " + detail::px(y) + " H " + detail::px(x + arm) +
                   " M " + detail::px(x) + " " + detail::px(y - arm) + " V " + detail::px(y + arm) + "\"/>\n";
            svg += "    <text x=\"" + detail::px(x + arm + 2) + "\" y=\"" + detail::px(y - arm - 2) +
                   "\" stroke=\"none\">" + std::to_string(cluster.id) + "</text>\n";
        }
        svg += "  </g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace blossom
