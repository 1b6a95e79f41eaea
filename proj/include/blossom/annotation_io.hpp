// SPDX-License-Identifier: Apache-2.0
#pragma once

// YOLO label files: one object per line, `class cx cy w h [confidence]`,
// all coordinates normalized to the image size.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "blossom/error.hpp"
#include "blossom/format.hpp"

namespace blossom {

using CategoryIndex = std::uint32_t;

inline constexpr CategoryIndex unopened = 0;
inline constexpr CategoryIndex opened = 1;

/// Normalized YOLO box: center and size as fractions of the image.
struct BoundingBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    /// Center inside the unit square, extents in (0, 1]. Edges may still
    /// poke past the frame.
    [[nodiscard]] bool valid() const noexcept {
        return cx >= 0.0 && cx <= 1.0 && cy >= 0.0 && cy <= 1.0 && w > 0.0 && w <= 1.0 &&
               h > 0.0 && h <= 1.0;
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
    CategoryIndex category = unopened;
    BoundingBox box;
    std::optional<double> confidence; // present on predictions only

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct FrameAnnotations {
    std::string frame_id;
    std::vector<Detection> detections; // file line order
    std::optional<std::string> source_path;
};

enum class LabelMode { ground_truth, prediction };

/// Index-to-name mapping for categories. Defaults to 0 = unopened,
/// 1 = opened.
class Taxonomy {
public:
    Taxonomy() : names_{"unopened", "opened"} {}
    explicit Taxonomy(std::vector<std::string> names) : names_(std::move(names)) {}

    /// One name per line; the 0-based line number is the index. Trailing
    /// blank lines are ignored, interior ones are an error.
    static Taxonomy parse(std::string_view content);

    [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }

    /// Name for `index`, or `class_<index>` beyond the configured list.
    [[nodiscard]] std::string name(CategoryIndex index) const {
        if (index < names_.size()) return names_[index];
        return "class_" + std::to_string(index);
    }

    /// Accepts either a configured name or a decimal index.
    [[nodiscard]] std::optional<CategoryIndex> find(std::string_view token) const {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (names_[i] == token) return static_cast<CategoryIndex>(i);
        }
        CategoryIndex value = 0;
        const auto* end = token.data() + token.size();
        auto [ptr, ec] = std::from_chars(token.data(), end, value);
        if (ec == std::errc{} && ptr == end && !token.empty()) return value;
        return std::nullopt;
    }

private:
    std::vector<std::string> names_;
};

namespace detail {

inline bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

inline std::string_view trim(std::string_view text) noexcept {
    while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
    while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
    return text;
}

struct Token {
    std::string_view text;
    std::size_t column; // 1-based
};

inline std::vector<Token> split_fields(std::string_view line) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        tokens.push_back({line.substr(start, i - start), start + 1});
    }
    return tokens;
}

inline std::vector<std::string_view> split_lines(std::string_view content) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= content.size()) {
        const auto nl = content.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < content.size()) lines.push_back(content.substr(start));
            break;
        }
        lines.push_back(content.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

} // namespace detail

inline Taxonomy Taxonomy::parse(std::string_view content) {
    auto lines = detail::split_lines(content);
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    std::vector<std::string> names;
    names.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto name = detail::trim(lines[i]);
        if (name.empty()) {
            throw ParseError(ErrorCode::malformed_line, std::string(lines[i]), i + 1, 1,
                             "blank category name");
        }
        names.emplace_back(name);
    }
    return Taxonomy(std::move(names));
}

/// Parses one label line. Ground-truth lines carry exactly five fields,
/// prediction lines exactly six (the last is the confidence).
inline Detection parse_label_line(std::string_view line, LabelMode mode) {
    const std::string text(line);
    const auto fields = detail::split_fields(line);
    const std::size_t expected = mode == LabelMode::ground_truth ? 5 : 6;
    if (fields.size() != expected) {
        const std::size_t column = fields.size() > expected ? fields[expected].column
                                   : fields.empty()          ? 1
                                                             : line.size() + 1;
        throw ParseError(ErrorCode::malformed_line, text, 0, column,
                         "expected " + std::to_string(expected) + " fields, found " +
                             std::to_string(fields.size()));
    }

    Detection det;
    {
        const auto& tok = fields[0];
        const auto* end = tok.text.data() + tok.text.size();
        auto [ptr, ec] = std::from_chars(tok.text.data(), end, det.category);
        if (ec == std::errc::result_out_of_range ||
            (tok.text.front() == '-' && tok.text.size() > 1 &&
             std::all_of(tok.text.begin() + 1, tok.text.end(),
                         [](char c) { return c >= '0' && c <= '9'; }))) {
            throw ParseError(ErrorCode::out_of_range, text, 0, tok.column,
                             "class index out of range");
        }
        if (ec != std::errc{} || ptr != end) {
            throw ParseError(ErrorCode::malformed_line, text, 0, tok.column,
                             "class index is not a non-negative integer");
        }
    }

    double values[5] = {};
    for (std::size_t f = 1; f < fields.size(); ++f) {
        const auto& tok = fields[f];
        const auto* end = tok.text.data() + tok.text.size();
        auto [ptr, ec] = std::from_chars(tok.text.data(), end, values[f - 1]);
        if (ec != std::errc{} || ptr != end) {
            throw ParseError(ErrorCode::malformed_line, text, 0, tok.column,
                             "non-numeric field '" + std::string(tok.text) + "'");
        }
        if (!std::isfinite(values[f - 1])) {
            throw ParseError(ErrorCode::out_of_range, text, 0, tok.column,
                             "non-finite field '" + std::string(tok.text) + "'");
        }
    }

    det.box = {values[0], values[1], values[2], values[3]};
    const auto range_check = [&](std::size_t field, bool ok, const char* what) {
        if (!ok) throw ParseError(ErrorCode::out_of_range, text, 0, fields[field].column, what);
    };
    range_check(1, det.box.cx >= 0.0 && det.box.cx <= 1.0, "cx outside [0,1]");
    range_check(2, det.box.cy >= 0.0 && det.box.cy <= 1.0, "cy outside [0,1]");
    range_check(3, det.box.w > 0.0 && det.box.w <= 1.0, "width outside (0,1]");
    range_check(4, det.box.h > 0.0 && det.box.h <= 1.0, "height outside (0,1]");
    if (mode == LabelMode::prediction) {
        range_check(5, values[4] >= 0.0 && values[4] <= 1.0, "confidence outside [0,1]");
        det.confidence = values[4];
    }
    return det;
}

/// Parses a whole label file. Blank lines are skipped; errors report the
/// 1-based line number.
inline FrameAnnotations parse_label_file(std::string_view content, std::string frame_id,
                                         LabelMode mode) {
    FrameAnnotations frame;
    frame.frame_id = std::move(frame_id);
    const auto lines = detail::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        try {
            frame.detections.push_back(parse_label_line(lines[i], mode));
        } catch (const ParseError& e) {
            throw e.at_line(i + 1);
        }
    }
    return frame;
}

/// Guesses the mode from the first non-blank line's field count.
inline std::optional<LabelMode> detect_mode(std::string_view content) {
    for (auto line : detail::split_lines(content)) {
        if (detail::trim(line).empty()) continue;
        const auto n = detail::split_fields(line).size();
        if (n == 5) return LabelMode::ground_truth;
        if (n == 6) return LabelMode::prediction;
        return std::nullopt;
    }
    return std::nullopt;
}

/// Canonical form: one line per detection, six fractional digits, newline
/// terminated. Prediction mode requires every detection to carry a
/// confidence.
inline std::string serialize_label_file(const FrameAnnotations& frame, LabelMode mode) {
    std::string out;
    for (const auto& det : frame.detections) {
        out += std::to_string(det.category);
        for (double v : {det.box.cx, det.box.cy, det.box.w, det.box.h}) {
            out += ' ';
            out += format_fixed(v);
        }
        if (mode == LabelMode::prediction) {
            if (!det.confidence) {
                throw Error(ErrorCode::missing_confidence,
                            "frame '" + frame.frame_id + "' has a detection without confidence");
            }
            out += ' ';
            out += format_fixed(*det.confidence);
        }
        out += '\n';
    }
    return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_failure, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::io_failure, "write failed for '" + path.string() + "'");
}

/// Loads one label file; the frame id is the file stem. With no mode given
/// the mode is detected per file.
inline FrameAnnotations load_label_file(const std::filesystem::path& path,
                                        std::optional<LabelMode> mode = std::nullopt) {
    const auto content = read_text_file(path);
    const auto resolved = mode ? mode : detect_mode(content);
    try {
        auto frame = parse_label_file(content, path.stem().string(),
                                      resolved.value_or(LabelMode::ground_truth));
        frame.source_path = path.string();
        return frame;
    } catch (const ParseError& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

/// All `.txt` files directly under `dir`, ordered by file name.
inline std::vector<std::filesystem::path> list_label_files(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw Error(ErrorCode::io_failure, "'" + dir.string() + "' is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    return files;
}

inline std::vector<FrameAnnotations> load_label_dir(const std::filesystem::path& dir,
                                                    std::optional<LabelMode> mode = std::nullopt) {
    std::vector<FrameAnnotations> frames;
    for (const auto& path : list_label_files(dir)) frames.push_back(load_label_file(path, mode));
    return frames;
}

} // namespace blossom
