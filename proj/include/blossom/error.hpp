// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blossom {

enum class ErrorCode {
    malformed_line,
    out_of_range,
    invalid_k,
    empty_input,
    single_cluster,
    missing_confidence,
    no_categories,
    frame_id_mismatch,
    infeasible_spec,
    frame_failed,
    io_failure,
    invalid_argument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::malformed_line: return "MalformedLine";
    case ErrorCode::out_of_range: return "OutOfRange";
    case ErrorCode::invalid_k: return "InvalidK";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::single_cluster: return "SingleCluster";
    case ErrorCode::missing_confidence: return "MissingConfidence";
    case ErrorCode::no_categories: return "NoCategories";
    case ErrorCode::frame_id_mismatch: return "FrameIdMismatch";
    case ErrorCode::infeasible_spec: return "InfeasibleSpec";
    case ErrorCode::frame_failed: return "FrameFailed";
    case ErrorCode::io_failure: return "IoFailure";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// A label line that failed to parse. `line_number` is 1-based and 0 when
/// the line was parsed on its own; `column` is the 1-based offset of the
/// offending token within the line.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, std::string line, std::size_t line_number, std::size_t column,
               const std::string& detail)
        : Error(code, describe(line, line_number, column, detail)),
          line_(std::move(line)),
          line_number_(line_number),
          column_(column),
          detail_(detail) {}

    [[nodiscard]] const std::string& line() const noexcept { return line_; }
    [[nodiscard]] std::size_t line_number() const noexcept { return line_number_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

    [[nodiscard]] ParseError at_line(std::size_t number) const {
        return ParseError(code(), line_, number, column_, detail_);
    }

private:
    static std::string describe(const std::string& line, std::size_t line_number,
                                std::size_t column, const std::string& detail) {
        std::string out;
        if (line_number > 0) out += "line " + std::to_string(line_number) + ", ";
        out += "column " + std::to_string(column) + ": " + detail + " in \"" + line + "\"";
        return out;
    }

    std::string line_;
    std::size_t line_number_;
    std::size_t column_;
    std::string detail_;
};

} // namespace blossom
