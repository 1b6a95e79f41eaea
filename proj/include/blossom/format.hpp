// SPDX-License-Identifier: Apache-2.0
#pragma once

// Canonical text output shared by every writer: fixed six-digit decimals
// and sorted-key JSON.

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace blossom {

/// Formats `value` with exactly `digits` fractional digits. Negative zero
/// (including values that round to zero) prints unsigned.
inline std::string format_fixed(double value, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    std::string out(buf);
    if (!out.empty() && out.front() == '-' &&
        out.find_first_not_of("-0.") == std::string::npos) {
        out.erase(0, 1);
    }
    return out;
}

namespace detail {

inline void dump_canonical(const nlohmann::json& value, std::string& out, int indent) {
    const auto pad = [&](int level) { out.append(static_cast<std::size_t>(level) * 2, ' '); };
    switch (value.type()) {
    case nlohmann::json::value_t::object: {
        if (value.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        // nlohmann::json stores objects in a std::map, so iteration is key-sorted.
        for (auto it = value.begin(); it != value.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            pad(indent + 1);
            out += nlohmann::json(it.key()).dump();
            out += ": ";
            dump_canonical(it.value(), out, indent + 1);
        }
        out += '\n';
        pad(indent);
        out += '}';
        return;
    }
    case nlohmann::json::value_t::array: {
        if (value.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        bool first = true;
        for (const auto& item : value) {
            if (!first) out += ",\n";
            first = false;
            pad(indent + 1);
            dump_canonical(item, out, indent + 1);
        }
        out += '\n';
        pad(indent);
        out += ']';
        return;
    }
    case nlohmann::json::value_t::number_float:
        out += format_fixed(value.get<double>());
        return;
    default:
        out += value.dump();
        return;
    }
}

} // namespace detail

/// Serializes with sorted keys, two-space indentation, six fractional
/// digits on every floating-point number, and a trailing newline.
inline std::string dump_canonical(const nlohmann::json& value) {
    std::string out;
    detail::dump_canonical(value, out, 0);
    out += '\n';
    return out;
}

} // namespace blossom
