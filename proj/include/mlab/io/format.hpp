#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlab/error.hpp"

namespace mlab::io {

/// Shortest round-trip decimal form, independent of the C locale.
inline std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string format_cell(const nlohmann::json& v) {
    if (v.is_string())
        return csv_escape(v.get<std::string>());
    if (v.is_boolean())
        return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer())
        return v.is_number_unsigned() ? std::to_string(v.get<std::uint64_t>()) : std::to_string(v.get<std::int64_t>());
    if (v.is_number_float())
        return format_number(v.get<double>());
    if (v.is_null())
        return "";
    return csv_escape(v.dump());
}

/// Parses "1000000", "10^6", "1e6" or "3*10^5" into an exact count.
inline std::uint64_t parse_count(const std::string& text) {
    auto fail = [&] { return ArgumentError("bad count '" + text + "'"); };
    if (text.empty())
        throw fail();
    auto star = text.find('*');
    if (star != std::string::npos)
        return parse_count(text.substr(0, star)) * parse_count(text.substr(star + 1));
    auto pow_at = text.find_first_of("^eE");
    auto digits = [&](const std::string& s) {
        std::uint64_t v = 0;
        auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size())
            throw fail();
        return v;
    };
    if (pow_at == std::string::npos)
        return digits(text);
    std::uint64_t base = digits(text.substr(0, pow_at));
    std::uint64_t exp = digits(text.substr(pow_at + 1));
    if (text[pow_at] != '^') {
        // mantissa e exponent: m * 10^e
        std::uint64_t v = base;
        for (std::uint64_t i = 0; i < exp; ++i) {
            if (v > UINT64_MAX / 10)
                throw fail();
            v *= 10;
        }
        return v;
    }
    std::uint64_t v = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && v > UINT64_MAX / base)
            throw fail();
        v *= base;
    }
    return v;
}

/// Leaf paths ("a.b") of the scalar fields of a JSON object, in key order.
inline void scalar_paths(const nlohmann::json& j, const std::string& prefix, std::vector<std::string>& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object())
            scalar_paths(*it, key, out);
        else if (!it->is_array())
            out.push_back(key);
    }
}

inline const nlohmann::json* lookup(const nlohmann::json& j, const std::string& path) {
    const nlohmann::json* cur = &j;
    std::size_t pos = 0;
    while (pos <= path.size()) {
        auto dot = path.find('.', pos);
        std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (!cur->is_object() || !cur->contains(key))
            return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos)
            break;
        pos = dot + 1;
    }
    return cur;
}

/// CSV with one row per report, all scalar leaves of the first report as columns.
inline std::string generic_csv(const std::vector<nlohmann::json>& reports) {
    if (reports.empty())
        return "";
    std::vector<std::string> cols;
    scalar_paths(reports.front(), "", cols);
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i)
        out += (i ? "," : "") + cols[i];
    out += '\n';
    for (const auto& r : reports) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const auto* v = lookup(r, cols[i]);
            out += (i ? "," : "") + (v ? format_cell(*v) : std::string());
        }
        out += '\n';
    }
    return out;
}

/// Plot table: header row, rows sorted by the x field (stable), numbers via to_chars.
inline std::string emit_plot_data(const std::vector<nlohmann::json>& reports, const std::string& x, const std::vector<std::string>& ys) {
    std::string out = x;
    for (const auto& y : ys)
        out += "," + y;
    out += '\n';
    if (reports.empty())
        return out;
    auto check = [&](const nlohmann::json& r, const std::string& field) {
        const auto* v = lookup(r, field);
        if (!v || v->is_object() || v->is_array()) {
            std::vector<std::string> avail;
            scalar_paths(r, "", avail);
            std::string list;
            for (const auto& a : avail)
                list += (list.empty() ? "" : ", ") + a;
            throw ArgumentError("field '" + field + "' not found; available fields: " + list);
        }
        return v;
    };
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto* v = check(reports[i], x);
        for (const auto& y : ys)
            check(reports[i], y);
        double key = v->is_number() ? v->get<double>() : static_cast<double>(i);
        order.emplace_back(key, i);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [key, i] : order) {
        out += format_cell(*lookup(reports[i], x));
        for (const auto& y : ys)
            out += "," + format_cell(*lookup(reports[i], y));
        out += '\n';
    }
    return out;
}

} // namespace mlab::io
