#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "agbench/core/error.hpp"

namespace agbench::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and `""`.
inline std::vector<std::string> split_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/**
 * Line-oriented reader that remembers where it is, so every parse error can
 * name the file, line and column.
 */
class Reader {
public:
    Reader(std::string path, std::string display_name)
        : path_(std::move(path)), name_(std::move(display_name)), in_(path_) {
        if (!in_) throw Error("cannot open " + path_);
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t line() const noexcept { return line_; }

    /// Reads the header row and checks it matches `expected` exactly.
    void expect_header(const std::vector<std::string>& expected) {
        std::vector<std::string> header;
        if (!next(header)) throw DataError(name_, 1, 0, "missing header row");
        if (header.size() != expected.size()) {
            throw DataError(name_, line_, 0,
                            "header has " + std::to_string(header.size()) + " columns, expected " +
                                std::to_string(expected.size()));
        }
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (header[i] != expected[i]) {
                throw DataError(name_, line_, i + 1,
                                "header column '" + header[i] + "', expected '" + expected[i] + "'");
            }
        }
    }

    /// Next non-empty record; false at end of file.
    bool next(std::vector<std::string>& fields) {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            if (line_ == 1 && raw.starts_with("\xEF\xBB\xBF")) raw.erase(0, 3);
            if (raw.empty()) continue;
            fields = split_record(raw);
            return true;
        }
        return false;
    }

    void expect_width(const std::vector<std::string>& fields, std::size_t width) const {
        if (fields.size() != width) {
            throw DataError(name_, line_, 0,
                            "expected " + std::to_string(width) + " fields, got " +
                                std::to_string(fields.size()));
        }
    }

    [[noreturn]] void fail(std::size_t column, const std::string& message) const {
        throw DataError(name_, line_, column, message);
    }

    double real(const std::vector<std::string>& fields, std::size_t column) const {
        const std::string& f = fields[column - 1];
        double v = 0.0;
        const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
            fail(column, "malformed number '" + f + "'");
        }
        if (!std::isfinite(v)) fail(column, "non-finite value '" + f + "'");
        return v;
    }

    int integer(const std::vector<std::string>& fields, std::size_t column) const {
        const std::string& f = fields[column - 1];
        int v = 0;
        const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
            fail(column, "malformed integer '" + f + "'");
        }
        return v;
    }

    const std::string& text(const std::vector<std::string>& fields, std::size_t column) const {
        const std::string& f = fields[column - 1];
        if (f.empty()) fail(column, "empty field");
        return f;
    }

private:
    std::string path_;
    std::string name_;
    std::ifstream in_;
    std::size_t line_ = 0;
};

}  // namespace agbench::csv
