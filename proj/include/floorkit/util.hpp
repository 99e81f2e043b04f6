#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace floorkit {

// Parse or validation failure carrying a 1-based file location.
// row/col of 0 mean "not applicable".
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what, std::size_t row = 0, std::size_t col = 0)
        : std::runtime_error(what), row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

namespace util {

inline std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == sep) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline long long parse_int(std::string_view field, const std::string& what,
                           std::size_t row = 0, std::size_t col = 0) {
    field = trim(field);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("invalid integer for " + what + ": '" + std::string(field) +
                             "' at row " + std::to_string(row) + ", column " + std::to_string(col),
                         row, col);
    }
    return value;
}

inline double parse_double(std::string_view field, const std::string& what,
                           std::size_t row = 0, std::size_t col = 0) {
    field = trim(field);
    // from_chars<double> is available but strtod keeps us off libstdc++ version edges.
    std::string buf(field);
    char* end = nullptr;
    double value = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size()) {
        throw ParseError("invalid number for " + what + ": '" + buf + "' at row " +
                             std::to_string(row) + ", column " + std::to_string(col),
                         row, col);
    }
    return value;
}

} // namespace util
} // namespace floorkit
