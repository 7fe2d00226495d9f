#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fpnn {

std::string_view trim(std::string_view s) noexcept;

/// Splits on runs of ASCII whitespace.
std::vector<std::string_view> split_ws(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

/// Splits into lines, dropping a trailing '\r' from each.
std::vector<std::string_view> split_lines(std::string_view s);

std::optional<double> parse_double(std::string_view s) noexcept;
std::optional<long long> parse_int(std::string_view s) noexcept;

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace fpnn
