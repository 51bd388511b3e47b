#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace iteqd::text {

/// Shortest decimal form that round-trips to the same double ("%.17g" semantics).
std::string format_double(double value);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

std::string_view trim(std::string_view s);

/// Strict parses; throw SchemaError naming `what` on failure.
double parse_double(std::string_view s, std::string_view what);
std::uint64_t parse_uint(std::string_view s, std::string_view what);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

} // namespace iteqd::text
