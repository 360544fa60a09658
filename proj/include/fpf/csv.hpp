#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fpf {

/// Shortest decimal that round-trips to the same double ('.' separator).
std::string format_double(double value);

/// Parses a full-string decimal; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);

/// FNV-1a 64-bit.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace fpf
