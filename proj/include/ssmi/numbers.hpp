#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ssmi {

// Shortest text that parses back to exactly `v`.
std::string shortest_repr(double v);

// Display rounding with thousands separators, e.g. 49647.6 -> "49,647.60".
std::string grouped(double v, int decimals);

// Decimal literal with optional '_' digit separators, exponent and '%' suffix.
// Returns nullopt on malformed input or overflow.
std::optional<double> parse_decimal(std::string_view text);

}  // namespace ssmi
