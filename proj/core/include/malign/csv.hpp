#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace malign::csv {

/// Shortest decimal text that parses back to the same double, padded with
/// trailing zeros to at least `min_decimals` fractional digits.
std::string format_number(double v, int min_decimals = 4);

/// Parses a full field as a double; throws ConfigError naming `what` otherwise.
double parse_number(std::string_view field, std::string_view what);

std::vector<std::string> split_line(std::string_view line);

}  // namespace malign::csv
