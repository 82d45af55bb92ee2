#include "malign/csv.hpp"

#include "malign/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <string>

namespace malign::csv {

std::string format_number(double v, int min_decimals) {
    if (!std::isfinite(v)) throw NumericalError("csv: refusing to write non-finite value");
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
    std::string s(buf.data(), res.ptr);
    const auto dot = s.find('.');
    int decimals = dot == std::string::npos ? 0 : static_cast<int>(s.size() - dot - 1);
    if (decimals < min_decimals) {
        if (dot == std::string::npos) s.push_back('.');
        s.append(static_cast<std::size_t>(min_decimals - decimals), '0');
    }
    return s;
}

double parse_number(std::string_view field, std::string_view what) {
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
        field.remove_suffix(1);
    }
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ConfigError("csv: cannot parse " + std::string(what) + " from '" + std::string(field) + "'");
    }
    return v;
}

std::vector<std::string> split_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace malign::csv
