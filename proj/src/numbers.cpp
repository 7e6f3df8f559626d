#include "ssmi/numbers.hpp"

#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace ssmi {

std::string shortest_repr(double v) {
    if (v == 0.0) return "0";
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::string grouped(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, std::fabs(v));
    std::string digits(buf);
    auto dot = digits.find('.');
    std::string whole = digits.substr(0, dot);
    std::string frac = dot == std::string::npos ? "" : digits.substr(dot);
    std::string out;
    int count = 0;
    for (auto it = whole.rbegin(); it != whole.rend(); ++it) {
        if (count > 0 && count % 3 == 0) out.insert(out.begin(), ',');
        out.insert(out.begin(), *it);
        ++count;
    }
    bool negative = std::signbit(v) && std::stod(digits) != 0.0;
    return (negative ? "-" : "") + out + frac;
}

std::optional<double> parse_decimal(std::string_view text) {
    std::string cleaned;
    bool percent = false;
    if (!text.empty() && text.back() == '%') {
        percent = true;
        text.remove_suffix(1);
    }
    if (text.empty()) return std::nullopt;
    char prev = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '_') {
            bool between = i > 0 && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(prev)) &&
                           std::isdigit(static_cast<unsigned char>(text[i + 1]));
            if (!between) return std::nullopt;
        } else {
            cleaned.push_back(c);
        }
        prev = c;
    }
    double value = 0.0;
    const char* first = cleaned.data();
    const char* last = first + cleaned.size();
    if (first != last && *first == '-') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
    // from_chars accepts "inf"/"nan" spellings; only digits may start a literal here.
    if (!(std::isdigit(static_cast<unsigned char>(*first)) || *first == '.')) return std::nullopt;
    if (cleaned.front() == '-') value = -value;
    return percent ? value / 100.0 : value;
}

}  // namespace ssmi
