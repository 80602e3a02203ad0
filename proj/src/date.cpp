#include "mlsm/date.hpp"

#include <charconv>
#include <cstdio>

#include "mlsm/errors.hpp"

namespace mlsm {

namespace {

int parse_field(std::string_view s, std::string_view whole) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("invalid date '" + std::string(whole) + "' (expected YYYY-MM-DD)");
    }
    return v;
}

}  // namespace

Date parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw ParseError("invalid date '" + std::string(s) + "' (expected YYYY-MM-DD)");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{parse_field(s.substr(0, 4), s)},
                                          std::chrono::month{static_cast<unsigned>(parse_field(s.substr(5, 2), s))},
                                          std::chrono::day{static_cast<unsigned>(parse_field(s.substr(8, 2), s))}};
    if (!ymd.ok()) throw ParseError("invalid calendar date '" + std::string(s) + "'");
    return Date{ymd};
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

int weekdays_between(Date from, Date to) {
    if (to <= from) return 0;
    const auto days = (to - from).count();
    const auto full_weeks = days / 7;
    int count = static_cast<int>(full_weeks * 5);
    for (auto d = from + std::chrono::days{full_weeks * 7 + 1}; d <= to; d += std::chrono::days{1}) {
        const std::chrono::weekday w{d};
        if (w != std::chrono::Saturday && w != std::chrono::Sunday) ++count;
    }
    return count;
}

}  // namespace mlsm
