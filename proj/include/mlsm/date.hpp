#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace mlsm {

using Date = std::chrono::sys_days;

/// Strict ISO-8601 calendar date (YYYY-MM-DD). Throws ParseError.
Date parse_date(std::string_view s);
std::string format_date(Date d);

/// Weekdays in (from, to]; the trading-day count between a quote and its expiry.
int weekdays_between(Date from, Date to);

inline constexpr double kTradingDaysPerYear = 252.0;

}  // namespace mlsm
