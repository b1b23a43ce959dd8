#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace flows {

/// A calendar date. Only ISO-8601 "YYYY-MM-DD" is accepted on input.
using Date = std::chrono::year_month_day;

/// Throws std::invalid_argument on malformed or non-existent dates ("2021-13-01").
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

/// First day of the month `months` after the month containing `date`.
Date add_months(const Date& date, int months);
Date first_of_month(const Date& date);

using Timestamp = std::chrono::system_clock::time_point;

/// "2024-01-31T12:00:00.123Z"
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);

}  // namespace flows
