#include "flows/date.hpp"

#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace flows {
namespace {

int parse_int(std::string_view s, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("invalid date '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("invalid date '" + std::string(text) + "': expected YYYY-MM-DD");
  }
  const int y = parse_int(text.substr(0, 4), text);
  const int m = parse_int(text.substr(5, 2), text);
  const int d = parse_int(text.substr(8, 2), text);
  const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw std::invalid_argument("invalid date '" + std::string(text) + "': no such calendar day");
  return date;
}

std::string format_date(const Date& date) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
                     static_cast<unsigned>(date.day()));
}

Date first_of_month(const Date& date) { return date.year() / date.month() / std::chrono::day{1}; }

Date add_months(const Date& date, int months) {
  const auto ym = (date.year() / date.month()) + std::chrono::months{months};
  return ym / std::chrono::day{1};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto ms = duration_cast<milliseconds>(t.time_since_epoch()).count();
  const auto days_since = floor<days>(t);
  const year_month_day ymd{days_since};
  const auto tod = ms - duration_cast<milliseconds>(days_since.time_since_epoch()).count();
  const auto h = tod / 3'600'000;
  const auto mi = (tod / 60'000) % 60;
  const auto s = (tod / 1000) % 60;
  const auto frac = tod % 1000;
  return fmt::format("{}T{:02d}:{:02d}:{:02d}.{:03d}Z", format_date(ymd), h, mi, s, frac);
}

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  if (text.size() < 24 || text[10] != 'T' || text.back() != 'Z') {
    throw std::invalid_argument("invalid timestamp '" + std::string(text) + "'");
  }
  const Date date = parse_date(text.substr(0, 10));
  const int h = parse_int(text.substr(11, 2), text);
  const int mi = parse_int(text.substr(14, 2), text);
  const int s = parse_int(text.substr(17, 2), text);
  const int frac = parse_int(text.substr(20, 3), text);
  return sys_days{date} + hours{h} + minutes{mi} + seconds{s} + milliseconds{frac};
}

}  // namespace flows
