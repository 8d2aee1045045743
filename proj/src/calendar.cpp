#include "mkteff/calendar.hpp"

#include <charconv>

#include <fmt/format.h>

#include "mkteff/common.hpp"

namespace mkteff {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError(fmt::format("invalid date '{}'", whole));
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw UsageError(fmt::format("invalid date '{}' (expected YYYY-MM-DD)", text));
  }
  const std::chrono::year_month_day ymd{std::chrono::year{parse_int(text.substr(0, 4), text)},
                                        std::chrono::month{static_cast<unsigned>(parse_int(text.substr(5, 2), text))},
                                        std::chrono::day{static_cast<unsigned>(parse_int(text.substr(8, 2), text))}};
  if (!ymd.ok()) throw UsageError(fmt::format("invalid date '{}'", text));
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

YearMonth parse_month(std::string_view text) {
  if (text.size() != 7 || text[4] != '-') {
    throw UsageError(fmt::format("invalid month '{}' (expected YYYY-MM)", text));
  }
  const YearMonth ym{std::chrono::year{parse_int(text.substr(0, 4), text)},
                     std::chrono::month{static_cast<unsigned>(parse_int(text.substr(5, 2), text))}};
  if (!ym.ok()) throw UsageError(fmt::format("invalid month '{}'", text));
  return ym;
}

std::string format_month(YearMonth m) {
  return fmt::format("{:04d}-{:02d}", static_cast<int>(m.year()), static_cast<unsigned>(m.month()));
}

YearMonth month_of(Date d) {
  const std::chrono::year_month_day ymd{d};
  return {ymd.year(), ymd.month()};
}

Date first_day(YearMonth m) { return Date{m / std::chrono::day{1}}; }

Date last_day(YearMonth m) { return Date{m / std::chrono::last}; }

YearMonth add_months(YearMonth m, int n) { return m + std::chrono::months{n}; }

int months_between(YearMonth a, YearMonth b) {
  return (static_cast<int>(b.year()) - static_cast<int>(a.year())) * 12 +
         (static_cast<int>(static_cast<unsigned>(b.month())) - static_cast<int>(static_cast<unsigned>(a.month())));
}

Date years_before(Date d, int years) {
  const std::chrono::year_month_day ymd{d};
  auto target = ymd - std::chrono::years{years};
  if (!target.ok()) target = target.year() / target.month() / std::chrono::last;
  return Date{target};
}

bool is_weekday(Date d) {
  const std::chrono::weekday wd{d};
  return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
}

std::vector<Date> weekdays_from(Date start, int n) {
  std::vector<Date> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (Date d = start; static_cast<int>(out.size()) < n; d += std::chrono::days{1}) {
    if (is_weekday(d)) out.push_back(d);
  }
  return out;
}

std::vector<Date> weekdays_between(Date from, Date to) {
  std::vector<Date> out;
  for (Date d = from; d <= to; d += std::chrono::days{1}) {
    if (is_weekday(d)) out.push_back(d);
  }
  return out;
}

}  // namespace mkteff
