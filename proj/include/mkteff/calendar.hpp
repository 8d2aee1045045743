#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace mkteff {

using Date = std::chrono::sys_days;
using YearMonth = std::chrono::year_month;

/// Parses `YYYY-MM-DD`. Throws UsageError on malformed or invalid dates.
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Parses `YYYY-MM`.
YearMonth parse_month(std::string_view text);
std::string format_month(YearMonth m);

YearMonth month_of(Date d);
Date first_day(YearMonth m);
Date last_day(YearMonth m);
YearMonth add_months(YearMonth m, int n);
/// Signed number of months from `a` to `b`.
int months_between(YearMonth a, YearMonth b);

/// Same calendar date `years` earlier, clamped to the month end (Feb 29 -> Feb 28).
Date years_before(Date d, int years);

bool is_weekday(Date d);
/// The `n` consecutive weekdays starting at `start` (inclusive if it is a weekday).
std::vector<Date> weekdays_from(Date start, int n);
/// All weekdays in [from, to].
std::vector<Date> weekdays_between(Date from, Date to);

inline int day_number(Date d) { return static_cast<int>(d.time_since_epoch().count()); }
inline Date from_day_number(int n) { return Date{std::chrono::days{n}}; }

}  // namespace mkteff
