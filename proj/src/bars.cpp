#include "mkteff/bars.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "text.hpp"

namespace mkteff {

namespace {

using text::parse_number;
using text::split;
using text::trim;

bool valid_symbol(std::string_view s) {
  if (s.empty() || s.size() > 15) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '-' ||
           c == '_' || c == '/';
  });
}

}  // namespace

int SessionSpec::minute_index(std::int64_t time_ms) const {
  if (time_ms < open_ms() || time_ms >= close_ms()) return -1;
  return static_cast<int>((time_ms - open_ms()) / 60'000);
}

SymbolDay::SymbolDay(std::string sym, int minutes)
    : symbol(std::move(sym)),
      open(minutes),
      high(minutes),
      low(minutes),
      close(minutes),
      volume(minutes) {}

void SymbolDay::set(const MinuteBar& b) {
  open[b.minute] = b.open;
  high[b.minute] = b.high;
  low[b.minute] = b.low;
  close[b.minute] = b.close;
  volume[b.minute] = b.volume;
}

std::int64_t SymbolDay::total_volume() const {
  std::int64_t total = 0;
  for (auto v : volume) total += v;
  return total;
}

const SymbolDay* DayBars::find(std::string_view symbol) const {
  auto it = std::lower_bound(symbols.begin(), symbols.end(), symbol,
                             [](const SymbolDay& s, std::string_view key) { return s.symbol < key; });
  if (it == symbols.end() || it->symbol != symbol) return nullptr;
  return &*it;
}

// ---------------------------------------------------------------------------
// SymbolMap

void SymbolMap::add_change(Date effective, std::string old_symbol, std::string new_symbol) {
  auto& list = changes_[std::move(old_symbol)];
  list.push_back({effective, std::move(new_symbol)});
  std::sort(list.begin(), list.end(), [](const Change& a, const Change& b) { return a.effective < b.effective; });
}

void SymbolMap::add_exclusion(std::string symbol) { exclusions_.insert(std::move(symbol)); }

std::size_t SymbolMap::change_count() const {
  std::size_t n = 0;
  for (const auto& [_, list] : changes_) n += list.size();
  return n;
}

std::string SymbolMap::canonical(std::string_view symbol, Date date) const {
  std::string current(symbol);
  std::set<std::pair<std::string, int>> seen{{current, day_number(date)}};
  while (true) {
    auto it = changes_.find(current);
    if (it == changes_.end()) return current;
    // The earliest change still in the future relative to the trade date applies.
    const Change* next = nullptr;
    for (const auto& c : it->second) {
      if (c.effective > date) {
        next = &c;
        break;
      }
    }
    if (next == nullptr) return current;
    current = next->new_symbol;
    // Later links in the chain apply only if they happen after the rename we just followed.
    date = next->effective - std::chrono::days{1};
    if (!seen.insert({current, day_number(date)}).second) {
      throw DataError(fmt::format("symbol mapping cycle through '{}' at {}", current, format_date(next->effective)));
    }
  }
}

void SymbolMap::validate() const {
  for (const auto& [old_symbol, list] : changes_) {
    for (const auto& c : list) {
      (void)canonical(old_symbol, c.effective - std::chrono::days{1});
    }
  }
}

void SymbolMap::read_changes(std::istream& in, std::string_view source) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (line_no == 1 && text.starts_with("effective_date")) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 3) {
      throw DataError(fmt::format("{}:{}: expected effective_date,old_symbol,new_symbol", source, line_no));
    }
    Date effective;
    try {
      effective = parse_date(trim(fields[0]));
    } catch (const UsageError& e) {
      throw DataError(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
    add_change(effective, std::string(trim(fields[1])), std::string(trim(fields[2])));
  }
}

void SymbolMap::read_exclusions(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    add_exclusion(std::string(text));
  }
}

SymbolMap SymbolMap::load(const std::filesystem::path& map_csv, const std::filesystem::path& exclusions) {
  SymbolMap map;
  if (!map_csv.empty()) {
    std::ifstream in(map_csv);
    if (!in) throw DataError(fmt::format("cannot read symbol map '{}'", map_csv.string()));
    map.read_changes(in, map_csv.string());
  }
  if (!exclusions.empty()) {
    std::ifstream in(exclusions);
    if (!in) throw DataError(fmt::format("cannot read exclusion list '{}'", exclusions.string()));
    map.read_exclusions(in);
  }
  map.validate();
  return map;
}

// ---------------------------------------------------------------------------
// Trade ingestion

std::optional<std::pair<Date, std::int64_t>> parse_timestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SS[.f+](Z|+HH:MM|-HH:MM)
  if (text.size() < 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  Date date;
  try {
    date = parse_date(text.substr(0, 10));
  } catch (const UsageError&) {
    return std::nullopt;
  }
  const auto hh = parse_number<int>(text.substr(11, 2));
  const auto mm = parse_number<int>(text.substr(14, 2));
  const auto ss = parse_number<int>(text.substr(17, 2));
  if (!hh || !mm || !ss || *hh > 23 || *mm > 59 || *ss > 60) return std::nullopt;
  std::int64_t ms = ((std::int64_t{*hh} * 60 + *mm) * 60 + *ss) * 1000;

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    const auto digits = text.substr(start, pos - start);
    if (digits.empty()) return std::nullopt;
    std::int64_t frac_ms = 0;
    for (std::size_t i = 0; i < 3; ++i) frac_ms = frac_ms * 10 + (i < digits.size() ? digits[i] - '0' : 0);
    ms += frac_ms;
  }
  const auto offset = text.substr(pos);
  if (offset == "Z") return std::pair{date, ms};
  if (offset.size() != 6 || (offset[0] != '+' && offset[0] != '-') || offset[3] != ':') return std::nullopt;
  const auto oh = parse_number<int>(offset.substr(1, 2));
  const auto om = parse_number<int>(offset.substr(4, 2));
  if (!oh || !om || *oh > 14 || *om > 59) return std::nullopt;
  return std::pair{date, ms};
}

IngestResult ingest_trades(std::istream& in, const SymbolMap& map, std::string_view source) {
  IngestResult result;
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(fmt::format("{}: empty trade file", source));
  }
  if (trim(line) != kTradeCsvHeader) {
    throw DataError(fmt::format("{}: unexpected header '{}' (expected '{}')", source, trim(line), kTradeCsvHeader));
  }
  auto malformed = [&](std::string_view text) {
    ++result.stats.malformed;
    if (result.malformed_examples.size() < 5) result.malformed_examples.emplace_back(text);
  };
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty()) continue;
    ++result.stats.rows;
    const auto fields = split(text, ',');
    if (fields.size() != 5) {
      malformed(text);
      continue;
    }
    const auto ts = parse_timestamp(trim(fields[0]));
    const auto symbol = trim(fields[1]);
    const auto price = parse_number<double>(trim(fields[2]));
    const auto size = parse_number<std::int64_t>(trim(fields[3]));
    if (!ts || !valid_symbol(symbol) || !price || !std::isfinite(*price) || !size || *size < 1) {
      malformed(text);
      continue;
    }
    const Price px = to_price(*price);
    if (px <= 0) {
      malformed(text);
      continue;
    }
    if (map.excluded(symbol)) {
      ++result.stats.excluded;
      continue;
    }
    std::string canonical = map.canonical(symbol, ts->first);
    if (map.excluded(canonical)) {
      ++result.stats.excluded;
      continue;
    }
    if (canonical != symbol) ++result.stats.remapped;
    result.trades.push_back({ts->first, ts->second, std::move(canonical), px, *size, std::string(trim(fields[4]))});
    ++result.stats.accepted;
  }
  if (in.bad()) throw DataError(fmt::format("{}: read error", source));
  std::stable_sort(result.trades.begin(), result.trades.end(), [](const TradeRecord& a, const TradeRecord& b) {
    if (a.symbol != b.symbol) return a.symbol < b.symbol;
    if (a.date != b.date) return a.date < b.date;
    return a.time_ms < b.time_ms;
  });
  return result;
}

// ---------------------------------------------------------------------------
// Bar building

std::optional<SymbolDay> build_minute_bars(std::span<const TradeRecord> trades, const SessionSpec& session,
                                           std::optional<Price> prior_close, BarBuildStats* stats) {
  const int n = session.minutes;
  SymbolDay day(trades.empty() ? std::string{} : trades.front().symbol, n);
  std::vector<bool> traded(n, false);
  std::int64_t discarded = 0;
  for (const auto& t : trades) {
    const int m = session.minute_index(t.time_ms);
    if (m < 0) {
      ++discarded;
      continue;
    }
    if (!traded[m]) {
      traded[m] = true;
      day.open[m] = day.high[m] = day.low[m] = t.price;
    }
    day.high[m] = std::max(day.high[m], t.price);
    day.low[m] = std::min(day.low[m], t.price);
    day.close[m] = t.price;
    day.volume[m] += t.size;
  }
  if (stats) stats->out_of_session += discarded;

  std::optional<Price> carry = prior_close;
  if (!carry) {
    const auto first = std::find(traded.begin(), traded.end(), true);
    if (first != traded.begin()) {
      // Either no in-session trades at all or a late first trade with nothing to carry.
      if (stats) ++stats->untradable;
      return std::nullopt;
    }
  }
  for (int m = 0; m < n; ++m) {
    if (traded[m]) {
      carry = day.close[m];
    } else {
      day.open[m] = day.high[m] = day.low[m] = day.close[m] = *carry;
      day.volume[m] = 0;
    }
  }
  if (stats) ++stats->built;
  return day;
}

bool bars_consistent(const SymbolDay& day, std::optional<Price> prior_close) {
  std::optional<Price> prev = prior_close;
  for (int m = 0; m < day.minutes(); ++m) {
    const auto b = day.bar(m);
    if (b.low > std::min(b.open, b.close) || b.high < std::max(b.open, b.close)) return false;
    if (b.volume < 0) return false;
    if (b.volume == 0) {
      if (!(b.open == b.high && b.high == b.low && b.low == b.close)) return false;
      if (prev && b.close != *prev) return false;
    }
    prev = b.close;
  }
  return true;
}

}  // namespace mkteff
