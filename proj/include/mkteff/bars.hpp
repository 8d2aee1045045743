#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mkteff/calendar.hpp"
#include "mkteff/common.hpp"

namespace mkteff {

/// One reported trade. `time_ms` is exchange-local wall-clock milliseconds since midnight.
struct TradeRecord {
  Date date{};
  std::int64_t time_ms = 0;
  std::string symbol;
  Price price = 0;
  std::int64_t size = 0;
  std::string exchange;
};

struct SessionSpec {
  int open_minute = 9 * 60 + 30;  // minutes after local midnight
  int minutes = 390;

  std::int64_t open_ms() const { return std::int64_t{open_minute} * 60'000; }
  std::int64_t close_ms() const { return std::int64_t{open_minute + minutes} * 60'000; }
  /// Minute index for a wall-clock time, or -1 outside [open, close).
  int minute_index(std::int64_t time_ms) const;
};

struct MinuteBar {
  int minute = 0;
  Price open = 0;
  Price high = 0;
  Price low = 0;
  Price close = 0;
  std::int64_t volume = 0;

  bool operator==(const MinuteBar&) const = default;
};

/// Bars for one symbol over one session, stored column-wise.
struct SymbolDay {
  std::string symbol;
  std::vector<Price> open, high, low, close;
  std::vector<std::int64_t> volume;

  SymbolDay() = default;
  SymbolDay(std::string sym, int minutes);

  int minutes() const { return static_cast<int>(close.size()); }
  MinuteBar bar(int m) const { return {m, open[m], high[m], low[m], close[m], volume[m]}; }
  void set(const MinuteBar& b);
  std::int64_t total_volume() const;

  bool operator==(const SymbolDay&) const = default;
};

/// All stored symbol-days for one date, sorted by symbol.
struct DayBars {
  Date date{};
  int minutes = 390;
  std::vector<SymbolDay> symbols;

  const SymbolDay* find(std::string_view symbol) const;
  bool operator==(const DayBars&) const = default;
};

/// Known ticker changes plus the exclusion set (ETFs, test symbols).
///
/// A change `(effective, old, new)` means the issue traded as `old` before
/// `effective` and as `new` from then on. Trades reported under `old` before
/// the effective date are canonicalised to the current name so one issue keeps
/// one history. Chains are followed; a chain that revisits a symbol is a cycle.
class SymbolMap {
 public:
  void add_change(Date effective, std::string old_symbol, std::string new_symbol);
  void add_exclusion(std::string symbol);

  bool excluded(std::string_view symbol) const { return exclusions_.contains(std::string(symbol)); }
  /// Canonical symbol for a trade reported as `symbol` on `date`. Throws DataError on a cycle.
  std::string canonical(std::string_view symbol, Date date) const;
  /// Throws DataError if any date admits a mapping cycle.
  void validate() const;

  std::size_t change_count() const;
  std::size_t exclusion_count() const { return exclusions_.size(); }

  /// `effective_date,old_symbol,new_symbol` CSV with header.
  static SymbolMap load(const std::filesystem::path& map_csv, const std::filesystem::path& exclusions = {});
  void read_changes(std::istream& in, std::string_view source);
  void read_exclusions(std::istream& in);

 private:
  struct Change {
    Date effective;
    std::string new_symbol;
  };
  std::map<std::string, std::vector<Change>, std::less<>> changes_;
  std::set<std::string, std::less<>> exclusions_;
};

struct IngestStats {
  std::int64_t rows = 0;
  std::int64_t accepted = 0;
  std::int64_t malformed = 0;
  std::int64_t excluded = 0;
  std::int64_t remapped = 0;
};

struct IngestResult {
  std::vector<TradeRecord> trades;  // sorted by (symbol, date, time)
  IngestStats stats;
  std::vector<std::string> malformed_examples;  // first few offending lines, for reporting
};

inline constexpr std::string_view kTradeCsvHeader = "timestamp,symbol,price,size,exchange";

/// Parses an ISO-8601 timestamp with offset, e.g. `2008-09-30T09:30:05.250-04:00`.
/// The wall-clock part is kept; the offset is validated but not applied.
std::optional<std::pair<Date, std::int64_t>> parse_timestamp(std::string_view text);

/// Reads trade CSV rows, canonicalises symbols, drops exclusions, and sorts.
/// A header mismatch is a DataError; malformed rows are counted and skipped.
IngestResult ingest_trades(std::istream& in, const SymbolMap& map, std::string_view source = "<stream>");

struct BarBuildStats {
  std::int64_t out_of_session = 0;
  std::int64_t untradable = 0;
  std::int64_t built = 0;
};

/// Aggregates one symbol-day of time-sorted trades into exactly `session.minutes` bars.
/// Minutes without trades carry the latest close (or `prior_close` before the first
/// trade) with zero volume. Returns nullopt when the symbol-day is untradable.
std::optional<SymbolDay> build_minute_bars(std::span<const TradeRecord> trades, const SessionSpec& session,
                                           std::optional<Price> prior_close, BarBuildStats* stats = nullptr);

/// Checks the OHLC ordering and zero-volume carry-forward invariants.
bool bars_consistent(const SymbolDay& day, std::optional<Price> prior_close = std::nullopt);

}  // namespace mkteff
