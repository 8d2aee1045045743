#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mkteff/bar_store.hpp"

namespace mkteff {

/// Tradable symbols for one date, ranked by trailing dollar volume (descending).
struct UniverseDay {
  Date date{};
  int capacity = 500;
  std::vector<std::string> symbols;
  std::vector<double> dollar_volume;  // currency units, aligned with symbols

  bool operator==(const UniverseDay&) const = default;
};

/// Per-date, per-symbol dollar volume (sum of close x volume) over a bar store,
/// with prefix sums so any trailing window is O(1) per symbol.
class DollarVolumeIndex {
 public:
  using Amount = __int128;  // ten-thousandths of a currency unit times shares

  DollarVolumeIndex() = default;
  explicit DollarVolumeIndex(const BarSource& store, bool parallel = true);

  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  /// Sum over stored dates in [from, to).
  Amount sum(std::size_t symbol_id, Date from, Date to) const;
  Amount sum(const std::string& symbol, Date from, Date to) const;
  std::optional<std::size_t> symbol_id(const std::string& symbol) const;

  static double to_currency(Amount a) { return static_cast<double>(a) / kPriceScale; }

 private:
  std::size_t date_pos(Date d) const;

  std::vector<Date> dates_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> ids_;
  // prefix_[s][t] = sum over the first t dates.
  std::vector<std::vector<Amount>> prefix_;
};

/// Sum of close x volume over bars dated in [date - window_years, date).
double trailing_dollar_volume(const DollarVolumeIndex& index, const std::string& symbol, Date date,
                              int window_years = 1);

/// Top-N symbols by trailing dollar volume strictly before `date`; ties broken by symbol.
/// Symbols with zero trailing volume are not candidates; a shortfall is logged.
UniverseDay select_universe(const DollarVolumeIndex& index, Date date, int capacity, int window_years = 1);

/// Caches select_universe results per date.
class UniverseSelector {
 public:
  UniverseSelector(const DollarVolumeIndex& index, int capacity, int window_years = 1)
      : index_(&index), capacity_(capacity), window_years_(window_years) {}

  const UniverseDay& at(Date date);
  int capacity() const { return capacity_; }

 private:
  const DollarVolumeIndex* index_;
  int capacity_;
  int window_years_;
  std::map<Date, UniverseDay> cache_;
};

/// `date,rank,symbol,dollar_volume` CSV.
void write_universe_csv(std::ostream& out, const std::vector<UniverseDay>& days);
std::vector<UniverseDay> read_universe_csv(std::istream& in);

}  // namespace mkteff
