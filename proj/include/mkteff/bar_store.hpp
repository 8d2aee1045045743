#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mkteff/bars.hpp"

namespace mkteff {

// Per-date bar file, little-endian, fixed width:
//
//   offset  size          field
//   0       8             magic "MKTBARS\0"
//   8       1             version (1)
//   9       3             reserved, zero
//   12      4   u32       minutes per session
//   16      4   i32       date, days since 1970-01-01
//   20      4   u32       symbol count S
//   24      16*S          symbol directory, NUL-padded ASCII, sorted ascending
//   ...     40*M*S  i64   per symbol: open[M] high[M] low[M] close[M] volume[M]
//   end-8   8   u64       FNV-1a of every preceding byte
inline constexpr char kBarMagic[8] = {'M', 'K', 'T', 'B', 'A', 'R', 'S', '\0'};
inline constexpr std::uint8_t kBarVersion = 1;
inline constexpr std::size_t kSymbolWidth = 16;

std::vector<std::byte> encode_day(const DayBars& day);
/// Throws DataError naming `identity` on any structural or checksum problem.
DayBars decode_day(std::span<const std::byte> bytes, const std::string& identity);

/// Read side of a bar store. Implementations are safe for concurrent readers.
class BarSource {
 public:
  virtual ~BarSource() = default;
  /// Sorted dates with stored bars.
  virtual std::vector<Date> dates() const = 0;
  /// Full day, or nullptr when the date is not stored.
  virtual std::shared_ptr<const DayBars> day(Date date) const = 0;
};

/// Directory of `YYYY-MM-DD.bars` files.
class BarStore : public BarSource {
 public:
  explicit BarStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path file_for(Date date) const;

  std::vector<Date> dates() const override;
  std::shared_ptr<const DayBars> day(Date date) const override;

  /// Writes atomically (temp file + rename); one writer per date.
  void write(const DayBars& day) const;

 private:
  std::filesystem::path root_;
};

/// In-memory store, used by the synthetic generator and tests.
class MemoryBarSource : public BarSource {
 public:
  void put(DayBars day);
  std::vector<Date> dates() const override;
  std::shared_ptr<const DayBars> day(Date date) const override;

 private:
  std::map<Date, std::shared_ptr<const DayBars>> days_;
};

void store_bars(const BarStore& store, const DayBars& day);

/// Requested symbols present on `date`, sorted by symbol. Missing date -> empty with a warning.
DayBars load_bars(const BarSource& store, Date date, std::span<const std::string> symbols);

/// Closes for `symbols` on `date` in the requested order; absent symbols are skipped.
struct CloseRows {
  Date date{};
  int minutes = 0;
  std::vector<std::string> symbols;
  std::vector<double> closes;  // row-major symbols x minutes

  std::span<const double> row(std::size_t i) const {
    return {closes.data() + i * static_cast<std::size_t>(minutes), static_cast<std::size_t>(minutes)};
  }
  std::size_t rows() const { return symbols.size(); }
};

CloseRows load_closes(const BarSource& store, Date date, std::span<const std::string> symbols);

/// Most recent close of `symbol` in the `lookback` stored dates strictly before `date`.
std::optional<Price> prior_close(const BarSource& store, Date date, const std::string& symbol, int lookback = 10);

}  // namespace mkteff
