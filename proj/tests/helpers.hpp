#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mkteff/bar_store.hpp"
#include "mkteff/rng.hpp"

namespace testing {

using namespace mkteff;

// Random geometric path of `minutes` closes with per-minute log-sd `vol`.
inline std::vector<double> random_path(Rng& rng, int minutes, double vol, double start = 100.0) {
  std::vector<double> p(minutes);
  double x = start;
  for (int m = 0; m < minutes; ++m) {
    if (m > 0) x *= std::exp(vol * rng.normal());
    p[m] = x;
  }
  return p;
}

inline CloseRows close_rows(const std::vector<std::vector<double>>& paths, Date date = Date{}) {
  CloseRows rows;
  rows.date = date;
  rows.minutes = static_cast<int>(paths.front().size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    rows.symbols.push_back(fmt::format("S{:03}", i));
    rows.closes.insert(rows.closes.end(), paths[i].begin(), paths[i].end());
  }
  return rows;
}

// Flat bars at `price` with constant per-minute volume.
inline SymbolDay flat_day(const std::string& symbol, Price price, std::int64_t volume, int minutes = 390) {
  SymbolDay d(symbol, minutes);
  for (int m = 0; m < minutes; ++m) d.set({m, price, price, price, price, volume});
  return d;
}

// Bars whose closes follow `closes` (in currency units); OHLC equal, volume constant.
inline SymbolDay path_day(const std::string& symbol, const std::vector<double>& closes, std::int64_t volume = 100) {
  SymbolDay d(symbol, static_cast<int>(closes.size()));
  for (int m = 0; m < static_cast<int>(closes.size()); ++m) {
    const Price p = to_price(closes[m]);
    d.set({m, p, p, p, p, volume});
  }
  return d;
}

inline DayBars day_of(Date date, std::vector<SymbolDay> symbols) {
  DayBars d;
  d.date = date;
  d.minutes = symbols.empty() ? 390 : symbols.front().minutes();
  std::sort(symbols.begin(), symbols.end(), [](const auto& a, const auto& b) { return a.symbol < b.symbol; });
  d.symbols = std::move(symbols);
  return d;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            fmt::format("mkteff_{}_{}_{}", tag, static_cast<long>(::getpid()), counter++);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
