#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mkteff/calendar.hpp"
#include "mkteff/strategy.hpp"

namespace mkteff {

/// One day of a learner's return series.
struct DailyPoint {
  Date date{};
  double return_bps = 0.0;
  std::optional<double> precision;  // undefined on no-trade days
  int longs = 0;
  int shorts = 0;

  bool trading() const { return precision.has_value(); }
};

using ReturnSeries = std::vector<DailyPoint>;

ReturnSeries to_series(std::span<const DailyResult> results);

/// Compounded cumulative return as a fraction: out[k] = prod_{i<=k}(1 + r_i/1e4) - 1.
std::vector<double> cumulative(std::span<const double> daily_bps);

/// Mean over the truncated window [i - window/2, i + window - window/2 - 1].
std::vector<double> smooth_centered(std::span<const double> values, int window = 40);

/// Half-open bins [k*w, (k+1)*w). Bins run from the lowest to the highest occupied bin.
struct Histogram {
  double width = 1.0;
  std::int64_t first_bin = 0;
  std::vector<std::int64_t> counts;

  double lower(std::size_t i) const { return static_cast<double>(first_bin + static_cast<std::int64_t>(i)) * width; }
  double upper(std::size_t i) const { return lower(i + 1); }
  std::int64_t total() const;
};

Histogram histogram(std::span<const double> values, double width);
/// Bin index of `v`, consistent with the boundaries `k * width` exactly.
std::int64_t bin_index(double v, double width);

/// Product-moment correlation; undefined for fewer than 2 points or zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

enum class Partition : std::uint8_t { Early, Late };
std::string_view to_string(Partition p);

/// Days on or before the split date are Early.
Partition partition_of(Date date, Date split_date);
/// Months whose first day is on or before the split date are Early.
Partition partition_of(YearMonth month, Date split_date);

struct PartitionStats {
  bool empty = true;
  int days = 0;
  int trading_days = 0;
  double mean_daily_bps = 0.0;
  double stderr_daily_bps = 0.0;
  double cumulative = 0.0;  // fraction
  std::optional<double> mean_precision;
};

PartitionStats summarize(std::span<const DailyPoint> points);

struct SplitRow {
  std::string learner;
  Partition partition = Partition::Early;
  PartitionStats stats;
};

std::vector<SplitRow> split_report(const std::map<std::string, ReturnSeries>& series, Date split_date);

/// External monthly HFT volume ratios, `month,hft_ratio` CSV.
using HftSeries = std::map<YearMonth, double>;
HftSeries read_hft_csv(std::istream& in, std::string_view source = "<stream>");

struct MonthlyPair {
  YearMonth month{};
  double mean_return_bps = 0.0;
  double hft_ratio = 0.0;
  Partition partition = Partition::Early;
};

struct Alignment {
  std::vector<MonthlyPair> pairs;
  std::optional<double> early;
  std::optional<double> late;
  std::vector<std::string> notes;
};

Alignment align_monthly(std::span<const DailyPoint> series, const HftSeries& hft, Date split_date);

struct ReportOptions {
  Date split_date{};
  int smooth_window = 40;
  double return_bin_bps = 2.0;
  double precision_bin = 0.02;
  std::optional<HftSeries> hft;
};

/// Writes daily_returns, cumulative, smoothed, return_hist, precision_hist, split_report,
/// hft_pairs and correlations CSVs into `dir`.
void write_report(const std::filesystem::path& dir, const std::map<std::string, ReturnSeries>& series,
                  const ReportOptions& options);

/// Reads a daily_returns.csv back into per-learner series.
std::map<std::string, ReturnSeries> read_daily_returns(std::istream& in, std::string_view source = "<stream>");

}  // namespace mkteff
