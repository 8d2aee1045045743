#include "mkteff/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "text.hpp"

namespace mkteff {

ReturnSeries to_series(std::span<const DailyResult> results) {
  ReturnSeries out;
  out.reserve(results.size());
  for (const auto& r : results) {
    out.push_back({r.date, r.daily_return_bps, r.trade_precision, static_cast<int>(r.portfolio.longs.size()),
                   static_cast<int>(r.portfolio.shorts.size())});
  }
  return out;
}

std::vector<double> cumulative(std::span<const double> daily_bps) {
  std::vector<double> out(daily_bps.size());
  double growth = 1.0;
  for (std::size_t i = 0; i < daily_bps.size(); ++i) {
    growth *= 1.0 + daily_bps[i] / 10000.0;
    out[i] = growth - 1.0;
  }
  return out;
}

std::vector<double> smooth_centered(std::span<const double> values, int window) {
  if (window < 1) throw UsageError("smoothing window must be positive");
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  const std::ptrdiff_t before = window / 2;
  const std::ptrdiff_t after = window - before - 1;
  std::vector<double> prefix(values.size() + 1, 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::ptrdiff_t>(0, i - before);
    const auto hi = std::min<std::ptrdiff_t>(n, i + after + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

std::int64_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

std::int64_t bin_index(double v, double width) {
  auto k = static_cast<std::int64_t>(std::floor(v / width));
  // v / width can round across a boundary; compare against the boundaries themselves.
  if (v < static_cast<double>(k) * width) --k;
  if (v >= static_cast<double>(k + 1) * width) ++k;
  return k;
}

Histogram histogram(std::span<const double> values, double width) {
  if (!(width > 0.0)) throw UsageError("histogram bin width must be positive");
  Histogram h;
  h.width = width;
  if (values.empty()) return h;
  std::vector<std::int64_t> bins;
  bins.reserve(values.size());
  for (double v : values) {
    if (!std::isfinite(v)) throw DataError("histogram of a non-finite value");
    bins.push_back(bin_index(v, width));
  }
  const auto [lo, hi] = std::minmax_element(bins.begin(), bins.end());
  h.first_bin = *lo;
  h.counts.assign(static_cast<std::size_t>(*hi - *lo + 1), 0);
  for (auto b : bins) ++h.counts[static_cast<std::size_t>(b - h.first_bin)];
  return h;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("pearson: series lengths differ");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string_view to_string(Partition p) { return p == Partition::Early ? "early" : "late"; }

Partition partition_of(Date date, Date split_date) { return date <= split_date ? Partition::Early : Partition::Late; }

Partition partition_of(YearMonth month, Date split_date) { return partition_of(first_day(month), split_date); }

PartitionStats summarize(std::span<const DailyPoint> points) {
  PartitionStats s;
  if (points.empty()) return s;
  s.empty = false;
  s.days = static_cast<int>(points.size());
  std::vector<double> r;
  r.reserve(points.size());
  double precision_sum = 0.0;
  for (const auto& p : points) {
    r.push_back(p.return_bps);
    if (p.precision) {
      ++s.trading_days;
      precision_sum += *p.precision;
    }
  }
  const double n = static_cast<double>(r.size());
  s.mean_daily_bps = std::accumulate(r.begin(), r.end(), 0.0) / n;
  if (r.size() > 1) {
    double ss = 0.0;
    for (double v : r) ss += (v - s.mean_daily_bps) * (v - s.mean_daily_bps);
    s.stderr_daily_bps = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  s.cumulative = cumulative(r).back();
  if (s.trading_days > 0) s.mean_precision = precision_sum / s.trading_days;
  return s;
}

std::vector<SplitRow> split_report(const std::map<std::string, ReturnSeries>& series, Date split_date) {
  std::vector<SplitRow> rows;
  for (const auto& [learner, points] : series) {
    ReturnSeries early, late;
    for (const auto& p : points) (partition_of(p.date, split_date) == Partition::Early ? early : late).push_back(p);
    rows.push_back({learner, Partition::Early, summarize(early)});
    rows.push_back({learner, Partition::Late, summarize(late)});
  }
  return rows;
}

HftSeries read_hft_csv(std::istream& in, std::string_view source) {
  HftSeries out;
  std::string line;
  int line_no = 0;
  std::optional<YearMonth> previous;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || (line_no == 1 && t.starts_with("month"))) continue;
    const auto fields = text::split(t, ',');
    auto fail = [&](std::string_view why) {
      return DataError(fmt::format("{}:{}: {}", source, line_no, why));
    };
    if (fields.size() != 2) throw fail("expected month,hft_ratio");
    YearMonth m;
    try {
      m = parse_month(text::trim(fields[0]));
    } catch (const UsageError&) {
      throw fail("bad month");
    }
    const auto ratio = text::parse_number<double>(text::trim(fields[1]));
    if (!ratio || *ratio < 0.0 || *ratio > 1.0) throw fail("hft_ratio must be a number in [0, 1]");
    if (previous && m <= *previous) throw fail("months must be unique and increasing");
    previous = m;
    out.emplace(m, *ratio);
  }
  return out;
}

Alignment align_monthly(std::span<const DailyPoint> series, const HftSeries& hft, Date split_date) {
  std::map<YearMonth, std::pair<double, int>> monthly;
  for (const auto& p : series) {
    auto& [sum, n] = monthly[month_of(p.date)];
    sum += p.return_bps;
    ++n;
  }
  Alignment a;
  std::vector<double> ex, ey, lx, ly;
  for (const auto& [month, acc] : monthly) {
    auto it = hft.find(month);
    if (it == hft.end()) continue;
    MonthlyPair pair{month, acc.first / acc.second, it->second, partition_of(month, split_date)};
    a.pairs.push_back(pair);
    auto& x = pair.partition == Partition::Early ? ex : lx;
    auto& y = pair.partition == Partition::Early ? ey : ly;
    x.push_back(pair.hft_ratio);
    y.push_back(pair.mean_return_bps);
  }
  auto correlate = [&](std::span<const double> x, std::span<const double> y, Partition part) {
    auto r = pearson(x, y);
    if (!r) {
      a.notes.push_back(x.size() < 2 ? fmt::format("{}: {} overlapping month(s), correlation undefined",
                                                   to_string(part), x.size())
                                     : fmt::format("{}: zero variance, correlation undefined", to_string(part)));
    }
    return r;
  };
  a.early = correlate(ex, ey, Partition::Early);
  a.late = correlate(lx, ly, Partition::Late);
  return a;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path, std::string_view header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << header << '\n';
  return out;
}

std::string opt(const std::optional<double>& v, std::string_view fmt_spec = "{:.6f}") {
  return v ? fmt::format(fmt::runtime(fmt_spec), *v) : std::string{};
}

}  // namespace

void write_report(const std::filesystem::path& dir, const std::map<std::string, ReturnSeries>& series,
                  const ReportOptions& options) {
  std::filesystem::create_directories(dir);
  auto daily = open_csv(dir / "daily_returns.csv", "learner,date,daily_return_bps,trade_precision,longs,shorts");
  auto cumul = open_csv(dir / "cumulative.csv", "learner,date,cumulative_return_pct");
  auto smooth = open_csv(dir / "smoothed.csv", "learner,date,smoothed_return_bps");
  auto rhist = open_csv(dir / "return_hist.csv", "learner,bin_lower_bps,bin_upper_bps,count");
  auto phist = open_csv(dir / "precision_hist.csv", "learner,bin_lower,bin_upper,count");
  for (const auto& [learner, points] : series) {
    std::vector<double> r, prec;
    for (const auto& p : points) {
      r.push_back(p.return_bps);
      if (p.precision) prec.push_back(*p.precision);
      daily << fmt::format("{},{},{:.6f},{},{},{}\n", learner, format_date(p.date), p.return_bps,
                           opt(p.precision), p.longs, p.shorts);
    }
    const auto c = cumulative(r);
    const auto s = smooth_centered(r, options.smooth_window);
    for (std::size_t i = 0; i < points.size(); ++i) {
      cumul << fmt::format("{},{},{:.6f}\n", learner, format_date(points[i].date), 100.0 * c[i]);
      smooth << fmt::format("{},{},{:.6f}\n", learner, format_date(points[i].date), s[i]);
    }
    const auto hr = histogram(r, options.return_bin_bps);
    for (std::size_t i = 0; i < hr.counts.size(); ++i) {
      rhist << fmt::format("{},{:.6g},{:.6g},{}\n", learner, hr.lower(i), hr.upper(i), hr.counts[i]);
    }
    const auto hp = histogram(prec, options.precision_bin);
    for (std::size_t i = 0; i < hp.counts.size(); ++i) {
      phist << fmt::format("{},{:.6g},{:.6g},{}\n", learner, hp.lower(i), hp.upper(i), hp.counts[i]);
    }
  }

  auto split = open_csv(dir / "split_report.csv",
                        "learner,partition,status,days,trading_days,mean_daily_return_bps,stderr_bps,"
                        "cumulative_return_pct,mean_precision");
  split << fmt::format("# split_date={}; cumulative returns compound daily returns multiplicatively\n",
                       format_date(options.split_date));
  for (const auto& row : split_report(series, options.split_date)) {
    const auto& s = row.stats;
    if (s.empty) {
      split << fmt::format("{},{},empty,0,0,,,,\n", row.learner, to_string(row.partition));
      continue;
    }
    split << fmt::format("{},{},ok,{},{},{:.6f},{:.6f},{:.6f},{}\n", row.learner, to_string(row.partition), s.days,
                         s.trading_days, s.mean_daily_bps, s.stderr_daily_bps, 100.0 * s.cumulative,
                         opt(s.mean_precision));
  }

  auto pairs = open_csv(dir / "hft_pairs.csv", "learner,month,mean_daily_return_bps,hft_ratio,partition");
  auto corr = open_csv(dir / "correlations.csv", "learner,partition,months,pearson,note");
  if (!options.hft) return;
  for (const auto& [learner, points] : series) {
    const auto a = align_monthly(points, *options.hft, options.split_date);
    int n_early = 0, n_late = 0;
    for (const auto& p : a.pairs) {
      (p.partition == Partition::Early ? n_early : n_late)++;
      pairs << fmt::format("{},{},{:.6f},{:.6f},{}\n", learner, format_month(p.month), p.mean_return_bps,
                           p.hft_ratio, to_string(p.partition));
    }
    for (const auto& note : a.notes) spdlog::info("{}: {}", learner, note);
    corr << fmt::format("{},early,{},{},{}\n", learner, n_early, opt(a.early, "{:.9f}"), a.early ? "" : "undefined");
    corr << fmt::format("{},late,{},{},{}\n", learner, n_late, opt(a.late, "{:.9f}"), a.late ? "" : "undefined");
  }
}

std::map<std::string, ReturnSeries> read_daily_returns(std::istream& in, std::string_view source) {
  std::map<std::string, ReturnSeries> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || (line_no == 1 && t.starts_with("learner,"))) continue;
    const auto f = text::split(t, ',');
    auto fail = [&] { return DataError(fmt::format("{}:{}: malformed daily return row", source, line_no)); };
    if (f.size() != 6) throw fail();
    DailyPoint p;
    try {
      p.date = parse_date(f[1]);
    } catch (const UsageError&) {
      throw fail();
    }
    const auto r = text::parse_number<double>(f[2]);
    const auto longs = text::parse_number<int>(f[4]);
    const auto shorts = text::parse_number<int>(f[5]);
    if (!r || !longs || !shorts) throw fail();
    if (!f[3].empty()) {
      const auto prec = text::parse_number<double>(f[3]);
      if (!prec) throw fail();
      p.precision = *prec;
    }
    p.return_bps = *r;
    p.longs = *longs;
    p.shorts = *shorts;
    auto& s = out[std::string(f[0])];
    if (!s.empty() && s.back().date >= p.date) throw DataError(fmt::format("{}:{}: dates out of order", source, line_no));
    s.push_back(p);
  }
  return out;
}

}  // namespace mkteff
