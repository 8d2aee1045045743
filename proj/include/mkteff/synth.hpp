#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mkteff/bar_store.hpp"
#include "mkteff/bars.hpp"

namespace mkteff {

/// Dates [from, to] during which marked symbols keep drifting into the close.
///
/// A symbol is marked on a day when its cumulative log return over minutes
/// 1..signal_window, relative to the cross-sectional mean, exceeds the two-sided
/// trigger that marks `marked_fraction` of symbols on average. A marked symbol
/// then drifts `strength_bps` (relative, log) in the same direction between the
/// close of `drift_start` and the last close.
struct Regime {
  Date from{};
  Date to{};
  double strength_bps = 0.0;
  int signal_window = 30;
  double marked_fraction = 0.10;
  int drift_start = 360;

  bool covers(Date d) const { return d >= from && d <= to; }
};

struct SynthConfig {
  int n_symbols = 50;
  Date start = Date{std::chrono::year{2001} / 1 / 2};
  int n_days = 252;  // consecutive weekdays from start
  std::uint64_t seed = 1;
  int minutes = 390;

  double idio_vol_bps = 4.0;        // per-minute log-return sd, symbol specific
  double market_vol_bps = 2.0;      // per-minute log-return sd, common factor
  double overnight_vol_bps = 50.0;  // close-to-open gap sd

  double price_min = 10.0;  // initial prices are log-uniform in [min, max]
  double price_max = 200.0;

  double volume_mean = 2000.0;    // shares per minute, mean over symbols
  double volume_dispersion = 1.0; // log-sd of the per-symbol volume level
  double volume_noise = 0.5;      // log-sd of per-minute volume around the level
  double zero_volume_prob = 0.0;  // probability a minute after the first has no trades

  std::vector<Regime> regimes;

  /// Throws ConfigError on an unusable configuration.
  void validate() const;
  std::string symbol_name(int i) const;
  /// Trigger on the relative early-window log return that marks symbols.
  double trigger(const Regime& r) const;
};

/// Per-day ground truth: -1, 0 or +1 per symbol (generator order).
struct DayTruth {
  Date date{};
  const Regime* regime = nullptr;
  std::vector<std::int8_t> marks;
};

/// Emits one day at a time so arbitrarily long markets stream in constant memory.
class MarketGenerator {
 public:
  explicit MarketGenerator(SynthConfig config);
  ~MarketGenerator();
  MarketGenerator(MarketGenerator&&) noexcept;

  const SynthConfig& config() const { return config_; }
  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<std::string>& symbols() const { return symbols_; }
  bool done() const { return next_ >= dates_.size(); }

  /// Generates the next day; `truth` receives the marking when given.
  DayBars next(DayTruth* truth = nullptr);

 private:
  struct State;
  SynthConfig config_;
  std::vector<Date> dates_;
  std::vector<std::string> symbols_;
  std::size_t next_ = 0;
  std::unique_ptr<State> state_;
};

void generate_market(const SynthConfig& config, const std::function<void(DayBars&&, const DayTruth&)>& sink);
void generate_market(const SynthConfig& config, MemoryBarSource& out);
void generate_market(const SynthConfig& config, const BarStore& out);

/// Up to four trades per traded minute (open, high, low, close) that rebuild the bar exactly.
std::vector<TradeRecord> bars_to_trades(const DayBars& day, const SessionSpec& session = {});
/// Trade CSV in the ingest format, with a header.
void write_trade_csv(std::ostream& out, const std::vector<TradeRecord>& trades, bool header = true);

struct RegimeReport {
  Date from{};
  Date to{};
  double strength_bps = 0.0;
  int days = 0;
  std::int64_t symbol_days = 0;
  std::int64_t marked = 0;
  double marked_fraction = 0.0;
  double expected_fraction = 0.0;
  double fraction_se = 0.0;
  double drift_bps = 0.0;     // mean signed relative simple return, drift_start close -> last close
  double drift_se_bps = 0.0;
};

struct MarketReport {
  int days = 0;
  int symbols = 0;
  std::vector<RegimeReport> regimes;

  bool planted() const { return !regimes.empty(); }
  std::string text() const;
};

/// Ground truth measured on stored bars; marks come from re-running the generator.
MarketReport describe_market(const BarSource& store, const SynthConfig& config);

/// Inverse standard normal CDF.
double normal_quantile(double p);

}  // namespace mkteff
