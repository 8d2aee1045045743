#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mkteff/calendar.hpp"
#include "mkteff/dataset.hpp"

namespace mkteff {

enum class Action : std::uint8_t { Long, Short, NoOpinion, Conflict };

std::string_view to_string(Action a);

/// (up, down) -> Long for (T,F), Short for (F,T), NoOpinion for (F,F), Conflict for (T,T).
Action decide(bool up_class, bool down_class);

struct TradeDecision {
  std::string symbol;
  Date date{};
  Action action = Action::NoOpinion;
  int entry_minute = 0;
  bool up_class = false;
  bool down_class = false;
};

struct Position {
  std::string symbol;
  double weight = 0.0;  // fraction of capital
};

/// Equal split within each side; both sides carry half the capital or nothing trades.
struct Portfolio {
  Date date{};
  std::vector<Position> longs;
  std::vector<Position> shorts;
  double long_total = 0.0;
  double short_total = 0.0;

  bool trading() const { return !longs.empty(); }
  /// Throws CheckFailure if the side totals differ or a side is unevenly split.
  void check_balance() const;
};

Portfolio allocate(Date date, std::span<const TradeDecision> decisions);

struct StrategyConfig {
  bool pnl_relative = false;   // use universe-relative instead of absolute returns for P&L
  double cost_bps_per_side = 0.0;
};

struct RealizedPosition {
  std::string symbol;
  Action side = Action::Long;
  double weight = 0.0;
  double entry_price = 0.0;
  double exit_price = 0.0;
  double relative_return = 0.0;  // universe-relative forward return
  double absolute_return = 0.0;  // exit / entry - 1
  bool missing = false;          // no bars: held as cash
};

struct DailyResult {
  Date date{};
  std::vector<TradeDecision> decisions;
  Portfolio portfolio;
  std::vector<RealizedPosition> positions;
  double daily_return_bps = 0.0;
  std::optional<double> trade_precision;
};

/// Fraction of allocated positions whose relative return went the allocated way; a zero
/// relative return counts as wrong. Undefined unless both sides are nonempty.
std::optional<double> trade_precision(std::span<const TradeDecision> decisions,
                                      std::span<const std::string> symbols, std::span<const double> relative_returns);

/// Enters at the decision-minute close and exits at the last close for every allocated symbol.
DailyResult realize(const Portfolio& portfolio, std::span<const TradeDecision> decisions, const DayExamples& market,
                    const StrategyConfig& config = {});

/// decide -> allocate -> realize for one day from per-row Up/Down classes.
DailyResult simulate_day(const DayExamples& market, std::span<const std::uint8_t> up,
                         std::span<const std::uint8_t> down, const StrategyConfig& config = {});

inline constexpr std::string_view kTradeLogHeader =
    "date,symbol,action,weight,entry_px,exit_px,rel_fwd_return_bps,abs_return_bps";

void write_trade_log(std::ostream& out, std::span<const DailyResult> results, bool header = true);

}  // namespace mkteff
