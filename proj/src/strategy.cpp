#include "mkteff/strategy.hpp"

#include <cmath>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace mkteff {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Long:
      return "long";
    case Action::Short:
      return "short";
    case Action::NoOpinion:
      return "no_opinion";
    case Action::Conflict:
      return "conflict";
  }
  return "unknown";
}

Action decide(bool up_class, bool down_class) {
  if (up_class && !down_class) return Action::Long;
  if (!up_class && down_class) return Action::Short;
  return up_class ? Action::Conflict : Action::NoOpinion;
}

void Portfolio::check_balance() const {
  if (long_total != short_total) {
    throw CheckFailure(fmt::format("{}: unbalanced portfolio ({} long vs {} short)", format_date(date), long_total,
                                   short_total));
  }
  if (longs.empty() != shorts.empty()) throw CheckFailure(fmt::format("{}: one-sided portfolio", format_date(date)));
  if (longs.empty() && long_total != 0.0) throw CheckFailure(fmt::format("{}: empty side with capital", format_date(date)));
  for (const auto* side : {&longs, &shorts}) {
    if (side->empty()) continue;
    const double expected = (side == &longs ? long_total : short_total) / static_cast<double>(side->size());
    double sum = 0.0;
    for (const auto& p : *side) {
      if (p.weight != expected) throw CheckFailure(fmt::format("{}: uneven weights", format_date(date)));
      sum += p.weight;
    }
    if (std::abs(sum - long_total) > 1e-12) throw CheckFailure(fmt::format("{}: weights do not sum", format_date(date)));
  }
}

Portfolio allocate(Date date, std::span<const TradeDecision> decisions) {
  Portfolio p;
  p.date = date;
  std::vector<const TradeDecision*> longs, shorts;
  for (const auto& d : decisions) {
    if (d.action == Action::Long) longs.push_back(&d);
    if (d.action == Action::Short) shorts.push_back(&d);
  }
  if (longs.empty() || shorts.empty()) return p;
  p.long_total = 0.5;
  p.short_total = 0.5;
  const double wl = 0.5 / static_cast<double>(longs.size());
  const double ws = 0.5 / static_cast<double>(shorts.size());
  for (const auto* d : longs) p.longs.push_back({d->symbol, wl});
  for (const auto* d : shorts) p.shorts.push_back({d->symbol, ws});
  return p;
}

std::optional<double> trade_precision(std::span<const TradeDecision> decisions,
                                      std::span<const std::string> symbols, std::span<const double> relative_returns) {
  std::unordered_map<std::string_view, double> rel;
  for (std::size_t i = 0; i < symbols.size(); ++i) rel.emplace(symbols[i], relative_returns[i]);
  int n_long = 0, n_short = 0, correct = 0;
  for (const auto& d : decisions) {
    if (d.action != Action::Long && d.action != Action::Short) continue;
    auto it = rel.find(d.symbol);
    if (it == rel.end()) continue;
    if (d.action == Action::Long) {
      ++n_long;
      if (it->second > 0.0) ++correct;
    } else {
      ++n_short;
      if (it->second < 0.0) ++correct;
    }
  }
  if (n_long == 0 || n_short == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(n_long + n_short);
}

DailyResult realize(const Portfolio& portfolio, std::span<const TradeDecision> decisions, const DayExamples& market,
                    const StrategyConfig& config) {
  portfolio.check_balance();
  DailyResult result;
  result.date = portfolio.date;
  result.decisions.assign(decisions.begin(), decisions.end());
  result.portfolio = portfolio;
  if (!portfolio.trading()) return result;

  std::unordered_map<std::string_view, std::size_t> row;
  for (std::size_t i = 0; i < market.symbols.size(); ++i) row.emplace(market.symbols[i], i);

  double long_leg = 0.0;
  double short_leg = 0.0;
  auto book = [&](const Position& p, Action side) {
    RealizedPosition rp;
    rp.symbol = p.symbol;
    rp.side = side;
    rp.weight = p.weight;
    auto it = row.find(p.symbol);
    if (it == row.end()) {
      spdlog::warn("{} {}: allocated symbol has no bars, held as cash", format_date(portfolio.date), p.symbol);
      rp.missing = true;
    } else {
      rp.entry_price = market.entry_price[it->second];
      rp.exit_price = market.exit_price[it->second];
      rp.absolute_return = rp.exit_price / rp.entry_price - 1.0;
      rp.relative_return = market.forward_relative[it->second];
      const double r = config.pnl_relative ? rp.relative_return : rp.absolute_return;
      (side == Action::Long ? long_leg : short_leg) += p.weight * r;
    }
    result.positions.push_back(std::move(rp));
  };
  for (const auto& p : portfolio.longs) book(p, Action::Long);
  for (const auto& p : portfolio.shorts) book(p, Action::Short);

  const double gross = portfolio.long_total + portfolio.short_total;
  result.daily_return_bps = 10000.0 * (long_leg - short_leg) - 2.0 * config.cost_bps_per_side * gross;
  result.trade_precision = trade_precision(decisions, market.symbols, market.forward_relative);
  return result;
}

DailyResult simulate_day(const DayExamples& market, std::span<const std::uint8_t> up,
                         std::span<const std::uint8_t> down, const StrategyConfig& config) {
  if (up.size() != market.rows() || down.size() != market.rows()) throw UsageError("prediction count mismatch");
  std::vector<TradeDecision> decisions;
  decisions.reserve(market.rows());
  for (std::size_t i = 0; i < market.rows(); ++i) {
    decisions.push_back({market.symbols[i], market.date, decide(up[i] != 0, down[i] != 0),
                         market.minutes + market.end_x, up[i] != 0, down[i] != 0});
  }
  return realize(allocate(market.date, decisions), decisions, market, config);
}

void write_trade_log(std::ostream& out, std::span<const DailyResult> results, bool header) {
  if (header) out << kTradeLogHeader << '\n';
  for (const auto& r : results) {
    for (const auto& p : r.positions) {
      out << fmt::format("{},{},{},{:.10g},{:.4f},{:.4f},{:.6f},{:.6f}\n", format_date(r.date), p.symbol,
                         to_string(p.side), p.weight, p.entry_price, p.exit_price, 10000.0 * p.relative_return,
                         10000.0 * p.absolute_return);
    }
  }
}

}  // namespace mkteff
