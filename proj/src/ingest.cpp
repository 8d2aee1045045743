#include "mkteff/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mkteff/kernels.hpp"

namespace mkteff {

std::vector<DayBars> assemble_days(std::span<const TradeRecord> trades, const SessionSpec& session,
                                   const BarSource* existing, AssemblyStats* stats) {
  // date -> contiguous symbol-day runs, in symbol order
  std::map<Date, std::vector<std::span<const TradeRecord>>> by_date;
  for (std::size_t i = 0; i < trades.size();) {
    std::size_t j = i + 1;
    while (j < trades.size() && trades[j].date == trades[i].date && trades[j].symbol == trades[i].symbol) ++j;
    by_date[trades[i].date].push_back(trades.subspan(i, j - i));
    i = j;
  }

  AssemblyStats local;
  std::vector<DayBars> days;
  std::map<std::string, std::pair<Price, std::size_t>> last_close;  // symbol -> (close, index of its day)
  constexpr std::size_t kLookback = 10;
  for (auto& [date, runs] : by_date) {
    const auto late = session.close_ms() - std::int64_t{kPartialDayMinutes} * 60'000;
    const bool full = std::any_of(runs.begin(), runs.end(), [&](auto run) {
      return std::any_of(run.begin(), run.end(),
                         [&](const TradeRecord& t) { return t.time_ms >= late && t.time_ms < session.close_ms(); });
    });
    if (!full) {
      spdlog::warn("{}: no trades in the final {} minutes, treated as a partial session and skipped",
                   format_date(date), kPartialDayMinutes);
      ++local.partial_days;
      continue;
    }
    std::vector<kernels::SymbolDayInput> inputs;
    inputs.reserve(runs.size());
    for (auto run : runs) {
      std::optional<Price> prior;
      if (auto it = last_close.find(run.front().symbol);
          it != last_close.end() && days.size() - it->second.second <= kLookback) {
        prior = it->second.first;
      } else if (existing) {
        prior = prior_close(*existing, date, run.front().symbol);
      }
      inputs.push_back({run, prior});
    }
    auto batch = kernels::parallel::build_bars(inputs, session);
    local.bars.out_of_session += batch.stats.out_of_session;
    local.bars.untradable += batch.stats.untradable;
    local.bars.built += batch.stats.built;
    DayBars day;
    day.date = date;
    day.minutes = session.minutes;
    for (auto& b : batch.bars) {
      if (b) day.symbols.push_back(std::move(*b));
    }
    for (const auto& s : day.symbols) last_close[s.symbol] = {s.close.back(), days.size()};
    ++local.days;
    days.push_back(std::move(day));
  }
  if (stats) *stats = local;
  return days;
}

IngestSummary ingest_files(std::span<const std::filesystem::path> inputs, const SymbolMap& map, const BarStore& store,
                           const SessionSpec& session) {
  IngestSummary summary;
  std::vector<TradeRecord> all;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot read trade file {}", path.string()));
    auto r = ingest_trades(in, map, path.string());
    summary.trades.rows += r.stats.rows;
    summary.trades.accepted += r.stats.accepted;
    summary.trades.malformed += r.stats.malformed;
    summary.trades.excluded += r.stats.excluded;
    summary.trades.remapped += r.stats.remapped;
    for (auto& e : r.malformed_examples) {
      if (summary.malformed_examples.size() < 5) summary.malformed_examples.push_back(std::move(e));
    }
    all.insert(all.end(), std::make_move_iterator(r.trades.begin()), std::make_move_iterator(r.trades.end()));
  }
  std::stable_sort(all.begin(), all.end(), [](const TradeRecord& a, const TradeRecord& b) {
    return std::tie(a.symbol, a.date, a.time_ms) < std::tie(b.symbol, b.date, b.time_ms);
  });
  const auto days = assemble_days(all, session, &store, &summary.assembly);
  for (const auto& d : days) store.write(d);
  return summary;
}

}  // namespace mkteff
