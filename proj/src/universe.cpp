#include "mkteff/universe.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mkteff/kernels.hpp"

namespace mkteff {

DollarVolumeIndex::DollarVolumeIndex(const BarSource& store, bool parallel) {
  dates_ = store.dates();
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> per_date(dates_.size());
  for (std::size_t t = 0; t < dates_.size(); ++t) {
    const auto day = store.day(dates_[t]);
    if (!day) continue;
    const auto volumes = parallel ? kernels::parallel::dollar_volume(*day) : kernels::serial::dollar_volume(*day);
    for (std::size_t i = 0; i < day->symbols.size(); ++i) {
      const auto& sym = day->symbols[i].symbol;
      auto [it, inserted] = ids_.try_emplace(sym, symbols_.size());
      if (inserted) symbols_.push_back(sym);
      per_date[t].emplace_back(it->second, volumes[i]);
    }
  }
  prefix_.assign(symbols_.size(), std::vector<Amount>(dates_.size() + 1, 0));
  std::vector<Amount> running(symbols_.size(), 0);
  for (std::size_t t = 0; t < dates_.size(); ++t) {
    for (const auto& [id, v] : per_date[t]) running[id] += v;
    for (std::size_t s = 0; s < symbols_.size(); ++s) prefix_[s][t + 1] = running[s];
  }
}

std::size_t DollarVolumeIndex::date_pos(Date d) const {
  return static_cast<std::size_t>(std::lower_bound(dates_.begin(), dates_.end(), d) - dates_.begin());
}

DollarVolumeIndex::Amount DollarVolumeIndex::sum(std::size_t symbol_id, Date from, Date to) const {
  const auto a = date_pos(from);
  const auto b = date_pos(to);
  if (b <= a) return 0;
  return prefix_[symbol_id][b] - prefix_[symbol_id][a];
}

std::optional<std::size_t> DollarVolumeIndex::symbol_id(const std::string& symbol) const {
  auto it = ids_.find(symbol);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

DollarVolumeIndex::Amount DollarVolumeIndex::sum(const std::string& symbol, Date from, Date to) const {
  const auto id = symbol_id(symbol);
  return id ? sum(*id, from, to) : 0;
}

double trailing_dollar_volume(const DollarVolumeIndex& index, const std::string& symbol, Date date,
                              int window_years) {
  return DollarVolumeIndex::to_currency(index.sum(symbol, years_before(date, window_years), date));
}

UniverseDay select_universe(const DollarVolumeIndex& index, Date date, int capacity, int window_years) {
  const Date from = years_before(date, window_years);
  std::vector<std::pair<DollarVolumeIndex::Amount, std::size_t>> ranked;
  for (std::size_t s = 0; s < index.symbols().size(); ++s) {
    const auto v = index.sum(s, from, date);
    if (v > 0) ranked.emplace_back(v, s);
  }
  const auto& names = index.symbols();
  auto better = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return names[a.second] < names[b.second];
  };
  const std::size_t keep = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(std::max(capacity, 0)));
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
  if (ranked.size() < static_cast<std::size_t>(capacity)) {
    spdlog::warn("universe {}: only {} candidates for {} slots", format_date(date), ranked.size(), capacity);
  }
  UniverseDay out;
  out.date = date;
  out.capacity = capacity;
  for (std::size_t i = 0; i < keep; ++i) {
    out.symbols.push_back(names[ranked[i].second]);
    out.dollar_volume.push_back(DollarVolumeIndex::to_currency(ranked[i].first));
  }
  return out;
}

const UniverseDay& UniverseSelector::at(Date date) {
  auto it = cache_.find(date);
  if (it == cache_.end()) it = cache_.emplace(date, select_universe(*index_, date, capacity_, window_years_)).first;
  return it->second;
}

void write_universe_csv(std::ostream& out, const std::vector<UniverseDay>& days) {
  out << "date,rank,symbol,dollar_volume\n";
  for (const auto& day : days) {
    for (std::size_t i = 0; i < day.symbols.size(); ++i) {
      out << fmt::format("{},{},{},{:.4f}\n", format_date(day.date), i + 1, day.symbols[i], day.dollar_volume[i]);
    }
  }
}

std::vector<UniverseDay> read_universe_csv(std::istream& in) {
  std::vector<UniverseDay> days;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line_no == 1 && line.starts_with("date,"))) continue;
    std::stringstream ss(line);
    std::string date, rank, symbol, volume;
    if (!std::getline(ss, date, ',') || !std::getline(ss, rank, ',') || !std::getline(ss, symbol, ',') ||
        !std::getline(ss, volume)) {
      throw DataError(fmt::format("universe cache line {}: expected date,rank,symbol,dollar_volume", line_no));
    }
    const Date d = parse_date(date);
    if (days.empty() || days.back().date != d) {
      days.push_back({});
      days.back().date = d;
    }
    days.back().symbols.push_back(symbol);
    days.back().dollar_volume.push_back(std::stod(volume));
    days.back().capacity = static_cast<int>(days.back().symbols.size());
  }
  return days;
}

}  // namespace mkteff
