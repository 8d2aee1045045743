#include "mkteff/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "mkteff/rng.hpp"

namespace mkteff {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw UsageError("normal_quantile needs p in (0, 1)");
  // Acklam's rational approximation, then one Halley step against erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double lo = 0.02425;
  double x;
  if (p < lo) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - lo) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (n_symbols < 2) fail("n_symbols must be at least 2");
  if (n_symbols > 99999) fail("n_symbols must be below 100000");
  if (n_days < 1) fail("n_days must be positive");
  if (minutes < 2 || minutes > 1440) fail("minutes must be in [2, 1440]");
  if (!(idio_vol_bps > 0.0)) fail("idio_vol_bps must be positive");
  if (!(market_vol_bps >= 0.0)) fail("market_vol_bps must be nonnegative");
  if (!(overnight_vol_bps >= 0.0)) fail("overnight_vol_bps must be nonnegative");
  if (!(price_min > 0.0) || !(price_max >= price_min)) fail("need 0 < price_min <= price_max");
  if (!(volume_mean >= 4.0)) fail("volume_mean must be at least 4");
  if (!(volume_dispersion >= 0.0) || !(volume_noise >= 0.0)) fail("volume dispersion and noise must be nonnegative");
  if (!(zero_volume_prob >= 0.0 && zero_volume_prob < 1.0)) fail("zero_volume_prob must be in [0, 1)");
  for (const auto& r : regimes) {
    const auto where = fmt::format("regime {}..{}", format_date(r.from), format_date(r.to));
    if (r.from > r.to) fail(where + ": from after to");
    if (!std::isfinite(r.strength_bps)) fail(where + ": strength must be finite");
    if (r.signal_window < 1) fail(where + ": signal_window must be positive");
    if (r.drift_start < r.signal_window || r.drift_start >= minutes - 1) {
      fail(where + ": need signal_window <= drift_start < minutes - 1");
    }
    if (!(r.marked_fraction > 0.0 && r.marked_fraction < 1.0)) fail(where + ": marked_fraction must be in (0, 1)");
  }
}

std::string SynthConfig::symbol_name(int i) const { return fmt::format("S{:05d}", i); }

double SynthConfig::trigger(const Regime& r) const {
  const double n = n_symbols;
  return normal_quantile(1.0 - r.marked_fraction / 2.0) * idio_vol_bps / 10000.0 *
         std::sqrt(r.signal_window * (1.0 - 1.0 / n));
}

struct MarketGenerator::State {
  struct Symbol {
    explicit Symbol(std::uint64_t seed) : rng(seed) {}
    Rng rng;
    double log_price = 0.0;
    double volume_level = 0.0;
    // Scratch for the current day.
    double gap = 0.0;
    std::vector<double> idio, volume, zero, wick_hi, wick_lo;
  };
  Rng market{0};
  std::vector<Symbol> symbols;
  std::vector<double> market_returns;
};

MarketGenerator::MarketGenerator(SynthConfig config) : config_(std::move(config)), state_(std::make_unique<State>()) {
  config_.validate();
  dates_ = weekdays_from(config_.start, config_.n_days);
  state_->market = Rng(derive_seed(config_.seed, {hash_string("market")}));
  state_->market_returns.resize(static_cast<std::size_t>(config_.minutes));
  const auto m = static_cast<std::size_t>(config_.minutes);
  for (int i = 0; i < config_.n_symbols; ++i) {
    symbols_.push_back(config_.symbol_name(i));
    State::Symbol s(derive_seed(config_.seed, {hash_string(symbols_.back())}));
    const double lp = s.rng.uniform(std::log(config_.price_min), std::log(config_.price_max));
    s.log_price = lp;
    const double d = config_.volume_dispersion;
    s.volume_level = config_.volume_mean * std::exp(d * s.rng.normal() - d * d / 2.0);
    s.idio.resize(m);
    s.volume.resize(m);
    s.zero.resize(m);
    s.wick_hi.resize(m);
    s.wick_lo.resize(m);
    state_->symbols.push_back(std::move(s));
  }
}

MarketGenerator::~MarketGenerator() = default;
MarketGenerator::MarketGenerator(MarketGenerator&&) noexcept = default;

DayBars MarketGenerator::next(DayTruth* truth) {
  if (done()) throw UsageError("market generator exhausted");
  const Date date = dates_[next_++];
  const int minutes = config_.minutes;
  const int n = config_.n_symbols;
  const double sigma_i = config_.idio_vol_bps / 10000.0;
  const double sigma_m = config_.market_vol_bps / 10000.0;
  auto& st = *state_;

  for (auto& r : st.market_returns) r = sigma_m * st.market.normal();

  // Every draw happens regardless of configuration so that runs which differ only in
  // signal strength or volume settings share their random numbers.
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    auto& s = st.symbols[static_cast<std::size_t>(i)];
    s.gap = s.rng.normal();
    for (int m = 0; m < minutes; ++m) {
      s.idio[m] = s.rng.normal();
      s.volume[m] = s.rng.normal();
      s.zero[m] = s.rng.uniform();
      s.wick_hi[m] = s.rng.uniform();
      s.wick_lo[m] = s.rng.uniform();
    }
  }

  const Regime* regime = nullptr;
  for (const auto& r : config_.regimes) {
    if (r.covers(date)) {
      regime = &r;
      break;
    }
  }
  std::vector<std::int8_t> marks(static_cast<std::size_t>(n), 0);
  std::vector<double> drift(static_cast<std::size_t>(n), 0.0);
  int drift_from = minutes;  // first minute whose return carries drift
  if (regime) {
    std::vector<double> early(static_cast<std::size_t>(n));
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = 0.0;
      for (int m = 1; m <= regime->signal_window; ++m) x += st.symbols[i].idio[m];
      early[i] = sigma_i * x;
      mean += early[i];
    }
    mean /= n;
    const double trigger = config_.trigger(*regime);
    const double per_minute = regime->strength_bps / 10000.0 / (minutes - 1 - regime->drift_start);
    double drift_mean = 0.0;
    for (int i = 0; i < n; ++i) {
      const double rel = early[i] - mean;
      if (rel > trigger) marks[i] = 1;
      if (rel < -trigger) marks[i] = -1;
      drift[i] = marks[i] * per_minute;
      drift_mean += drift[i];
    }
    drift_mean /= n;
    for (auto& d : drift) d -= drift_mean;
    drift_from = regime->drift_start + 1;
  }

  DayBars day;
  day.date = date;
  day.minutes = minutes;
  day.symbols.resize(static_cast<std::size_t>(n));
  const double wick = 0.5 * sigma_i;
  const double noise = config_.volume_noise;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    auto& s = st.symbols[static_cast<std::size_t>(i)];
    SymbolDay out(symbols_[static_cast<std::size_t>(i)], minutes);
    s.log_price += config_.overnight_vol_bps / 10000.0 * s.gap;
    Price prev = std::max<Price>(1, to_price(std::exp(s.log_price)));
    for (int m = 0; m < minutes; ++m) {
      s.log_price += st.market_returns[m] + sigma_i * s.idio[m] + (m >= drift_from ? drift[i] : 0.0);
      const bool traded = m == 0 || s.zero[m] >= config_.zero_volume_prob;
      if (!traded) {
        out.set({m, prev, prev, prev, prev, 0});
        continue;
      }
      const Price close = std::max<Price>(1, to_price(std::exp(s.log_price)));
      const Price top = std::max(prev, close);
      const Price bottom = std::min(prev, close);
      const auto high = top + static_cast<Price>(std::floor(static_cast<double>(top) * wick * s.wick_hi[m]));
      const auto low =
          std::max<Price>(1, bottom - static_cast<Price>(std::floor(static_cast<double>(bottom) * wick * s.wick_lo[m])));
      const double v = s.volume_level * std::exp(noise * s.volume[m] - noise * noise / 2.0);
      const auto volume = std::max<std::int64_t>(4, std::llround(v));
      out.set({m, prev, high, low, close, volume});
      prev = close;
    }
    day.symbols[static_cast<std::size_t>(i)] = std::move(out);
  }
  if (truth) {
    truth->date = date;
    truth->regime = regime;
    truth->marks = std::move(marks);
  }
  return day;
}

void generate_market(const SynthConfig& config, const std::function<void(DayBars&&, const DayTruth&)>& sink) {
  MarketGenerator gen(config);
  DayTruth truth;
  while (!gen.done()) {
    auto day = gen.next(&truth);
    sink(std::move(day), truth);
  }
}

void generate_market(const SynthConfig& config, MemoryBarSource& out) {
  generate_market(config, [&](DayBars&& day, const DayTruth&) { out.put(std::move(day)); });
}

void generate_market(const SynthConfig& config, const BarStore& out) {
  generate_market(config, [&](DayBars&& day, const DayTruth&) { out.write(day); });
}

std::vector<TradeRecord> bars_to_trades(const DayBars& day, const SessionSpec& session) {
  std::vector<TradeRecord> trades;
  for (const auto& s : day.symbols) {
    for (int m = 0; m < s.minutes(); ++m) {
      const auto b = s.bar(m);
      if (b.volume == 0) continue;
      const std::int64_t base = session.open_ms() + std::int64_t{m} * 60'000;
      const Price prices[] = {b.open, b.high, b.low, b.close};
      const int k = static_cast<int>(std::min<std::int64_t>(4, b.volume));
      if (k < 4 && !(b.open == b.high && b.high == b.low && b.low == b.close)) {
        throw DataError(fmt::format("{} {} minute {}: too little volume to print the bar", format_date(day.date),
                                    s.symbol, m));
      }
      std::int64_t left = b.volume;
      for (int j = 0; j < k; ++j) {
        const std::int64_t size = j + 1 == k ? left : b.volume / k;
        left -= size;
        trades.push_back({day.date, base + j * 15'000, s.symbol, k == 4 ? prices[j] : b.close, size, "N"});
      }
    }
  }
  return trades;
}

void write_trade_csv(std::ostream& out, const std::vector<TradeRecord>& trades, bool header) {
  if (header) out << kTradeCsvHeader << '\n';
  for (const auto& t : trades) {
    const auto ms = t.time_ms;
    out << fmt::format("{}T{:02d}:{:02d}:{:02d}.{:03d}-05:00,{},{}.{:04d},{},{}\n", format_date(t.date),
                       ms / 3'600'000, ms / 60'000 % 60, ms / 1000 % 60, ms % 1000, t.symbol, t.price / kPriceScale,
                       t.price % kPriceScale, t.size, t.exchange);
  }
}

std::string MarketReport::text() const {
  std::string s = fmt::format("synthetic market: {} days, {} symbols\n", days, symbols);
  if (!planted()) return s + "no planted signal\n";
  for (const auto& r : regimes) {
    s += fmt::format(
        "regime {}..{}: strength {:.2f} bps over {} days; marked {} of {} symbol-days ({:.4f}, expected {:.4f} "
        "+/- {:.4f}); realized relative drift {:.3f} +/- {:.3f} bps\n",
        format_date(r.from), format_date(r.to), r.strength_bps, r.days, r.marked, r.symbol_days, r.marked_fraction,
        r.expected_fraction, r.fraction_se, r.drift_bps, r.drift_se_bps);
  }
  return s;
}

MarketReport describe_market(const BarSource& store, const SynthConfig& config) {
  MarketGenerator gen(config);
  MarketReport report;
  report.days = static_cast<int>(gen.dates().size());
  report.symbols = config.n_symbols;
  struct Acc {
    RegimeReport r;
    double sum = 0.0, sum_sq = 0.0;
  };
  std::vector<Acc> acc(config.regimes.size());
  for (std::size_t k = 0; k < config.regimes.size(); ++k) {
    acc[k].r.from = config.regimes[k].from;
    acc[k].r.to = config.regimes[k].to;
    acc[k].r.strength_bps = config.regimes[k].strength_bps;
    acc[k].r.expected_fraction = config.regimes[k].marked_fraction;
  }
  DayTruth truth;
  while (!gen.done()) {
    (void)gen.next(&truth);
    if (!truth.regime) continue;
    auto& a = acc[static_cast<std::size_t>(truth.regime - gen.config().regimes.data())];
    const auto day = store.day(truth.date);
    if (!day) throw DataError(fmt::format("synthetic store is missing {}", format_date(truth.date)));
    const int from = truth.regime->drift_start;
    std::vector<double> rel;
    for (const auto& name : gen.symbols()) {
      const auto* s = day->find(name);
      if (!s) throw DataError(fmt::format("synthetic store is missing {} on {}", name, format_date(truth.date)));
      rel.push_back(to_double(s->close[static_cast<std::size_t>(s->minutes() - 1)]) / to_double(s->close[from]) - 1.0);
    }
    double mean = 0.0;
    for (double r : rel) mean += r;
    mean /= static_cast<double>(rel.size());
    ++a.r.days;
    for (std::size_t i = 0; i < rel.size(); ++i) {
      ++a.r.symbol_days;
      if (truth.marks[i] == 0) continue;
      ++a.r.marked;
      const double v = 10000.0 * truth.marks[i] * (rel[i] - mean);
      a.sum += v;
      a.sum_sq += v * v;
    }
  }
  for (auto& a : acc) {
    auto& r = a.r;
    if (r.symbol_days > 0) {
      r.marked_fraction = static_cast<double>(r.marked) / static_cast<double>(r.symbol_days);
      r.fraction_se = std::sqrt(r.expected_fraction * (1.0 - r.expected_fraction) / static_cast<double>(r.symbol_days));
    }
    if (r.marked > 0) {
      const double n = static_cast<double>(r.marked);
      r.drift_bps = a.sum / n;
      const double var = r.marked > 1 ? (a.sum_sq - n * r.drift_bps * r.drift_bps) / (n - 1.0) : 0.0;
      r.drift_se_bps = std::sqrt(std::max(var, 0.0) / n);
    }
    report.regimes.push_back(r);
  }
  return report;
}

}  // namespace mkteff
