#include "doctest.h"

#include <sstream>

#include "helpers.hpp"
#include "mkteff/ingest.hpp"
#include "mkteff/synth.hpp"

using namespace mkteff;
using std::chrono::year;

namespace {

SynthConfig base(int days = 20) {
  SynthConfig c;
  c.n_symbols = 50;
  c.n_days = days;
  c.seed = 17;
  // High prices keep tick rounding well below the return scale.
  c.price_min = 1000.0;
  c.price_max = 2000.0;
  return c;
}

Regime regime(double strength) {
  Regime r;
  r.from = Date{year{2001} / 1 / 1};
  r.to = Date{year{2010} / 1 / 1};
  r.strength_bps = strength;
  r.signal_window = 30;
  return r;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("without a signal, relative minute returns have zero mean and the idiosyncratic variance") {
    const auto cfg = base();
    MemoryBarSource src;
    generate_market(cfg, src);
    double sum = 0.0, sum_sq = 0.0;
    std::int64_t count = 0;
    for (Date d : src.dates()) {
      const auto* day = src.day(d).get();
      for (int m = 1; m < 390; ++m) {
        std::vector<double> r;
        double mean = 0.0;
        for (const auto& s : day->symbols) {
          r.push_back(std::log(to_double(s.close[m]) / to_double(s.close[m - 1])));
          mean += r.back();
        }
        mean /= static_cast<double>(r.size());
        for (double x : r) {
          const double rel = 1e4 * (x - mean);
          sum += rel;
          sum_sq += rel * rel;
          ++count;
        }
      }
    }
    const double n = count;
    const double var = sum_sq / n;
    const double expect = cfg.idio_vol_bps * cfg.idio_vol_bps * (1.0 - 1.0 / cfg.n_symbols);
    CHECK(std::abs(sum / n) < 1e-9);  // demeaned by construction
    CHECK(std::abs(var - expect) < 4.0 * expect * std::sqrt(2.0 / n) + 0.01);
  }

  TEST_CASE("marked fraction matches the trigger and the drift has the planted size") {
    auto cfg = base(200);
    cfg.regimes = {regime(20.0)};
    MemoryBarSource src;
    generate_market(cfg, src);
    const auto report = describe_market(src, cfg);
    REQUIRE(report.regimes.size() == 1);
    const auto& r = report.regimes[0];
    CHECK(r.days == 200);
    CHECK(r.symbol_days == 200 * 50);
    CHECK(std::abs(r.marked_fraction - 0.10) < 4.0 * r.fraction_se);
    // Demeaning the drift across symbols shrinks it by 1/n in expectation.
    const double expect = 20.0 * (1.0 - 1.0 / cfg.n_symbols);
    CHECK(std::abs(r.drift_bps - expect) < 4.0 * r.drift_se_bps + 0.1);
    CHECK(report.planted());
  }

  TEST_CASE("doubling the strength keeps the marks and raises the realized drift") {
    auto weak = base(60);
    weak.regimes = {regime(20.0)};
    auto strong = weak;
    strong.regimes[0].strength_bps = 40.0;
    MemoryBarSource a, b;
    generate_market(weak, a);
    generate_market(strong, b);
    const auto ra = describe_market(a, weak).regimes[0];
    const auto rb = describe_market(b, strong).regimes[0];
    CHECK(ra.marked == rb.marked);
    CHECK(rb.drift_bps > ra.drift_bps + 15.0);
    // Shared draws: the early window is untouched.
    const Date d = a.dates()[0];  // later days inherit the earlier drift
    CHECK(a.day(d)->symbols[7].close[300] == b.day(d)->symbols[7].close[300]);
  }

  TEST_CASE("generation is deterministic and seed dependent") {
    auto cfg = base(3);
    cfg.regimes = {regime(10.0)};
    MemoryBarSource a, b, c;
    generate_market(cfg, a);
    generate_market(cfg, b);
    cfg.seed = 18;
    generate_market(cfg, c);
    for (Date d : a.dates()) {
      CHECK(*a.day(d) == *b.day(d));
      CHECK_FALSE(*a.day(d) == *c.day(d));
    }
  }

  TEST_CASE("a market without regimes reports no planted signal") {
    const auto cfg = base(2);
    MemoryBarSource src;
    generate_market(cfg, src);
    const auto report = describe_market(src, cfg);
    CHECK_FALSE(report.planted());
    CHECK(report.text().find("no planted signal") != std::string::npos);
  }

  TEST_CASE("bars are internally consistent") {
    auto cfg = base(3);
    cfg.zero_volume_prob = 0.3;
    cfg.price_min = 5.0;
    cfg.price_max = 50.0;
    MemoryBarSource src;
    generate_market(cfg, src);
    for (Date d : src.dates()) {
      for (const auto& s : src.day(d)->symbols) CHECK(bars_consistent(s));
    }
  }

  TEST_CASE("trades printed from bars rebuild the same bars through ingest") {
    auto cfg = base(3);
    cfg.n_symbols = 6;
    cfg.zero_volume_prob = 0.2;
    cfg.price_min = 5.0;
    cfg.price_max = 50.0;
    MemoryBarSource src;
    generate_market(cfg, src);
    std::stringstream csv;
    bool header = true;
    for (Date d : src.dates()) {
      write_trade_csv(csv, bars_to_trades(*src.day(d)), header);
      header = false;
    }
    const auto ingested = ingest_trades(csv, {});
    CHECK(ingested.stats.malformed == 0);
    AssemblyStats stats;
    const auto days = assemble_days(ingested.trades, SessionSpec{}, nullptr, &stats);
    REQUIRE(days.size() == 3);
    CHECK(stats.partial_days == 0);
    for (const auto& day : days) CHECK(day == *src.day(day.date));
  }

  TEST_CASE("configuration checks") {
    auto cfg = base();
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.n_symbols = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.regimes = {regime(5.0)};
    bad.regimes[0].drift_start = 389;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.regimes[0].drift_start = 360;
    bad.regimes[0].marked_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.001) == doctest::Approx(-3.090232306167813).epsilon(1e-12));
  }
}
