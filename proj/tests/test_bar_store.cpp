#include "doctest.h"

#include <fstream>

#include "helpers.hpp"
#include "mkteff/bar_store.hpp"

using namespace mkteff;
using std::chrono::year;

namespace {

DayBars random_day(Rng& rng, Date date, int symbols) {
  std::vector<SymbolDay> syms;
  for (int s = 0; s < symbols; ++s) {
    SymbolDay d(fmt::format("SYM{:04}", s), 390);
    Price c = to_price(rng.uniform(5.0, 100.0));
    for (int m = 0; m < 390; ++m) {
      const Price o = c;
      c = std::max<Price>(1, c + static_cast<Price>(rng.below(201)) - 100);
      const Price hi = std::max(o, c) + static_cast<Price>(rng.below(50));
      const Price lo = std::max<Price>(1, std::min(o, c) - static_cast<Price>(rng.below(50)));
      d.set({m, o, hi, lo, c, static_cast<std::int64_t>(rng.below(10000))});
    }
    syms.push_back(std::move(d));
  }
  return testing::day_of(date, std::move(syms));
}

}  // namespace

TEST_SUITE("bar_store") {
  TEST_CASE("encode and decode are exact inverses") {
    Rng rng(71);
    const auto day = random_day(rng, Date{year{2006} / 3 / 7}, 25);
    const auto bytes = encode_day(day);
    CHECK(bytes.size() == 24 + 16 * 25 + 40 * 390 * 25 + 8);
    CHECK(decode_day(bytes, "mem") == day);
  }

  TEST_CASE("any corrupted byte is detected and the file is named") {
    Rng rng(72);
    const auto day = random_day(rng, Date{year{2006} / 3 / 7}, 3);
    const auto bytes = encode_day(day);
    for (int trial = 0; trial < 200; ++trial) {
      auto bad = bytes;
      const auto pos = rng.below(bad.size());
      bad[pos] ^= std::byte{static_cast<unsigned char>(1 + rng.below(255))};
      try {
        (void)decode_day(bad, "2006-03-07.bars");
        FAIL("corruption at byte " << pos << " not detected");
      } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("2006-03-07.bars") != std::string::npos);
      }
    }
    auto truncated = bytes;
    truncated.resize(bytes.size() / 2);
    CHECK_THROWS_AS(decode_day(truncated, "t"), DataError);
  }

  TEST_CASE("store on disk round trips and lists dates") {
    testing::TempDir dir("store");
    BarStore store(dir.path());
    Rng rng(73);
    const auto d1 = random_day(rng, Date{year{2006} / 3 / 7}, 4);
    const auto d2 = random_day(rng, Date{year{2006} / 3 / 8}, 4);
    store_bars(store, d2);
    store_bars(store, d1);
    CHECK(store.dates() == std::vector<Date>{d1.date, d2.date});
    CHECK(*store.day(d1.date) == d1);
    CHECK(store.day(Date{year{2006} / 3 / 9}) == nullptr);
    CHECK(std::filesystem::exists(store.file_for(d1.date)));
    CHECK(store.file_for(d1.date).filename() == "2006-03-07.bars");

    // Corruption on disk surfaces as a data error.
    {
      std::fstream f(store.file_for(d2.date), std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(100);
      f.put('\x7f');
    }
    CHECK_THROWS_AS(store.day(d2.date), DataError);
  }

  TEST_CASE("load_bars and load_closes select symbols") {
    MemoryBarSource src;
    Rng rng(74);
    const Date date{year{2006} / 3 / 7};
    src.put(random_day(rng, date, 10));
    const std::vector<std::string> want{"SYM0003", "SYM0001", "NOPE"};
    const auto bars = load_bars(src, date, want);
    REQUIRE(bars.symbols.size() == 2);
    CHECK(bars.symbols[0].symbol == "SYM0001");
    const auto closes = load_closes(src, date, want);
    REQUIRE(closes.rows() == 2);
    CHECK(closes.symbols[0] == "SYM0003");
    CHECK(closes.row(0)[389] == to_double(src.day(date)->find("SYM0003")->close[389]));
    CHECK(load_bars(src, Date{year{2006} / 3 / 8}, want).symbols.empty());
  }

  TEST_CASE("500 symbols load as at most 500 rows of 390 closes") {
    MemoryBarSource src;
    Rng rng(75);
    const Date date{year{2006} / 3 / 7};
    auto day = random_day(rng, date, 480);
    src.put(day);
    std::vector<std::string> universe;
    for (int s = 0; s < 500; ++s) universe.push_back(fmt::format("SYM{:04}", s));
    const auto closes = load_closes(src, date, universe);
    CHECK(closes.rows() == 480);
    CHECK(closes.minutes == 390);
    CHECK(closes.closes.size() == 480u * 390u);
  }

  TEST_CASE("prior close looks back over stored dates only") {
    MemoryBarSource src;
    const auto d = weekdays_from(Date{year{2006} / 3 / 6}, 3);
    src.put(testing::day_of(d[0], {testing::flat_day("A", 100000, 10)}));
    src.put(testing::day_of(d[1], {testing::flat_day("B", 200000, 10)}));
    CHECK(prior_close(src, d[2], "A") == 100000);
    CHECK(prior_close(src, d[2], "B") == 200000);
    CHECK_FALSE(prior_close(src, d[0], "A"));
    CHECK_FALSE(prior_close(src, d[2], "A", 1));
  }
}
