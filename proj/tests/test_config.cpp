#include "doctest.h"

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "mkteff/config.hpp"

using namespace mkteff;
using std::chrono::year;

namespace {

KeyValueFile kv(const std::string& text) {
  std::istringstream in(text);
  return parse_key_values(in, "exp.cfg");
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const char* kMinimal = "start_date = 2001-01-02\nend_date = 2003-06-30\n";

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("key-value files skip comments and blank lines and keep line numbers") {
    const auto f = kv("# comment\n\nseed = 4  # trailing\n  learners = random , logistic\n");
    REQUIRE(f.entries.size() == 2);
    CHECK(f.entries[0].key == "seed");
    CHECK(f.entries[0].value == "4");
    CHECK(f.entries[0].line == 3);
    CHECK(f.entries[1].line == 4);
  }

  TEST_CASE("errors name the file, line and key") {
    const auto bad_line = error_of([] { kv("seed 4\n"); });
    CHECK(bad_line.find("exp.cfg:1") != std::string::npos);

    const auto dup = error_of([] { kv("seed = 1\nseed = 2\n"); });
    CHECK(dup.find("exp.cfg:2") != std::string::npos);
    CHECK(dup.find("seed") != std::string::npos);

    const auto bad_value = error_of([] { parse_experiment_config(kv(std::string(kMinimal) + "universe.size = many\n")); });
    CHECK(bad_value.find("exp.cfg:3") != std::string::npos);
    CHECK(bad_value.find("universe.size") != std::string::npos);

    const auto unknown = error_of([] { parse_experiment_config(kv(std::string(kMinimal) + "nn.hiden = 5\n")); });
    CHECK(unknown.find("nn.hiden") != std::string::npos);

    const auto date = error_of([] { parse_experiment_config(kv("start_date = 2001-13-02\nend_date = 2003-06-30\n")); });
    CHECK(date.find("start_date") != std::string::npos);

    CHECK(error_of([] { parse_experiment_config(kv("end_date = 2003-06-30\n")); }).find("start_date") !=
          std::string::npos);
  }

  TEST_CASE("experiment defaults and overrides") {
    const auto c = parse_experiment_config(kv(kMinimal));
    CHECK(c.split_date_defaulted);
    CHECK(c.split_date == Date{year{2008} / 9 / 30});
    CHECK(c.universe_size == 500);
    CHECK(c.learners.size() == 3);
    CHECK(c.first_test_month() == YearMonth{year{2003} / 2});
    CHECK(c.last_test_month() == YearMonth{year{2003} / 6});
    CHECK(c.grid().size() == 12);
    CHECK(c.training.hidden == std::vector<int>{180, 20});

    const auto d = parse_experiment_config(
        kv(std::string(kMinimal) +
           "split_date = 2002-12-31\nlearners = random\ngrid.bps = 2,5\nuniverse.mode = fixed\nlr.l2 = 0.5\n"));
    CHECK_FALSE(d.split_date_defaulted);
    CHECK(d.split_date == Date{year{2002} / 12 / 31});
    CHECK(d.learners == std::vector<LearnerKind>{LearnerKind::Random});
    CHECK(d.grid().size() == 6);
    CHECK(d.universe_mode == UniverseMode::Fixed);
    CHECK(d.training.l2 == 0.5);

    CHECK_THROWS_AS(parse_experiment_config(kv(std::string(kMinimal) + "learners = forest\n")), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(kv(std::string(kMinimal) + "universe.mode = weekly\n")), ConfigError);
  }

  TEST_CASE("paths are relative to the config file") {
    testing::TempDir dir("cfg");
    const auto path = dir.path() / "sub" / "exp.cfg";
    std::filesystem::create_directories(path.parent_path());
    {
      std::ofstream out(path);
      out << kMinimal << "store = bars\nout = ../run\nhft_file = /abs/hft.csv\n";
    }
    const auto c = load_experiment_config(path);
    CHECK(c.store == (dir.path() / "sub" / "bars").lexically_normal().string());
    CHECK(c.out == (dir.path() / "run").lexically_normal().string());
    CHECK(c.hft_file == "/abs/hft.csv");
    CHECK_THROWS_AS(load_experiment_config(dir.path() / "missing.cfg"), ConfigError);
  }

  TEST_CASE("synthetic market config with repeated regimes") {
    const auto c = parse_synth_config(
        kv("n_symbols = 12\nn_days = 30\nidio_vol_bps = 2\n"
           "regime = 2001-01-01, 2001-06-30, 20, 120\n"
           "regime = 2001-07-01, 2001-12-31, 5, 30, 0.2, 300\n"));
    CHECK(c.n_symbols == 12);
    CHECK(c.idio_vol_bps == 2.0);
    REQUIRE(c.regimes.size() == 2);
    CHECK(c.regimes[0].signal_window == 120);
    CHECK(c.regimes[0].marked_fraction == 0.10);
    CHECK(c.regimes[1].marked_fraction == 0.2);
    CHECK(c.regimes[1].drift_start == 300);
    CHECK_THROWS_AS(parse_synth_config(kv("regime = 2001-01-01, 2001-06-30\n")), ConfigError);
    CHECK_THROWS_AS(parse_synth_config(kv("idio_vol_bps = 0\n")), ConfigError);
  }

  TEST_CASE("config echoes to JSON") {
    const auto j = to_json(parse_experiment_config(kv(kMinimal)));
    CHECK(j["start_date"] == "2001-01-02");
    CHECK(j["split_date_defaulted"] == true);
    CHECK(j["nn"]["hidden"].size() == 2);
  }
}
