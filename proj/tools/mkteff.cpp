// mkteff: ingest trades, build and inspect bar stores, generate synthetic markets,
// and run the walk-forward experiment.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <fmt/format.h>
#include <omp.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "mkteff/config.hpp"
#include "mkteff/ingest.hpp"
#include "mkteff/manifest.hpp"
#include "mkteff/selfcheck.hpp"
#include "mkteff/synth.hpp"
#include "mkteff/universe.hpp"
#include "mkteff/walkforward.hpp"

namespace {

using namespace mkteff;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kCheck = 3 };

struct Options {
  std::string config;
  std::string store;
  std::string out;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  bool pnl_relative = false;
  std::string split_date;
  std::string hft_file;
  bool verbose = false;
  bool quiet = false;
};

HftSeries load_hft(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot read HFT ratio file {}", path));
  return read_hft_csv(in, path);
}

int cmd_ingest(const Options& o, const std::vector<std::string>& files, const std::string& symbol_map,
               const std::string& exclusions, int open_minute, int minutes) {
  if (o.store.empty()) throw UsageError("ingest needs --store");
  SymbolMap map;
  if (!symbol_map.empty() || !exclusions.empty()) map = SymbolMap::load(symbol_map, exclusions);
  std::vector<std::filesystem::path> paths(files.begin(), files.end());
  SessionSpec session{open_minute, minutes};
  IngestSummary s;
  int status = kOk;
  std::string error;
  try {
    s = ingest_files(paths, map, BarStore(o.store), session);
  } catch (const DataError& e) {
    status = kData;
    error = e.what();
  }
  fmt::print("rows: {}\naccepted: {}\nmalformed: {}\nexcluded: {}\nremapped: {}\n", s.trades.rows, s.trades.accepted,
             s.trades.malformed, s.trades.excluded, s.trades.remapped);
  fmt::print("symbol-days built: {}\nuntradable: {}\nout of session: {}\ndays written: {}\npartial days skipped: {}\n",
             s.assembly.bars.built, s.assembly.bars.untradable, s.assembly.bars.out_of_session, s.assembly.days,
             s.assembly.partial_days);
  for (const auto& line : s.malformed_examples) fmt::print("malformed example: {}\n", line);
  if (status != kOk) fmt::print(stderr, "error: {}\n", error);
  return status;
}

int cmd_bars(const Options& o, const std::string& date, const std::string& symbol) {
  if (o.store.empty()) throw UsageError("bars needs --store");
  BarStore store(o.store);
  const auto d = parse_date(date);
  const auto day = store.day(d);
  if (!day) throw DataError(fmt::format("no bars stored for {}", date));
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::trunc);
    if (!file) throw DataError(fmt::format("cannot write {}", o.out));
  }
  std::ostream& out = o.out.empty() ? std::cout : file;
  out << "date,symbol,minute,open,high,low,close,volume\n";
  for (const auto& s : day->symbols) {
    if (!symbol.empty() && s.symbol != symbol) continue;
    for (int m = 0; m < s.minutes(); ++m) {
      const auto b = s.bar(m);
      out << fmt::format("{},{},{},{:.4f},{:.4f},{:.4f},{:.4f},{}\n", date, s.symbol, m, to_double(b.open),
                         to_double(b.high), to_double(b.low), to_double(b.close), b.volume);
    }
  }
  return kOk;
}

int cmd_universe(const Options& o, const std::string& from, const std::string& to, int size, int years) {
  if (o.store.empty()) throw UsageError("universe needs --store");
  BarStore store(o.store);
  DollarVolumeIndex index(store);
  const Date lo = parse_date(from), hi = parse_date(to);
  std::vector<UniverseDay> days;
  for (Date d : index.dates()) {
    if (d >= lo && d <= hi) days.push_back(select_universe(index, d, size, years));
  }
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::trunc);
    if (!file) throw DataError(fmt::format("cannot write {}", o.out));
  }
  write_universe_csv(o.out.empty() ? std::cout : file, days);
  return kOk;
}

int cmd_synth(const Options& o, const std::string& trades_out, const std::string& report_out) {
  if (o.config.empty()) throw UsageError("synth needs --config");
  if (o.store.empty()) throw UsageError("synth needs --store");
  auto config = load_synth_config(o.config);
  if (o.seed) config.seed = *o.seed;
  BarStore store(o.store);
  std::ofstream trades;
  if (!trades_out.empty()) {
    trades.open(trades_out, std::ios::trunc);
    if (!trades) throw DataError(fmt::format("cannot write {}", trades_out));
  }
  bool header = true;
  generate_market(config, [&](DayBars&& day, const DayTruth&) {
    if (trades.is_open()) {
      write_trade_csv(trades, bars_to_trades(day), header);
      header = false;
    }
    store.write(day);
  });
  const auto report = describe_market(store, config);
  fmt::print("{}", report.text());
  if (!report_out.empty()) {
    std::ofstream out(report_out, std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write {}", report_out));
    nlohmann::ordered_json j;
    j["config"] = to_json(config);
    auto& regimes = j["regimes"] = nlohmann::ordered_json::array();
    for (const auto& r : report.regimes) {
      regimes.push_back({{"from", format_date(r.from)},
                         {"to", format_date(r.to)},
                         {"strength_bps", r.strength_bps},
                         {"days", r.days},
                         {"symbol_days", r.symbol_days},
                         {"marked", r.marked},
                         {"marked_fraction", r.marked_fraction},
                         {"expected_fraction", r.expected_fraction},
                         {"drift_bps", r.drift_bps},
                         {"drift_se_bps", r.drift_se_bps}});
    }
    j["planted_signal"] = report.planted();
    out << j.dump(2) << '\n';
  }
  return kOk;
}

ExperimentConfig experiment_config(const Options& o) {
  if (o.config.empty()) throw UsageError("run needs --config");
  auto config = load_experiment_config(o.config);
  if (!o.store.empty()) config.store = o.store;
  if (!o.out.empty()) config.out = o.out;
  if (o.seed) config.seed = *o.seed;
  if (o.workers > 0) config.workers = o.workers;
  if (o.pnl_relative) config.strategy.pnl_relative = true;
  if (!o.split_date.empty()) {
    config.split_date = parse_date(o.split_date);
    config.split_date_defaulted = false;
  }
  if (!o.hft_file.empty()) config.hft_file = o.hft_file;
  if (config.split_date_defaulted) {
    spdlog::info("no split date configured; using the default {}", format_date(config.split_date));
  }
  return config;
}

int cmd_run(const Options& o) {
  const auto config = experiment_config(o);
  if (config.store.empty()) throw UsageError("no store given (config key 'store' or --store)");
  if (config.out.empty()) throw UsageError("no output directory given (config key 'out' or --out)");
  std::optional<HftSeries> hft;
  if (!config.hft_file.empty()) hft = load_hft(config.hft_file);
  if (!std::filesystem::is_directory(config.store)) throw DataError(fmt::format("store {} not found", config.store));
  BarStore store(config.store);
  const auto result = run_experiment(store, config);
  write_run_outputs(config.out, config, result, hft);
  for (const auto& row : split_report(result_series(result), config.split_date)) {
    if (row.stats.empty) {
      fmt::print("{:<9} {:<5} empty\n", row.learner, to_string(row.partition));
      continue;
    }
    fmt::print("{:<9} {:<5} days {:>4}  mean {:>8.3f} bps  cumulative {:>8.3f}%  precision {}\n", row.learner,
               to_string(row.partition), row.stats.days, row.stats.mean_daily_bps, 100.0 * row.stats.cumulative,
               row.stats.mean_precision ? fmt::format("{:.4f}", *row.stats.mean_precision) : "undefined");
  }
  return kOk;
}

int cmd_report(const Options& o) {
  if (o.out.empty()) throw UsageError("report needs --out (a run output directory)");
  ExperimentConfig config;
  if (!o.config.empty()) config = experiment_config(o);
  if (!o.split_date.empty()) config.split_date = parse_date(o.split_date);
  std::optional<HftSeries> hft;
  const std::string hft_file = o.hft_file.empty() ? config.hft_file : o.hft_file;
  if (!hft_file.empty()) hft = load_hft(hft_file);
  const auto path = std::filesystem::path(o.out) / "daily_returns.csv";
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
  const auto series = read_daily_returns(in, path.string());
  in.close();
  write_report(o.out, series, report_options(config, hft));
  return kOk;
}

int cmd_selfcheck() {
  bool ok = true;
  for (const auto& c : run_selfcheck()) {
    fmt::print("{} {} ({})\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    ok = ok && c.passed;
  }
  return ok ? kOk : kCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Walk-forward intraday efficiency experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Config file");
  app.add_option("--store", o.store, "Bar store directory");
  app.add_option("--out", o.out, "Output file or directory");
  app.add_option("--seed", o.seed, "Override the configured seed");
  app.add_option("--workers", o.workers, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("--pnl-relative", o.pnl_relative, "Use universe-relative returns for P&L");
  app.add_option("--split-date", o.split_date, "Early/late split date, YYYY-MM-DD");
  app.add_option("--hft-file", o.hft_file, "Monthly HFT ratio CSV (month,hft_ratio)");
  app.add_flag("-v,--verbose", o.verbose, "Debug logging");
  app.add_flag("-q,--quiet", o.quiet, "Warnings and errors only");

  auto* ingest = app.add_subcommand("ingest", "Trade CSVs to a bar store");
  std::vector<std::string> files;
  std::string symbol_map, exclusions;
  int open_minute = 570, minutes = 390;
  ingest->add_option("files", files, "Trade CSV files")->required();
  ingest->add_option("--symbol-map", symbol_map, "effective_date,old_symbol,new_symbol CSV");
  ingest->add_option("--exclusions", exclusions, "One excluded symbol per line");
  ingest->add_option("--open-minute", open_minute, "Session open, minutes after midnight");
  ingest->add_option("--minutes", minutes, "Session length in minutes");

  auto* bars = app.add_subcommand("bars", "Print one day's minute bars as CSV");
  std::string bar_date, bar_symbol;
  bars->add_option("--date", bar_date, "YYYY-MM-DD")->required();
  bars->add_option("--symbol", bar_symbol, "Only this symbol");

  auto* universe = app.add_subcommand("universe", "Daily top-N dollar-volume universes as CSV");
  std::string u_from, u_to;
  int u_size = 500, u_years = 1;
  universe->add_option("--from", u_from, "First date")->required();
  universe->add_option("--to", u_to, "Last date")->required();
  universe->add_option("--size", u_size, "Universe size");
  universe->add_option("--window-years", u_years, "Trailing window in years");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic market into a bar store");
  std::string trades_out, report_out;
  synth->add_option("--trades", trades_out, "Also write the trades as CSV");
  synth->add_option("--report", report_out, "Write the ground-truth report as JSON");

  auto* run = app.add_subcommand("run", "Run the walk-forward experiment");
  auto* report = app.add_subcommand("report", "Recompute report CSVs from a run directory");
  auto* selfcheck = app.add_subcommand("selfcheck", "Built-in verification checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  spdlog::set_level(o.verbose ? spdlog::level::debug : o.quiet ? spdlog::level::warn : spdlog::level::info);
  spdlog::set_pattern("%^%l%$: %v");
  if (o.workers > 0) omp_set_num_threads(o.workers);

  try {
    if (*ingest) return cmd_ingest(o, files, symbol_map, exclusions, open_minute, minutes);
    if (*bars) return cmd_bars(o, bar_date, bar_symbol);
    if (*universe) return cmd_universe(o, u_from, u_to, u_size, u_years);
    if (*synth) return cmd_synth(o, trades_out, report_out);
    if (*run) return cmd_run(o);
    if (*report) return cmd_report(o);
    if (*selfcheck) return cmd_selfcheck();
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsage;
  } catch (const DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kData;
  } catch (const CheckFailure& e) {
    fmt::print(stderr, "check failed: {}\n", e.what());
    return kCheck;
  } catch (const TrainingError& e) {
    fmt::print(stderr, "training error: {}\n", e.what());
    return kData;
  }
  return kUsage;
}
