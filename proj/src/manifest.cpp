#include "mkteff/manifest.hpp"

#include <fstream>

#include <fmt/format.h>

#include "mkteff/config.hpp"

namespace mkteff {

namespace {

nlohmann::ordered_json fit_json(const DirectionFit& f) {
  nlohmann::ordered_json j;
  j["seed"] = fmt::format("{:016x}", f.seed);
  j["trained"] = f.trained;
  j["rows"] = f.rows;
  j["positives"] = f.positives;
  j["epochs_run"] = f.epochs_run;
  j["best_epoch"] = f.best_epoch;
  j["best_validation_loss"] = f.best_validation_loss;
  if (!f.failure.empty()) j["failure"] = f.failure;
  return j;
}

}  // namespace

nlohmann::ordered_json run_manifest(const ExperimentConfig& config, const ExperimentResult& result) {
  nlohmann::ordered_json j;
  j["program"] = "mkteff";
  j["version"] = kVersion;
  j["config"] = to_json(config);
  j["notes"] = {"cumulative returns compound daily returns multiplicatively",
                "validation precision is the mean of daily trade precision over days with trades unless "
                "select.precision = pooled"};
  auto& months = j["months"] = nlohmann::ordered_json::array();
  for (const auto& s : result.selections) {
    nlohmann::ordered_json m;
    m["month"] = format_month(s.month);
    m["learner"] = to_string(s.learner);
    m["validation_month"] = format_month(s.layout.validation);
    m["training"] = {format_month(s.layout.training.first), format_month(s.layout.training.last)};
    m["universe_lookback"] = {format_month(s.layout.universe_lookback.first),
                              format_month(s.layout.universe_lookback.last)};
    const auto& best = s.cells[s.selected];
    m["selected"] = {{"end_x", best.hyperparams.end_x}, {"bps", best.hyperparams.bps}, {"score", best.score}};
    m["degenerate"] = s.degenerate;
    m["model_checksum"] = fmt::format("{:016x}", s.model_checksum);
    m["training_rows"] = s.training_rows;
    m["validation_rows"] = s.validation_rows;
    m["test_days"] = s.test_days;
    auto& cells = m["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : s.cells) {
      cells.push_back({{"end_x", c.hyperparams.end_x},
                       {"bps", c.hyperparams.bps},
                       {"score", c.score},
                       {"validation_days", c.validation_days},
                       {"trading_days", c.trading_days},
                       {"trades", c.trades},
                       {"up", fit_json(c.up)},
                       {"down", fit_json(c.down)}});
    }
    months.push_back(std::move(m));
  }
  auto& sums = j["data_checksums"] = nlohmann::ordered_json::object();
  for (const auto& [month, h] : result.data_checksums) sums[format_month(month)] = fmt::format("{:016x}", h);
  return j;
}

ReportOptions report_options(const ExperimentConfig& config, std::optional<HftSeries> hft) {
  ReportOptions o;
  o.split_date = config.split_date;
  o.smooth_window = config.smooth_window;
  o.return_bin_bps = config.return_bin_bps;
  o.precision_bin = config.precision_bin;
  o.hft = std::move(hft);
  return o;
}

void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                       const ExperimentResult& result, const std::optional<HftSeries>& hft) {
  std::filesystem::create_directories(dir);
  for (const auto& [kind, days] : result.daily) {
    const auto path = dir / fmt::format("trades_{}.csv", to_string(kind));
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
    write_trade_log(out, days);
  }
  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write {}", (dir / "manifest.json").string()));
    out << run_manifest(config, result).dump(2) << '\n';
  }
  write_report(dir, result_series(result), report_options(config, hft));
}

}  // namespace mkteff
