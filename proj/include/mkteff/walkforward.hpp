#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mkteff/analytics.hpp"
#include "mkteff/bar_store.hpp"
#include "mkteff/calendar.hpp"
#include "mkteff/dataset.hpp"
#include "mkteff/learners/classifier.hpp"
#include "mkteff/strategy.hpp"
#include "mkteff/universe.hpp"

namespace mkteff {

/// Inclusive run of calendar months.
struct MonthRange {
  YearMonth first{};
  YearMonth last{};

  Date begin() const { return first_day(first); }
  Date end() const { return last_day(last); }
  bool contains(Date d) const { return d >= begin() && d <= end(); }
  int months() const { return months_between(first, last) + 1; }
};

/// Test month T, validation T-1, training T-13..T-2, universe lookback T-25..T-14.
struct PeriodLayout {
  YearMonth test{};
  YearMonth validation{};
  MonthRange training;
  MonthRange universe_lookback;
};

inline constexpr int kHistoryMonths = 25;

/// Throws UsageError when `test` is fewer than 25 months after `experiment_start`.
PeriodLayout layout_periods(YearMonth experiment_start, YearMonth test);

enum class UniverseMode : std::uint8_t { Daily, Fixed };
enum class PrecisionMode : std::uint8_t { DailyMean, Pooled };

struct ExperimentConfig {
  Date start{};
  Date end{};
  std::optional<YearMonth> first_test;  // default: start month + 25
  std::optional<YearMonth> last_test;   // default: month of `end`
  std::vector<LearnerKind> learners = {LearnerKind::Neural, LearnerKind::Logistic, LearnerKind::Random};

  int universe_size = 500;
  int universe_window_years = 1;
  UniverseMode universe_mode = UniverseMode::Daily;

  std::vector<int> grid_end_x = {kEndXGrid.begin(), kEndXGrid.end()};
  std::vector<int> grid_bps = {kBpsGrid.begin(), kBpsGrid.end()};
  PrecisionMode precision_mode = PrecisionMode::DailyMean;

  Date split_date = Date{std::chrono::year{2008} / 9 / 30};
  bool split_date_defaulted = true;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: OpenMP default

  TrainingConfig training;
  StrategyConfig strategy;
  int smooth_window = 40;
  double return_bin_bps = 2.0;
  double precision_bin = 0.02;

  std::string store;
  std::string out;
  std::string hft_file;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  std::vector<Hyperparams> grid() const;
  YearMonth first_test_month() const;
  YearMonth last_test_month() const;
};

struct DirectionFit {
  Direction direction = Direction::Up;
  std::uint64_t seed = 0;
  bool trained = false;
  std::string failure;  // set when training threw; the direction then predicts nothing
  std::int64_t rows = 0;
  std::int64_t positives = 0;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_validation_loss = 0.0;
};

struct CellResult {
  Hyperparams hyperparams;
  DirectionFit up;
  DirectionFit down;
  double score = 0.0;  // validation precision; 0 when no validation day traded
  int validation_days = 0;
  int trading_days = 0;
  std::int64_t trades = 0;
};

/// Index of the best cell: highest score, then larger bps, then smaller |end_x|.
std::size_t select_cell(const std::vector<CellResult>& cells);

struct MonthSelection {
  YearMonth month{};
  LearnerKind learner = LearnerKind::Random;
  PeriodLayout layout;
  std::vector<CellResult> cells;
  std::size_t selected = 0;
  bool degenerate = false;         // no cell traded on any validation day
  std::uint64_t model_checksum = 0;  // FNV-1a over the selected models' parameters
  std::int64_t training_rows = 0;
  std::int64_t validation_rows = 0;
  int test_days = 0;
};

/// Trained Up/Down pair for one cell; either may be null after a training failure.
struct CellModels {
  std::unique_ptr<Classifier> up;
  std::unique_ptr<Classifier> down;
};

std::uint64_t model_checksum(const CellModels& models);

/// Shared, cached inputs of an experiment: dollar-volume index, universes and day examples.
class ExperimentData {
 public:
  ExperimentData(const BarSource& store, const ExperimentConfig& config);

  const BarSource& store() const { return *store_; }
  const DollarVolumeIndex& index() const { return index_; }
  /// Stored dates inside `range`.
  std::vector<Date> dates(const MonthRange& range) const;
  /// Universe used on `date` in the month described by `layout`.
  const UniverseDay& universe(Date date, const PeriodLayout& layout);
  /// Day examples for the universe of `date`; the zero anchor is checked on construction.
  const DayExamples& examples(Date date, int end_x, const PeriodLayout& layout);
  /// Drops cached examples dated before `date`.
  void evict_before(Date date);
  /// Throws DataError naming the first month in `range` with no stored date.
  void require_months(const MonthRange& range) const;

 private:
  const BarSource* store_;
  const ExperimentConfig* config_;
  DollarVolumeIndex index_;
  std::vector<Date> all_dates_;
  std::map<Date, UniverseDay> daily_;
  std::map<Date, UniverseDay> fixed_;  // keyed by training start
  struct CachedDay {
    std::vector<std::string> universe;
    DayExamples examples;
  };
  std::map<std::pair<Date, int>, CachedDay> examples_;
};

/// Trains all cells for both directions, scores them on the validation month and returns
/// the selection; the chosen cell's models are moved into `chosen`.
MonthSelection run_grid(const PeriodLayout& layout, LearnerKind learner, ExperimentData& data,
                        const ExperimentConfig& config, CellModels* chosen = nullptr);

struct ExperimentResult {
  std::vector<YearMonth> test_months;
  std::map<LearnerKind, std::vector<DailyResult>> daily;
  std::vector<MonthSelection> selections;
  std::map<YearMonth, std::uint64_t> data_checksums;
};

using ProgressFn = std::function<void(const MonthSelection&)>;

/// Runs every test month for every configured learner. Throws DataError when a month
/// of required data is missing.
ExperimentResult run_experiment(const BarSource& store, const ExperimentConfig& config, const ProgressFn& progress = {});

/// Per-learner return series keyed by learner name.
std::map<std::string, ReturnSeries> result_series(const ExperimentResult& result);

std::uint64_t day_checksum(const DayBars& day);

}  // namespace mkteff
