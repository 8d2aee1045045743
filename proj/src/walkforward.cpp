#include "mkteff/walkforward.hpp"

#include <algorithm>
#include <exception>
#include <set>

#include <fmt/format.h>
#include <omp.h>
#include <spdlog/spdlog.h>

#include "mkteff/rng.hpp"

namespace mkteff {

PeriodLayout layout_periods(YearMonth experiment_start, YearMonth test) {
  if (months_between(experiment_start, test) < kHistoryMonths) {
    throw UsageError(fmt::format("test month {} needs {} months of history after {}", format_month(test),
                                 kHistoryMonths, format_month(experiment_start)));
  }
  PeriodLayout p;
  p.test = test;
  p.validation = add_months(test, -1);
  p.training = {add_months(test, -13), add_months(test, -2)};
  p.universe_lookback = {add_months(test, -25), add_months(test, -14)};
  return p;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (start > end) fail("experiment start is after its end");
  if (first_test_month() > last_test_month()) fail("no test months between first and last test month");
  if (months_between(month_of(start), first_test_month()) < kHistoryMonths) {
    fail(fmt::format("first test month {} is fewer than {} months after the experiment start",
                     format_month(first_test_month()), kHistoryMonths));
  }
  if (learners.empty()) fail("no learners configured");
  if (std::set<LearnerKind>(learners.begin(), learners.end()).size() != learners.size()) fail("duplicate learner");
  if (universe_size < 1) fail("universe size must be positive");
  if (universe_window_years < 1) fail("universe window must be at least one year");
  if (grid_end_x.empty() || grid_bps.empty()) fail("empty hyperparameter grid");
  for (const auto& hp : grid()) {
    try {
      hp.validate();
    } catch (const UsageError& e) {
      fail(e.what());
    }
  }
  if (training.batch_size < 1 || training.max_epochs < 1 || training.patience < 1) {
    fail("batch size, epochs and patience must be positive");
  }
  for (int h : training.hidden) {
    if (h < 1) fail("hidden layer sizes must be positive");
  }
  if (!(training.adam.step > 0.0) || !(training.logistic_step > 0.0)) fail("step sizes must be positive");
  if (training.l2 < 0.0 || training.min_delta < 0.0) fail("l2 and min_delta must be nonnegative");
  if (training.logistic_max_iters < 1) fail("logistic iteration cap must be positive");
  if (strategy.cost_bps_per_side < 0.0) fail("cost must be nonnegative");
  if (smooth_window < 1 || !(return_bin_bps > 0.0) || !(precision_bin > 0.0)) fail("invalid report settings");
  if (workers < 0) fail("workers must be nonnegative");
}

std::vector<Hyperparams> ExperimentConfig::grid() const {
  std::vector<Hyperparams> g;
  for (int e : grid_end_x) {
    for (int b : grid_bps) g.push_back({e, b});
  }
  return g;
}

YearMonth ExperimentConfig::first_test_month() const {
  return first_test ? *first_test : add_months(month_of(start), kHistoryMonths);
}

YearMonth ExperimentConfig::last_test_month() const { return last_test ? *last_test : month_of(end); }

std::size_t select_cell(const std::vector<CellResult>& cells) {
  if (cells.empty()) throw UsageError("no cells to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const auto& a = cells[i];
    const auto& b = cells[best];
    const bool better =
        a.score > b.score ||
        (a.score == b.score &&
         (a.hyperparams.bps > b.hyperparams.bps ||
          (a.hyperparams.bps == b.hyperparams.bps && std::abs(a.hyperparams.end_x) < std::abs(b.hyperparams.end_x))));
    if (better) best = i;
  }
  return best;
}

std::uint64_t model_checksum(const CellModels& models) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto* m : {models.up.get(), models.down.get()}) {
    const std::uint8_t present = m ? 1 : 0;
    h = fnv1a(std::as_bytes(std::span(&present, 1)), h);
    if (!m) continue;
    for (const auto& block : m->parameters()) {
      h = fnv1a(std::as_bytes(std::span(block.data(), static_cast<std::size_t>(block.size()))), h);
    }
  }
  return h;
}

std::uint64_t day_checksum(const DayBars& day) {
  const auto bytes = encode_day(day);
  return fnv1a(bytes);
}

ExperimentData::ExperimentData(const BarSource& store, const ExperimentConfig& config)
    : store_(&store), config_(&config), index_(store), all_dates_(store.dates()) {}

std::vector<Date> ExperimentData::dates(const MonthRange& range) const {
  std::vector<Date> out;
  auto lo = std::lower_bound(all_dates_.begin(), all_dates_.end(), range.begin());
  auto hi = std::upper_bound(all_dates_.begin(), all_dates_.end(), range.end());
  out.assign(lo, hi);
  return out;
}

void ExperimentData::require_months(const MonthRange& range) const {
  for (auto m = range.first; m <= range.last; m = add_months(m, 1)) {
    if (dates({m, m}).empty()) throw DataError(fmt::format("no stored data for {}; experiment halted", format_month(m)));
  }
}

const UniverseDay& ExperimentData::universe(Date date, const PeriodLayout& layout) {
  const int n = config_->universe_size;
  const int years = config_->universe_window_years;
  if (config_->universe_mode == UniverseMode::Fixed) {
    const Date as_of = layout.training.begin();
    auto it = fixed_.find(as_of);
    if (it == fixed_.end()) it = fixed_.emplace(as_of, select_universe(index_, as_of, n, years)).first;
    return it->second;
  }
  auto it = daily_.find(date);
  if (it == daily_.end()) it = daily_.emplace(date, select_universe(index_, date, n, years)).first;
  return it->second;
}

const DayExamples& ExperimentData::examples(Date date, int end_x, const PeriodLayout& layout) {
  const auto& u = universe(date, layout);
  const auto key = std::make_pair(date, end_x);
  auto it = examples_.find(key);
  // Fixed universes change with the month, so a cached day is reused only for the same membership.
  if (it != examples_.end() && it->second.universe == u.symbols) return it->second.examples;
  const auto closes = load_closes(*store_, date, u.symbols);
  if (closes.rows() == 0) throw DataError(fmt::format("{}: no universe symbol has bars", format_date(date)));
  auto ex = build_day_examples(closes, end_x);
  const auto last = ex.observations.cols() - 1;
  for (Eigen::Index i = 0; i < ex.observations.rows(); ++i) {
    if (ex.observations(i, last) != 0.0) {
      throw CheckFailure(fmt::format("{} {}: observation anchor is not zero", format_date(date), ex.symbols[i]));
    }
  }
  auto& slot = examples_[key];
  slot.universe = u.symbols;
  slot.examples = std::move(ex);
  return slot.examples;
}

void ExperimentData::evict_before(Date date) {
  examples_.erase(examples_.begin(), examples_.lower_bound({date, std::numeric_limits<int>::min()}));
  daily_.erase(daily_.begin(), daily_.lower_bound(date));
}

namespace {

int thread_count(const ExperimentConfig& config) { return config.workers > 0 ? config.workers : omp_get_max_threads(); }

std::uint64_t month_key(YearMonth m) {
  return static_cast<std::uint64_t>(static_cast<int>(m.year()) * 12 + static_cast<int>(static_cast<unsigned>(m.month())));
}

std::vector<std::uint8_t> classes(const Classifier* model, const Matrix& x) {
  if (!model) return std::vector<std::uint8_t>(static_cast<std::size_t>(x.rows()), 0);
  return model->predict(x);
}

// Runs body(i) for i in [0, n) on the configured threads and rethrows the first failure.
template <typename Body>
void parallel_tasks(int n, int threads, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

MonthSelection run_grid(const PeriodLayout& layout, LearnerKind learner, ExperimentData& data,
                        const ExperimentConfig& config, CellModels* chosen) {
  MonthSelection sel;
  sel.month = layout.test;
  sel.learner = learner;
  sel.layout = layout;
  const auto grid = config.grid();
  const auto train_dates = data.dates(layout.training);
  const auto val_dates = data.dates({layout.validation, layout.validation});
  if (train_dates.empty() || val_dates.empty()) {
    throw DataError(fmt::format("{}: empty training or validation period", format_month(layout.test)));
  }

  struct Stacks {
    Dataset train;
    Dataset validation;
    std::vector<const DayExamples*> validation_days;
  };
  std::map<int, Stacks> stacks;
  for (const auto& hp : grid) {
    if (stacks.contains(hp.end_x)) continue;
    Stacks s;
    std::vector<const DayExamples*> days;
    for (Date d : train_dates) days.push_back(&data.examples(d, hp.end_x, layout));
    s.train = stack_days(days, hp.end_x);
    for (Date d : val_dates) s.validation_days.push_back(&data.examples(d, hp.end_x, layout));
    s.validation = stack_days(s.validation_days, hp.end_x);
    stacks.emplace(hp.end_x, std::move(s));
  }
  sel.training_rows = static_cast<std::int64_t>(stacks.begin()->second.train.rows());
  sel.validation_rows = static_cast<std::int64_t>(stacks.begin()->second.validation.rows());

  const int n_cells = static_cast<int>(grid.size());
  std::vector<CellModels> models(grid.size());
  sel.cells.resize(grid.size());
  for (int c = 0; c < n_cells; ++c) {
    sel.cells[c].hyperparams = grid[c];
    sel.cells[c].up.direction = Direction::Up;
    sel.cells[c].down.direction = Direction::Down;
  }

  parallel_tasks(2 * n_cells, thread_count(config), [&](int task) {
    const int c = task / 2;
    const auto dir = task % 2 == 0 ? Direction::Up : Direction::Down;
    const auto& hp = grid[c];
    const auto& s = stacks.at(hp.end_x);
    auto& fit = dir == Direction::Up ? sel.cells[c].up : sel.cells[c].down;
    auto& slot = dir == Direction::Up ? models[c].up : models[c].down;
    const auto y = make_labels(s.train.forward_relative, hp.bps, dir);
    const auto yv = make_labels(s.validation.forward_relative, hp.bps, dir);
    fit.seed = derive_seed(config.seed, {month_key(layout.test), static_cast<std::uint64_t>(learner),
                                         static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(dir)});
    fit.rows = static_cast<std::int64_t>(y.size());
    fit.positives = std::count(y.begin(), y.end(), std::uint8_t{1});
    try {
      auto model = train_classifier(learner, {&s.train.observations, y}, {&s.validation.observations, yv}, fit.seed,
                                    config.training);
      model->direction = dir;
      model->hyperparams = hp;
      fit.trained = true;
      fit.epochs_run = model->meta.epochs_run;
      fit.best_epoch = model->meta.best_epoch;
      fit.best_validation_loss = model->meta.best_validation_loss;
      slot = std::move(model);
    } catch (const TrainingError& e) {
      fit.failure = e.what();
    }
  });
  for (const auto& cell : sel.cells) {
    for (const auto* fit : {&cell.up, &cell.down}) {
      if (!fit->trained) {
        spdlog::warn("{} {} ({},{}) {}: training failed, direction predicts nothing: {}", format_month(layout.test),
                     to_string(learner), cell.hyperparams.end_x, cell.hyperparams.bps, to_string(fit->direction),
                     fit->failure);
      }
    }
  }

  parallel_tasks(n_cells, thread_count(config), [&](int c) {
    auto& cell = sel.cells[c];
    const auto& s = stacks.at(cell.hyperparams.end_x);
    double precision_sum = 0.0;
    double correct = 0.0;
    for (const auto* ex : s.validation_days) {
      const auto up = classes(models[c].up.get(), ex->observations);
      const auto down = classes(models[c].down.get(), ex->observations);
      const auto r = simulate_day(*ex, up, down, config.strategy);
      ++cell.validation_days;
      if (!r.trade_precision) continue;
      const auto n = static_cast<std::int64_t>(r.portfolio.longs.size() + r.portfolio.shorts.size());
      ++cell.trading_days;
      cell.trades += n;
      precision_sum += *r.trade_precision;
      correct += *r.trade_precision * static_cast<double>(n);
    }
    if (cell.trading_days > 0) {
      cell.score = config.precision_mode == PrecisionMode::Pooled ? correct / static_cast<double>(cell.trades)
                                                                  : precision_sum / cell.trading_days;
    }
  });

  sel.selected = select_cell(sel.cells);
  sel.degenerate = std::all_of(sel.cells.begin(), sel.cells.end(), [](const CellResult& c) { return c.trading_days == 0; });
  if (sel.degenerate) {
    spdlog::warn("{} {}: degenerate month, no cell traded during validation; using tie-break cell ({},{})",
                 format_month(layout.test), to_string(learner), sel.cells[sel.selected].hyperparams.end_x,
                 sel.cells[sel.selected].hyperparams.bps);
  }
  sel.model_checksum = model_checksum(models[sel.selected]);
  if (chosen) *chosen = std::move(models[sel.selected]);
  return sel;
}

ExperimentResult run_experiment(const BarSource& store, const ExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  ExperimentResult result;
  const YearMonth start = month_of(config.start);
  const YearMonth first = config.first_test_month();
  const YearMonth last = config.last_test_month();
  ExperimentData data(store, config);
  data.require_months({start, last});

  for (auto m = start; m <= last; m = add_months(m, 1)) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Date d : data.dates({m, m})) {
      const auto day = store.day(d);
      const std::uint64_t c = day_checksum(*day);
      h = fnv1a(std::as_bytes(std::span(&c, 1)), h);
    }
    result.data_checksums.emplace(m, h);
  }

  for (auto month = first; month <= last; month = add_months(month, 1)) {
    const auto layout = layout_periods(start, month);
    data.evict_before(layout.training.begin());
    result.test_months.push_back(month);
    const auto test_dates = data.dates({month, month});
    for (auto learner : config.learners) {
      CellModels models;
      auto sel = run_grid(layout, learner, data, config, &models);
      const auto hp = sel.cells[sel.selected].hyperparams;
      auto& out = result.daily[learner];
      for (Date d : test_dates) {
        const auto& ex = data.examples(d, hp.end_x, layout);
        const auto up = classes(models.up.get(), ex.observations);
        const auto down = classes(models.down.get(), ex.observations);
        out.push_back(simulate_day(ex, up, down, config.strategy));
      }
      sel.test_days = static_cast<int>(test_dates.size());
      spdlog::info("{} {}: selected end_x={} bps={} (validation precision {:.4f}{})", format_month(month),
                   to_string(learner), hp.end_x, hp.bps, sel.cells[sel.selected].score,
                   sel.degenerate ? ", degenerate" : "");
      if (progress) progress(sel);
      result.selections.push_back(std::move(sel));
    }
  }
  return result;
}

std::map<std::string, ReturnSeries> result_series(const ExperimentResult& result) {
  std::map<std::string, ReturnSeries> out;
  for (const auto& [kind, days] : result.daily) out.emplace(std::string(to_string(kind)), to_series(days));
  return out;
}

}  // namespace mkteff
