// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any failed.
//
//   mkteff_acceptance --cli <path to mkteff> --work <scratch dir>
//
// Synthetic stores are kept in the work directory and reused when their config matches.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "mkteff/config.hpp"
#include "mkteff/rng.hpp"
#include "mkteff/selfcheck.hpp"
#include "mkteff/synth.hpp"
#include "mkteff/universe.hpp"
#include "mkteff/walkforward.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mkteff;
using std::chrono::year;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

YearMonth ym(int y, int m) { return YearMonth{year{y} / m}; }

void note(const std::string& s) {
  fmt::print("  .. {}\n", s);
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------------------
// Synthetic experiments

constexpr double kIdioVol = 2.0;
constexpr double kStrength = 20.0;
constexpr int kSignalWindow = 120;
const Date kSignalEnd{year{2003} / 7 / 31};  // last day of test month 6

SynthConfig market(std::uint64_t seed, bool planted) {
  SynthConfig c;
  c.n_symbols = 50;
  c.start = Date{year{2001} / 1 / 2};
  c.n_days = 820;
  c.seed = seed;
  c.idio_vol_bps = kIdioVol;
  if (planted) {
    Regime r;
    r.from = c.start;
    r.to = kSignalEnd;
    r.strength_bps = kStrength;
    r.signal_window = kSignalWindow;
    r.marked_fraction = 0.10;
    r.drift_start = 360;
    c.regimes = {r};
  }
  return c;
}

ExperimentConfig experiment(std::uint64_t seed, YearMonth last) {
  ExperimentConfig c;
  c.start = Date{year{2001} / 1 / 2};
  c.end = last_day(last);
  c.first_test = ym(2003, 2);
  c.last_test = last;
  c.learners = {LearnerKind::Neural, LearnerKind::Logistic, LearnerKind::Random};
  c.universe_size = 20;
  c.seed = seed;
  c.split_date = kSignalEnd;
  c.split_date_defaulted = false;
  return c;
}

// Generates the store unless one with the same config already exists.
BarStore ensure_store(const fs::path& dir, const SynthConfig& config) {
  const auto stamp = dir / "synth.json";
  const auto want = to_json(config).dump();
  if (fs::exists(stamp)) {
    std::ifstream in(stamp);
    std::string have((std::istreambuf_iterator<char>(in)), {});
    if (have == want) return BarStore(dir);
  }
  fs::remove_all(dir);
  fs::create_directories(dir);
  note(fmt::format("generating {} ({} symbols, {} days)", dir.filename().string(), config.n_symbols, config.n_days));
  BarStore store(dir);
  generate_market(config, store);
  std::ofstream(stamp) << want;
  return store;
}

struct Run {
  std::string name;
  ExperimentResult result;
  std::map<std::string, std::map<Partition, PartitionStats>> stats;
  Date split{};
};

Run run(const std::string& name, const BarSource& store, const ExperimentConfig& config) {
  note(fmt::format("{}: {} to {}", name, format_month(config.first_test_month()),
                   format_month(config.last_test_month())));
  Run r{name, run_experiment(store, config,
                             [&](const MonthSelection& s) {
                               const auto& c = s.cells[s.selected];
                               note(fmt::format("{} {} {:<8} end_x {:>3} bps {:>2} score {:.3f}{}", name,
                                                format_month(s.month), to_string(s.learner), c.hyperparams.end_x,
                                                c.hyperparams.bps, c.score, s.degenerate ? " degenerate" : ""));
                             }),
        {},
        config.split_date};
  for (const auto& row : split_report(result_series(r.result), config.split_date)) {
    r.stats[row.learner][row.partition] = row.stats;
  }
  return r;
}

// Every position a learner took, scored like trade_precision: a zero relative return is wrong.
struct Tally {
  std::int64_t trades = 0;
  std::int64_t correct = 0;

  double precision() const { return trades ? static_cast<double>(correct) / static_cast<double>(trades) : 0.0; }
  // Half-width of the chance band: 0.05, or three binomial standard errors when trades are few.
  double half_width() const { return std::max(0.05, 3.0 * std::sqrt(0.25 / static_cast<double>(trades))); }
  bool in_band() const { return trades > 0 && std::abs(precision() - 0.5) <= half_width(); }
};

Tally tally(const Run& r, const std::string& learner, std::optional<Partition> part = std::nullopt) {
  Tally t;
  for (const auto& [kind, days] : r.result.daily) {
    if (to_string(kind) != learner) continue;
    for (const auto& day : days) {
      if (part && partition_of(day.date, r.split) != *part) continue;
      for (const auto& p : day.positions) {
        const double signed_return = p.side == Action::Long ? p.relative_return : -p.relative_return;
        ++t.trades;
        t.correct += signed_return > 0.0;
      }
    }
  }
  return t;
}

std::string describe(const std::string& learner, const PartitionStats& s, const Tally& t) {
  if (s.empty) return fmt::format("{} empty", learner);
  return fmt::format("{} {:+.3f}+/-{:.3f} bps, cum {:+.2f}%, prec {} daily / {:.4f} over {} trades (chance +/-{:.3f})",
                     learner, s.mean_daily_bps, s.stderr_daily_bps, 100.0 * s.cumulative,
                     s.mean_precision ? fmt::format("{:.4f}", *s.mean_precision) : "n/a", t.precision(), t.trades,
                     t.half_width());
}

// Mean within 3 standard errors of zero and trade precision within the chance band.
bool in_null_band(const PartitionStats& s, const Tally& t) {
  return !s.empty && std::abs(s.mean_daily_bps) <= 3.0 * s.stderr_daily_bps && t.in_band();
}

PartitionStats pooled(const Run& r, const std::string& learner) {
  // Both partitions together, for runs that only have one.
  ReturnSeries all;
  for (const auto& [kind, days] : r.result.daily) {
    if (to_string(kind) != learner) continue;
    all = to_series(days);
  }
  return summarize(all);
}

Outcome criterion_null(const Run& r) {
  Outcome o{true, {}};
  std::vector<std::string> parts;
  for (const char* l : {"neural", "logistic", "random"}) {
    const auto s = pooled(r, l);
    const auto t = tally(r, l);
    o.pass = o.pass && in_null_band(s, t) && s.days >= 240;
    parts.push_back(describe(l, s, t));
  }
  o.detail = fmt::format("{} test months; {}", r.result.test_months.size(), fmt::join(parts, "; "));
  return o;
}

Outcome criterion_control(const std::vector<const Run*>& runs) {
  Outcome o{true, {}};
  std::vector<std::string> parts;
  for (const auto* r : runs) {
    std::vector<std::string> p;
    for (const char* l : {"neural", "logistic"}) {
      const auto& s = r->stats.at(l).at(Partition::Early);
      o.pass = o.pass && !s.empty && s.mean_precision && *s.mean_precision >= 0.55 && s.cumulative > 0.0;
      p.push_back(describe(l, s, tally(*r, l, Partition::Early)));
    }
    const auto& rnd = r->stats.at("random").at(Partition::Early);
    const auto rt = tally(*r, "random", Partition::Early);
    o.pass = o.pass && in_null_band(rnd, rt);
    p.push_back(describe("random", rnd, rt));
    parts.push_back(fmt::format("[{}] {}", r->name, fmt::join(p, "; ")));
  }
  o.detail = fmt::format("{} seeds, 6 test months each; {}", runs.size(), fmt::join(parts, " "));
  return o;
}

Outcome criterion_transition(const Run& r) {
  Outcome o{true, {}};
  std::vector<std::string> parts;
  for (const char* l : {"neural", "logistic"}) {
    const auto& e = r.stats.at(l).at(Partition::Early);
    const auto& late = r.stats.at(l).at(Partition::Late);
    const auto lt = tally(r, l, Partition::Late);
    o.pass = o.pass && !e.empty && !late.empty && e.mean_daily_bps > late.mean_daily_bps && in_null_band(late, lt);
    parts.push_back(fmt::format("{} early {:+.3f} > late {:+.3f}+/-{:.3f} bps (late prec {:.4f} over {} trades, "
                                "chance +/-{:.3f})",
                                l, e.mean_daily_bps, late.mean_daily_bps, late.stderr_daily_bps, lt.precision(),
                                lt.trades, lt.half_width()));
  }
  o.detail = fmt::format("signal in months 1-6 only; {}", fmt::join(parts, "; "));
  return o;
}

// ---------------------------------------------------------------------------------------
// In-process checks

Outcome criterion_gradients() {
  const SelfcheckHooks hooks;
  const auto nn = check_network_gradient(hooks, 100, 101);
  const auto lr = check_logistic_gradient(hooks, 100, 103);
  return {nn.passed && lr.passed, fmt::format("network: {}; logistic: {}", nn.detail, lr.detail)};
}

Outcome criterion_dataset(std::int64_t anchored_rows) {
  Rng rng(505);
  double worst = 0.0;
  int sessions = 0;
  bool anchors = true;
  for (int trial = 0; trial < 1200; ++trial) {
    const int minutes = 3 + static_cast<int>(rng.below(8));
    const int end_x = -1 - static_cast<int>(rng.below(static_cast<std::uint64_t>(minutes - 2)));
    const int n = 1 + static_cast<int>(rng.below(8));
    std::vector<std::vector<double>> paths(n);
    CloseRows rows;
    rows.minutes = minutes;
    for (int s = 0; s < n; ++s) {
      double p = rng.uniform(5.0, 100.0);
      for (int m = 0; m < minutes; ++m) {
        if (m > 0) p *= std::exp(0.02 * rng.normal());
        paths[s].push_back(p);
      }
      rows.symbols.push_back(fmt::format("X{}", s));
      rows.closes.insert(rows.closes.end(), paths[s].begin(), paths[s].end());
    }
    const auto mean = universe_mean_returns(rows);
    const auto omean = oracle::universe_mean(paths);
    worst = std::max(worst, oracle::norm_relative(mean, omean));
    for (int s = 0; s < n; ++s) {
      const auto obs = make_observation(paths[s], mean, end_x);
      anchors = anchors && obs.back() == 0.0;
      worst = std::max(worst, oracle::scaled_error(obs, oracle::observation(paths[s], omean, end_x),
                                                   oracle::observation_scale(paths[s], omean, end_x)));
      const long double fwd = oracle::forward(paths[s], omean, end_x);
      const double got = forward_relative_return(paths[s], mean, end_x);
      const long double scale = std::max(oracle::forward_scale(paths[s], omean, end_x), 1e-300L);
      worst = std::max(worst, static_cast<double>(std::abs(got - fwd) / scale));
      // Labels follow the oracle return, except within rounding of the threshold.
      for (int bps : {2, 5}) {
        const long double t = bps / 1e4L;
        if (std::abs(std::abs(fwd) - t) > 1e-14L) {
          anchors = anchors && make_label(paths[s], mean, end_x, bps, Direction::Up) == (fwd > t) &&
                    make_label(paths[s], mean, end_x, bps, Direction::Down) == (fwd < -t);
        }
      }
    }
    ++sessions;
  }
  return {worst <= 1e-12 && anchors && sessions >= 1000,
          fmt::format("{} random sessions, worst relative error {:.2e}, labels agree; zero anchor held on {} "
                      "streamed rows and is asserted on every experiment example",
                      sessions, worst, anchored_rows)};
}

DayExamples two_price_market(const std::vector<std::string>& syms, const std::vector<double>& entry,
                             const std::vector<double>& exit) {
  DayExamples m;
  m.end_x = -5;
  m.minutes = 390;
  m.symbols = syms;
  m.entry_price = entry;
  m.exit_price = exit;
  double mean = 0.0;
  for (std::size_t i = 0; i < syms.size(); ++i) mean += exit[i] / entry[i] - 1.0;
  mean /= static_cast<double>(syms.size());
  for (std::size_t i = 0; i < syms.size(); ++i) m.forward_relative.push_back(exit[i] / entry[i] - 1.0 - mean);
  return m;
}

Outcome criterion_strategy(const std::vector<const Run*>& runs) {
  const bool table = decide(true, false) == Action::Long && decide(false, true) == Action::Short &&
                     decide(false, false) == Action::NoOpinion && decide(true, true) == Action::Conflict;
  std::int64_t days = 0, trading = 0;
  bool balanced = true;
  for (const auto* r : runs) {
    for (const auto& [kind, results] : r->result.daily) {
      for (const auto& d : results) {
        ++days;
        try {
          d.portfolio.check_balance();
        } catch (const CheckFailure&) {
          balanced = false;
        }
        if (d.portfolio.trading()) {
          ++trading;
          balanced = balanced && d.portfolio.long_total == 0.5 && d.portfolio.short_total == 0.5;
        }
      }
    }
  }
  // A common additive shift of every symbol's return leaves the day unchanged.
  Rng rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(30));
    std::vector<std::string> syms;
    std::vector<double> entry, exit, shifted;
    std::vector<TradeDecision> decisions;
    const double s = 0.05 * rng.normal();
    for (int i = 0; i < n; ++i) {
      syms.push_back(fmt::format("X{}", i));
      entry.push_back(rng.uniform(5.0, 100.0));
      const double r = 0.01 * rng.normal();
      exit.push_back(entry.back() * (1.0 + r));
      shifted.push_back(entry.back() * (1.0 + r + s));
      const auto a = static_cast<Action>(rng.below(4));
      decisions.push_back({syms.back(), Date{}, a, 385, a == Action::Long || a == Action::Conflict,
                           a == Action::Short || a == Action::Conflict});
    }
    const auto p = allocate(Date{}, decisions);
    const auto a = realize(p, decisions, two_price_market(syms, entry, exit));
    const auto b = realize(p, decisions, two_price_market(syms, entry, shifted));
    worst = std::max(worst, std::abs(a.daily_return_bps - b.daily_return_bps) / 1e4);
  }
  return {table && balanced && days > 0 && worst <= 1e-12,
          fmt::format("truth table 4/4 {}; balance held on {} run days ({} trading); uniform shift moved the day "
                      "by at most {:.2e} over 1000 books",
                      table ? "ok" : "WRONG", days, trading, worst)};
}

// Copy of `src` with every bar on or after `from` moved by an independent random factor.
MemoryBarSource perturb_from(const BarSource& src, Date from, std::uint64_t seed) {
  MemoryBarSource out;
  Rng rng(seed);
  for (Date d : src.dates()) {
    DayBars day = *src.day(d);
    if (d >= from) {
      for (auto& s : day.symbols) {
        for (int m = 0; m < s.minutes(); ++m) {
          const double f = std::exp(0.01 * rng.normal());
          for (auto* col : {&s.open, &s.high, &s.low, &s.close}) (*col)[m] = to_price(to_double((*col)[m]) * f);
          s.volume[m] = s.volume[m] * static_cast<std::int64_t>(1 + rng.below(5)) + 1;
        }
      }
    }
    out.put(std::move(day));
  }
  return out;
}

Outcome criterion_lookahead() {
  SynthConfig mc;
  mc.n_symbols = 10;
  mc.n_days = 590;
  mc.seed = 77;
  mc.idio_vol_bps = 3.0;
  mc.volume_dispersion = 0.3;
  MemoryBarSource src;
  generate_market(mc, src);
  const Date test_start{year{2003} / 2 / 1};
  const auto perturbed = perturb_from(src, test_start, 78);

  ExperimentConfig cfg;
  cfg.start = mc.start;
  cfg.end = Date{year{2003} / 2 / 28};
  cfg.first_test = ym(2003, 2);
  cfg.last_test = ym(2003, 2);
  cfg.universe_size = 6;
  cfg.training.hidden = {32, 8};
  cfg.training.max_epochs = 5;
  cfg.training.logistic_max_iters = 100;
  const auto layout = layout_periods(ym(2001, 1), ym(2003, 2));

  int models = 0, universes = 0;
  bool same = true;
  for (auto kind : {LearnerKind::Neural, LearnerKind::Logistic, LearnerKind::Random}) {
    ExperimentData a(src, cfg), b(perturbed, cfg);
    CellModels ma, mb;
    const auto sa = run_grid(layout, kind, a, cfg, &ma);
    const auto sb = run_grid(layout, kind, b, cfg, &mb);
    same = same && sa.selected == sb.selected && sa.model_checksum == sb.model_checksum &&
           model_checksum(ma) == model_checksum(mb);
    ++models;
    for (Date d : a.dates({layout.training.first, layout.validation})) {
      same = same && a.universe(d, layout) == b.universe(d, layout);
      ++universes;
    }
    const auto first_test = a.dates({layout.test, layout.test}).front();
    same = same && a.universe(first_test, layout) == b.universe(first_test, layout);
  }
  // Direct universe audit: data on or after each audited date never changes that date's universe.
  const DollarVolumeIndex base(src);
  int audited = 0;
  for (Date from : {Date{year{2002} / 3 / 4}, Date{year{2002} / 9 / 16}, test_start}) {
    for (Date d : base.dates()) {
      if (d < from || d > from + std::chrono::days{10}) continue;
      const auto other = perturb_from(src, d, 79 + audited);
      const DollarVolumeIndex oi(other);
      same = same && select_universe(base, d, 6) == select_universe(oi, d, 6);
      ++audited;
    }
  }
  return {same, fmt::format("test-period perturbation left {} learners' selected models and {} training/validation "
                            "universes unchanged; {} universes audited against later-data perturbations",
                            models, universes, audited)};
}

// Regenerates days on demand, restarting the generator when asked to go back in time.
class StreamingSource : public BarSource {
 public:
  explicit StreamingSource(SynthConfig config) : config_(std::move(config)) { restart(); }

  std::vector<Date> dates() const override { return gen_->dates(); }

  std::shared_ptr<const DayBars> day(Date date) const override {
    const auto& all = gen_->dates();
    if (!std::binary_search(all.begin(), all.end(), date)) return nullptr;
    if (current_ && current_->date == date) return current_;
    if (current_ && date < current_->date) restart();
    while (!gen_->done()) {
      current_ = std::make_shared<const DayBars>(gen_->next());
      if (current_->date == date) return current_;
    }
    return nullptr;
  }

  int passes() const { return passes_; }

 private:
  void restart() const {
    gen_.emplace(config_);
    current_.reset();
    ++passes_;
  }

  SynthConfig config_;
  mutable std::optional<MarketGenerator> gen_;
  mutable std::shared_ptr<const DayBars> current_;
  mutable int passes_ = 0;
};

Outcome criterion_analytics(std::int64_t& anchored_rows) {
  std::vector<std::string> parts;
  bool ok = true;

  Rng rng(808);
  double worst_affine = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(200));
    std::vector<double> x(n), y(n), z(n);
    const double a = rng.uniform(0.1, 10.0) * (rng.uniform() < 0.5 ? -1 : 1), b = rng.uniform(-100, 100);
    for (int i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = 0.5 * x[i] + rng.normal();
      z[i] = a * x[i] + b;
    }
    const auto r1 = pearson(x, y), r2 = pearson(z, y);
    ok = ok && r1 && r2;
    if (r1 && r2) worst_affine = std::max(worst_affine, std::abs(*r2 - (a > 0 ? 1 : -1) * *r1));
  }
  ok = ok && worst_affine <= 1e-12;
  parts.push_back(fmt::format("pearson affine invariance {:.1e}", worst_affine));

  bool conserved = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng.below(500));
    for (auto& x : v) x = 20.0 * rng.normal();
    const auto h = histogram(v, 2.0);
    conserved = conserved && h.total() == static_cast<std::int64_t>(v.size());
  }
  ok = ok && conserved;
  parts.push_back(conserved ? "histogram counts conserved" : "histogram counts NOT conserved");

  // Hand-computed smoothing and binning.
  const std::vector<double> five{1, 2, 3, 4, 5};
  const auto s2 = smooth_centered(five, 2);
  bool hand = s2 == std::vector<double>{1.0, 1.5, 2.5, 3.5, 4.5};
  std::vector<double> spike(200, 0.0);
  spike[100] = 40.0;
  const auto s40 = smooth_centered(spike, 40);
  for (int i = 0; i < 200; ++i) hand = hand && s40[i] == ((i >= 81 && i <= 120) ? 1.0 : 0.0);
  const std::vector<double> vals{-0.5, 0.0, 1.99, 2.0, 3.9, 4.0, -2.0};
  const auto h = histogram(vals, 2.0);
  hand = hand && h.first_bin == -1 && h.counts == std::vector<std::int64_t>{2, 2, 2, 1};
  ok = ok && hand;
  parts.push_back(hand ? "40-day smoothing and 2 bps bins match hand cases" : "hand cases WRONG");

  // 500 x 252 dataset, streamed so that memory stays at one day of bars.
  SynthConfig big;
  big.n_symbols = 520;
  big.n_days = 504;
  big.seed = 9;
  const StreamingSource src(big);
  const DollarVolumeIndex index(src, false);
  const auto dates = src.dates();
  const std::vector<Date> period(dates.end() - 252, dates.end());
  std::int64_t rows = 0;
  int full_days = 0;
  for (Date d : period) {
    const auto u = select_universe(index, d, 500);
    full_days += u.symbols.size() == 500;
    const auto ds = build_dataset(std::span(&d, 1), src, {{d, u}}, Hyperparams{-5, 2}, Direction::Up);
    rows += static_cast<std::int64_t>(ds.data.rows());
    const auto last = ds.data.observations.cols() - 1;
    for (Eigen::Index i = 0; i < ds.data.observations.rows(); ++i) {
      anchored_rows += ds.data.observations(i, last) == 0.0;
    }
  }
  ok = ok && rows == 126000 && full_days == 252 && anchored_rows == rows;
  parts.push_back(fmt::format("{} rows from {} days of a 500-symbol universe ({} generator passes)", rows,
                              period.size(), src.passes()));
  return {ok, fmt::format("{}", fmt::join(parts, "; "))};
}

// ---------------------------------------------------------------------------------------
// Determinism through the command line

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome criterion_determinism(const std::string& cli, const fs::path& work) {
  const auto dir = work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "synth.cfg") << "n_symbols = 10\nn_days = 580\nseed = 21\nidio_vol_bps = 2\n"
                                      "regime = 2001-01-01, 2003-12-31, 20, 120\n";
  std::ofstream(dir / "exp.cfg") << "start_date = 2001-01-02\nend_date = 2003-03-31\nfirst_test_month = 2003-02\n"
                                    "learners = neural, logistic, random\nuniverse.size = 10\nseed = 5\n"
                                    "split_date = 2003-02-28\nnn.hidden = 32, 8\nnn.max_epochs = 8\n"
                                    "lr.max_iters = 150\nstore = store\n";
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  if (shell(fmt::format("{} -q synth --config {} --store {} > /dev/null", cli, q(dir / "synth.cfg"),
                        q(dir / "store"))) != 0) {
    return {false, "synth failed"};
  }
  for (const char* out : {"a", "b"}) {
    note(fmt::format("determinism run {}", out));
    if (shell(fmt::format("{} -q run --config {} --out {} > {}", cli, q(dir / "exp.cfg"), q(dir / out),
                          q(dir / fmt::format("{}.log", out)))) != 0) {
      return {false, fmt::format("run {} failed", out)};
    }
  }
  std::set<std::string> names;
  for (const auto* out : {"a", "b"}) {
    for (const auto& e : fs::directory_iterator(dir / out)) names.insert(e.path().filename().string());
  }
  int identical = 0;
  std::int64_t bytes = 0;
  std::vector<std::string> differing;
  for (const auto& n : names) {
    const auto a = slurp(dir / "a" / n), b = slurp(dir / "b" / n);
    if (a == b && fs::exists(dir / "a" / n) && fs::exists(dir / "b" / n)) {
      ++identical;
      bytes += static_cast<std::int64_t>(a.size());
    } else {
      differing.push_back(n);
    }
  }
  const bool stdout_same = slurp(dir / "a.log") == slurp(dir / "b.log");
  const bool traded = slurp(dir / "a" / "trades_neural.csv").size() > 100;
  return {differing.empty() && identical >= 9 && stdout_same && traded,
          differing.empty()
              ? fmt::format("{} output files ({} bytes) and the printed summary identical across two runs", identical,
                            bytes)
              : fmt::format("files differ: {}", fmt::join(differing, ", "))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli;
  std::string work = "acceptance_work";
  app.add_option("--cli", cli, "Path to the mkteff executable")->required();
  app.add_option("--work", work, "Scratch directory for stores and runs");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::err);
  fs::create_directories(work);

  std::map<int, Outcome> out;
  auto guarded = [&](int id, auto&& fn) {
    try {
      out[id] = fn();
    } catch (const std::exception& e) {
      out[id] = {false, fmt::format("exception: {}", e.what())};
    }
    fmt::print("  .. criterion {} {}\n", id, out[id].pass ? "passed" : "failed");
    std::fflush(stdout);
  };

  guarded(4, criterion_gradients);
  std::int64_t anchored = 0;
  guarded(8, [&] { return criterion_analytics(anchored); });
  guarded(7, criterion_lookahead);
  guarded(9, [&] { return criterion_determinism(cli, work); });

  std::vector<Run> runs;
  try {
    const auto null_store = ensure_store(fs::path(work) / "null", market(1, false));
    runs.push_back(run("null", null_store, experiment(1, ym(2004, 1))));
    const auto s1 = ensure_store(fs::path(work) / "seed1", market(1, true));
    runs.push_back(run("seed1", s1, experiment(1, ym(2004, 1))));
    for (std::uint64_t seed : {2, 3}) {
      const auto name = fmt::format("seed{}", seed);
      const auto store = ensure_store(fs::path(work) / name, market(seed, true));
      runs.push_back(run(name, store, experiment(seed, ym(2003, 7))));
    }
    guarded(1, [&] { return criterion_null(runs[0]); });
    guarded(2, [&] { return criterion_control({&runs[1], &runs[2], &runs[3]}); });
    guarded(3, [&] { return criterion_transition(runs[1]); });
  } catch (const std::exception& e) {
    for (int id : {1, 2, 3}) {
      if (!out.count(id)) out[id] = {false, fmt::format("experiment failed: {}", e.what())};
    }
  }
  std::vector<const Run*> all;
  for (const auto& r : runs) all.push_back(&r);
  guarded(5, [&] { return criterion_dataset(anchored); });
  guarded(6, [&] { return criterion_strategy(all); });

  bool ok = true;
  fmt::print("\n");
  for (const auto& [id, o] : out) {
    fmt::print("{} criterion {}: {}\n", o.pass ? "PASS" : "FAIL", id, o.detail);
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
