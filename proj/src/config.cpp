#include "mkteff/config.hpp"

#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "text.hpp"

namespace mkteff {

KeyValueFile parse_key_values(std::istream& in, std::string source) {
  KeyValueFile file;
  file.source = std::move(source);
  std::string line;
  int line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = std::string_view(line);
    if (auto hash = t.find('#'); hash != std::string_view::npos) t = t.substr(0, hash);
    t = text::trim(t);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", file.source, line_no));
    }
    std::string key(text::trim(t.substr(0, eq)));
    std::string value(text::trim(t.substr(eq + 1)));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", file.source, line_no));
    if (key != "regime" && !seen.insert(key).second) {
      throw ConfigError(fmt::format("{}:{}: key '{}' repeated", file.source, line_no, key));
    }
    file.entries.push_back({std::move(key), std::move(value), line_no});
  }
  return file;
}

KeyValueFile read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  return parse_key_values(in, path.string());
}

namespace {

struct Context {
  const KeyValueFile* file;
  const KeyValue* entry;

  [[noreturn]] void fail(std::string_view why) const {
    throw ConfigError(fmt::format("{}:{}: key '{}': {}", file->source, entry->line, entry->key, why));
  }

  template <typename T>
  T number() const {
    const auto v = text::parse_number<T>(entry->value);
    if (!v) fail(fmt::format("'{}' is not a valid number", entry->value));
    return *v;
  }

  bool boolean() const {
    if (entry->value == "true" || entry->value == "1" || entry->value == "yes") return true;
    if (entry->value == "false" || entry->value == "0" || entry->value == "no") return false;
    fail("expected true or false");
  }

  Date date() const {
    try {
      return parse_date(entry->value);
    } catch (const UsageError&) {
      fail(fmt::format("'{}' is not a valid YYYY-MM-DD date", entry->value));
    }
  }

  YearMonth month() const {
    try {
      return parse_month(entry->value);
    } catch (const UsageError&) {
      fail(fmt::format("'{}' is not a valid YYYY-MM month", entry->value));
    }
  }

  std::vector<std::string_view> list() const {
    std::vector<std::string_view> out;
    for (auto f : text::split(entry->value, ',')) {
      f = text::trim(f);
      if (f.empty()) fail("empty list element");
      out.push_back(f);
    }
    return out;
  }

  std::vector<int> int_list() const {
    std::vector<int> out;
    for (auto f : list()) {
      const auto v = text::parse_number<int>(f);
      if (!v) fail(fmt::format("'{}' is not an integer", f));
      out.push_back(*v);
    }
    return out;
  }
};

using Handler = std::function<void(const Context&)>;

void dispatch(const KeyValueFile& file, const std::unordered_map<std::string, Handler>& handlers) {
  for (const auto& e : file.entries) {
    Context ctx{&file, &e};
    auto it = handlers.find(e.key);
    if (it == handlers.end()) ctx.fail("unknown key");
    it->second(ctx);
  }
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace

ExperimentConfig parse_experiment_config(const KeyValueFile& file) {
  ExperimentConfig c;
  bool have_start = false, have_end = false;
  auto& t = c.training;
  std::unordered_map<std::string, Handler> h = {
      {"start_date", [&](const Context& x) { c.start = x.date(); have_start = true; }},
      {"end_date", [&](const Context& x) { c.end = x.date(); have_end = true; }},
      {"first_test_month", [&](const Context& x) { c.first_test = x.month(); }},
      {"last_test_month", [&](const Context& x) { c.last_test = x.month(); }},
      {"learners",
       [&](const Context& x) {
         c.learners.clear();
         for (auto name : x.list()) {
           try {
             c.learners.push_back(parse_learner(name));
           } catch (const UsageError& e) {
             x.fail(e.what());
           }
         }
       }},
      {"seed", [&](const Context& x) { c.seed = x.number<std::uint64_t>(); }},
      {"workers", [&](const Context& x) { c.workers = x.number<int>(); }},
      {"split_date", [&](const Context& x) { c.split_date = x.date(); c.split_date_defaulted = false; }},
      {"universe.size", [&](const Context& x) { c.universe_size = x.number<int>(); }},
      {"universe.window_years", [&](const Context& x) { c.universe_window_years = x.number<int>(); }},
      {"universe.mode",
       [&](const Context& x) {
         if (x.entry->value == "daily") c.universe_mode = UniverseMode::Daily;
         else if (x.entry->value == "fixed") c.universe_mode = UniverseMode::Fixed;
         else x.fail("expected daily or fixed");
       }},
      {"grid.end_x", [&](const Context& x) { c.grid_end_x = x.int_list(); }},
      {"grid.bps", [&](const Context& x) { c.grid_bps = x.int_list(); }},
      {"select.precision",
       [&](const Context& x) {
         if (x.entry->value == "daily_mean") c.precision_mode = PrecisionMode::DailyMean;
         else if (x.entry->value == "pooled") c.precision_mode = PrecisionMode::Pooled;
         else x.fail("expected daily_mean or pooled");
       }},
      {"nn.hidden", [&](const Context& x) { t.hidden = x.int_list(); }},
      {"nn.batch_size", [&](const Context& x) { t.batch_size = x.number<int>(); }},
      {"nn.max_epochs", [&](const Context& x) { t.max_epochs = x.number<int>(); }},
      {"nn.patience", [&](const Context& x) { t.patience = x.number<int>(); }},
      {"nn.min_delta", [&](const Context& x) { t.min_delta = x.number<double>(); }},
      {"adam.step", [&](const Context& x) { t.adam.step = x.number<double>(); }},
      {"adam.beta1", [&](const Context& x) { t.adam.beta1 = x.number<double>(); }},
      {"adam.beta2", [&](const Context& x) { t.adam.beta2 = x.number<double>(); }},
      {"adam.epsilon", [&](const Context& x) { t.adam.epsilon = x.number<double>(); }},
      {"lr.l2", [&](const Context& x) { t.l2 = x.number<double>(); }},
      {"lr.step", [&](const Context& x) { t.logistic_step = x.number<double>(); }},
      {"lr.max_iters", [&](const Context& x) { t.logistic_max_iters = x.number<int>(); }},
      {"lr.tolerance", [&](const Context& x) { t.logistic_tolerance = x.number<double>(); }},
      {"train.standardize", [&](const Context& x) { t.standardize = x.boolean(); }},
      {"strategy.pnl_relative", [&](const Context& x) { c.strategy.pnl_relative = x.boolean(); }},
      {"strategy.cost_bps_per_side", [&](const Context& x) { c.strategy.cost_bps_per_side = x.number<double>(); }},
      {"report.smooth_window", [&](const Context& x) { c.smooth_window = x.number<int>(); }},
      {"report.return_bin_bps", [&](const Context& x) { c.return_bin_bps = x.number<double>(); }},
      {"report.precision_bin", [&](const Context& x) { c.precision_bin = x.number<double>(); }},
      {"store", [&](const Context& x) { c.store = x.entry->value; }},
      {"out", [&](const Context& x) { c.out = x.entry->value; }},
      {"hft_file", [&](const Context& x) { c.hft_file = x.entry->value; }},
  };
  dispatch(file, h);
  if (!have_start) throw ConfigError(fmt::format("{}: missing required key 'start_date'", file.source));
  if (!have_end) throw ConfigError(fmt::format("{}: missing required key 'end_date'", file.source));
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", file.source, e.what()));
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  auto c = parse_experiment_config(read_key_values(path));
  const auto base = path.parent_path();
  c.store = resolve(base, c.store);
  c.out = resolve(base, c.out);
  c.hft_file = resolve(base, c.hft_file);
  return c;
}

SynthConfig parse_synth_config(const KeyValueFile& file) {
  SynthConfig c;
  std::unordered_map<std::string, Handler> h = {
      {"n_symbols", [&](const Context& x) { c.n_symbols = x.number<int>(); }},
      {"start_date", [&](const Context& x) { c.start = x.date(); }},
      {"n_days", [&](const Context& x) { c.n_days = x.number<int>(); }},
      {"seed", [&](const Context& x) { c.seed = x.number<std::uint64_t>(); }},
      {"minutes", [&](const Context& x) { c.minutes = x.number<int>(); }},
      {"idio_vol_bps", [&](const Context& x) { c.idio_vol_bps = x.number<double>(); }},
      {"market_vol_bps", [&](const Context& x) { c.market_vol_bps = x.number<double>(); }},
      {"overnight_vol_bps", [&](const Context& x) { c.overnight_vol_bps = x.number<double>(); }},
      {"price_min", [&](const Context& x) { c.price_min = x.number<double>(); }},
      {"price_max", [&](const Context& x) { c.price_max = x.number<double>(); }},
      {"volume_mean", [&](const Context& x) { c.volume_mean = x.number<double>(); }},
      {"volume_dispersion", [&](const Context& x) { c.volume_dispersion = x.number<double>(); }},
      {"volume_noise", [&](const Context& x) { c.volume_noise = x.number<double>(); }},
      {"zero_volume_prob", [&](const Context& x) { c.zero_volume_prob = x.number<double>(); }},
      {"regime",
       [&](const Context& x) {
         const auto f = x.list();
         if (f.size() < 3 || f.size() > 6) {
           x.fail("expected from, to, strength_bps[, signal_window[, marked_fraction[, drift_start]]]");
         }
         Regime r;
         try {
           r.from = parse_date(f[0]);
           r.to = parse_date(f[1]);
         } catch (const UsageError&) {
           x.fail("bad regime date");
         }
         auto num = [&](std::string_view s) {
           const auto v = text::parse_number<double>(s);
           if (!v) x.fail(fmt::format("'{}' is not a number", s));
           return *v;
         };
         r.strength_bps = num(f[2]);
         if (f.size() > 3) r.signal_window = static_cast<int>(num(f[3]));
         if (f.size() > 4) r.marked_fraction = num(f[4]);
         if (f.size() > 5) r.drift_start = static_cast<int>(num(f[5]));
         c.regimes.push_back(r);
       }},
  };
  dispatch(file, h);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", file.source, e.what()));
  }
  return c;
}

SynthConfig load_synth_config(const std::filesystem::path& path) { return parse_synth_config(read_key_values(path)); }

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["start_date"] = format_date(c.start);
  j["end_date"] = format_date(c.end);
  j["first_test_month"] = format_month(c.first_test_month());
  j["last_test_month"] = format_month(c.last_test_month());
  auto& learners = j["learners"] = nlohmann::ordered_json::array();
  for (auto k : c.learners) learners.push_back(std::string(to_string(k)));
  j["seed"] = c.seed;
  j["split_date"] = format_date(c.split_date);
  j["split_date_defaulted"] = c.split_date_defaulted;
  j["universe"] = {{"size", c.universe_size},
                   {"window_years", c.universe_window_years},
                   {"mode", c.universe_mode == UniverseMode::Daily ? "daily" : "fixed"}};
  j["grid"] = {{"end_x", c.grid_end_x}, {"bps", c.grid_bps}};
  j["select"] = {{"precision", c.precision_mode == PrecisionMode::DailyMean ? "daily_mean" : "pooled"}};
  const auto& t = c.training;
  j["nn"] = {{"hidden", t.hidden},
             {"batch_size", t.batch_size},
             {"max_epochs", t.max_epochs},
             {"patience", t.patience},
             {"min_delta", t.min_delta}};
  j["adam"] = {{"step", t.adam.step}, {"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"epsilon", t.adam.epsilon}};
  j["lr"] = {{"l2", t.l2},
             {"step", t.logistic_step},
             {"max_iters", t.logistic_max_iters},
             {"tolerance", t.logistic_tolerance}};
  j["train"] = {{"standardize", t.standardize}};
  j["strategy"] = {{"pnl_relative", c.strategy.pnl_relative}, {"cost_bps_per_side", c.strategy.cost_bps_per_side}};
  j["report"] = {{"smooth_window", c.smooth_window},
                 {"return_bin_bps", c.return_bin_bps},
                 {"precision_bin", c.precision_bin}};
  return j;
}

nlohmann::ordered_json to_json(const SynthConfig& c) {
  nlohmann::ordered_json j;
  j["n_symbols"] = c.n_symbols;
  j["start_date"] = format_date(c.start);
  j["n_days"] = c.n_days;
  j["seed"] = c.seed;
  j["minutes"] = c.minutes;
  j["idio_vol_bps"] = c.idio_vol_bps;
  j["market_vol_bps"] = c.market_vol_bps;
  j["overnight_vol_bps"] = c.overnight_vol_bps;
  j["price_min"] = c.price_min;
  j["price_max"] = c.price_max;
  j["volume_mean"] = c.volume_mean;
  j["volume_dispersion"] = c.volume_dispersion;
  j["volume_noise"] = c.volume_noise;
  j["zero_volume_prob"] = c.zero_volume_prob;
  auto& regimes = j["regimes"] = nlohmann::ordered_json::array();
  for (const auto& r : c.regimes) {
    regimes.push_back({{"from", format_date(r.from)},
                       {"to", format_date(r.to)},
                       {"strength_bps", r.strength_bps},
                       {"signal_window", r.signal_window},
                       {"marked_fraction", r.marked_fraction},
                       {"drift_start", r.drift_start}});
  }
  return j;
}

}  // namespace mkteff
