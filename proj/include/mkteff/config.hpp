#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "mkteff/synth.hpp"
#include "mkteff/walkforward.hpp"

namespace mkteff {

// Config files are `key = value` lines. `#` starts a comment, blank lines are ignored,
// keys may not repeat except `regime`. Errors carry the file name, line and key.
struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

struct KeyValueFile {
  std::string source;
  std::vector<KeyValue> entries;
};

KeyValueFile parse_key_values(std::istream& in, std::string source);
KeyValueFile read_key_values(const std::filesystem::path& path);

/// Experiment keys:
///   start_date, end_date                 YYYY-MM-DD (required)
///   first_test_month, last_test_month    YYYY-MM
///   learners                             comma list of neural, logistic, random
///   seed, workers
///   split_date                           YYYY-MM-DD, default 2008-09-30
///   universe.size, universe.window_years, universe.mode (daily|fixed)
///   grid.end_x, grid.bps                 comma lists
///   select.precision                     daily_mean|pooled
///   nn.hidden (comma list), nn.batch_size, nn.max_epochs, nn.patience, nn.min_delta
///   adam.step, adam.beta1, adam.beta2, adam.epsilon
///   lr.l2, lr.step, lr.max_iters, lr.tolerance
///   train.standardize                    true|false
///   strategy.pnl_relative                true|false
///   strategy.cost_bps_per_side
///   report.smooth_window, report.return_bin_bps, report.precision_bin
///   store, out, hft_file                 paths, relative to the config file
ExperimentConfig parse_experiment_config(const KeyValueFile& file);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Synthetic market keys:
///   n_symbols, start_date, n_days, seed, minutes
///   idio_vol_bps, market_vol_bps, overnight_vol_bps, price_min, price_max
///   volume_mean, volume_dispersion, volume_noise, zero_volume_prob
///   regime = from, to, strength_bps[, signal_window[, marked_fraction[, drift_start]]]   (repeatable)
SynthConfig parse_synth_config(const KeyValueFile& file);
SynthConfig load_synth_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const ExperimentConfig& config);
nlohmann::ordered_json to_json(const SynthConfig& config);

}  // namespace mkteff
