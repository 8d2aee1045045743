#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mkteff/bar_store.hpp"
#include "mkteff/common.hpp"

namespace mkteff {

struct UniverseDay;

enum class Direction : std::uint8_t { Up = 0, Down = 1 };

std::string_view to_string(Direction d);

/// One grid cell. `end_x` is the negative minute offset from the close of the last
/// observed minute; `bps` is the label threshold in hundredths of a percent.
struct Hyperparams {
  int end_x = -5;
  int bps = 2;

  /// Throws UsageError unless end_x < -1 and bps > 0.
  void validate() const;
  /// Observation width for a session of `minutes`.
  int width(int minutes = 390) const { return minutes + end_x; }
  /// 0-based index of the last observed minute.
  int last_observed(int minutes = 390) const { return minutes + end_x - 1; }
  /// Decision (entry) minute.
  int entry_minute(int minutes = 390) const { return minutes + end_x; }

  bool operator==(const Hyperparams&) const = default;
};

inline constexpr std::array<int, 3> kEndXGrid = {-5, -10, -30};
inline constexpr std::array<int, 4> kBpsGrid = {2, 5, 10, 25};

/// The 3 x 4 grid, end_x-major in the order above.
std::vector<Hyperparams> hyperparameter_grid();

/// Mean over symbols of each one-minute return; entry 0 is 0. Throws DataError on an empty universe.
std::vector<double> universe_mean_returns(const CloseRows& rows);

/// Universe-relative cumulative returns up to the last observed minute E:
///   out[k] = -[(C_sym(k->E) - 1) - (C_univ(k->E) - 1)]
/// where C(k->E) compounds one-minute gross returns over minutes k+1..E.
/// out has width minutes + end_x and out[E] is exactly zero.
void make_observation(std::span<const double> closes, std::span<const double> mean_returns, int end_x,
                      std::span<double> out);
std::vector<double> make_observation(std::span<const double> closes, std::span<const double> mean_returns, int end_x);

/// Universe-relative return from the close of the decision minute E+1 to the last close.
double forward_relative_return(std::span<const double> closes, std::span<const double> mean_returns, int end_x);

/// Strict threshold test: Up needs rel > bps/1e4, Down needs rel < -bps/1e4.
bool exceeds_threshold(double relative_return, int bps, Direction direction);

bool make_label(std::span<const double> closes, std::span<const double> mean_returns, int end_x, int bps,
                Direction direction);

/// One day's examples for a fixed end_x, in universe order.
struct DayExamples {
  Date date{};
  int end_x = 0;
  int minutes = 0;
  std::vector<std::string> symbols;
  Matrix observations;
  std::vector<double> forward_relative;
  std::vector<double> entry_price;  // close of the decision minute
  std::vector<double> exit_price;   // last close of the session
  std::int64_t excluded = 0;        // symbol-days dropped for nonpositive closes

  std::size_t rows() const { return symbols.size(); }
};

/// Builds observations and forward returns from universe-ordered closes. Rows with a
/// nonpositive close are excluded before the universe mean is taken.
DayExamples build_day_examples(const CloseRows& rows, int end_x, bool parallel = true);

/// Stacked examples over many days, date-major then universe rank.
struct Dataset {
  int end_x = 0;
  Matrix observations;
  std::vector<double> forward_relative;
  std::vector<Date> dates;
  std::vector<std::string> symbols;

  std::size_t rows() const { return dates.size(); }
};

Dataset stack_days(std::span<const DayExamples* const> days, int end_x);

std::vector<std::uint8_t> make_labels(std::span<const double> forward_relative, int bps, Direction direction);

struct LabeledDataset {
  Dataset data;
  Hyperparams hyperparams;
  Direction direction = Direction::Up;
  std::vector<std::uint8_t> labels;
};

struct DatasetStats {
  std::int64_t days = 0;
  std::int64_t missing_days = 0;
  std::int64_t untradable = 0;
  std::int64_t excluded = 0;
};

/// Examples for every (universe symbol, date) that has bars. Throws DataError for an empty period.
LabeledDataset build_dataset(std::span<const Date> dates, const BarSource& store,
                             const std::map<Date, UniverseDay>& universes, Hyperparams hyperparams,
                             Direction direction, DatasetStats* stats = nullptr);

// Debug dump layout (little-endian):
//   "MKTDSET\0", u8 version(1), 3 reserved, u64 rows, u32 cols, i32 end_x, i32 bps, u8 direction,
//   3 reserved, then rows*cols f64 observations, rows u8 labels, rows f64 forward returns.
void write_dataset_dump(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset read_dataset_dump(const std::filesystem::path& path);

}  // namespace mkteff
