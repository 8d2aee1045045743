#pragma once

// Data-parallel inner loops of the pipeline. Each kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::parallel` with identical
// results: every output element is computed by one iteration with the same
// arithmetic, so there is no cross-thread reduction to reorder.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mkteff/bar_store.hpp"
#include "mkteff/bars.hpp"
#include "mkteff/common.hpp"

namespace mkteff::kernels {

struct SymbolDayInput {
  std::span<const TradeRecord> trades;  // one symbol-day, time-sorted
  std::optional<Price> prior_close;
};

struct BarBatch {
  std::vector<std::optional<SymbolDay>> bars;  // aligned with the inputs
  BarBuildStats stats;
};

/// Observation rows and forward relative returns for every row of `closes`.
/// `observations` must be rows x (minutes + end_x); `forward` must have one slot per row.
struct RowOutputs {
  Matrix& observations;
  std::span<double> forward;
};

namespace serial {
BarBatch build_bars(std::span<const SymbolDayInput> inputs, const SessionSpec& session);
std::vector<std::int64_t> dollar_volume(const DayBars& day);
void relative_rows(const CloseRows& closes, std::span<const double> mean_returns, int end_x, RowOutputs out);
}  // namespace serial

namespace parallel {
BarBatch build_bars(std::span<const SymbolDayInput> inputs, const SessionSpec& session);
std::vector<std::int64_t> dollar_volume(const DayBars& day);
void relative_rows(const CloseRows& closes, std::span<const double> mean_returns, int end_x, RowOutputs out);
}  // namespace parallel

/// Sum of close (in ten-thousandths) times volume over the session.
std::int64_t symbol_dollar_volume(const SymbolDay& s);

}  // namespace mkteff::kernels
