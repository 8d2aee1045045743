#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mkteff/bar_store.hpp"
#include "mkteff/bars.hpp"

namespace mkteff {

struct AssemblyStats {
  BarBuildStats bars;
  std::int64_t days = 0;
  std::int64_t partial_days = 0;  // skipped: no trade in the final 30 minutes of the session
};

inline constexpr int kPartialDayMinutes = 30;

/// Groups ingested trades (sorted by symbol, date, time) into one DayBars per date.
/// Prior closes come from earlier dates in the batch, then from `existing` if given.
std::vector<DayBars> assemble_days(std::span<const TradeRecord> trades, const SessionSpec& session,
                                   const BarSource* existing, AssemblyStats* stats = nullptr);

struct IngestSummary {
  IngestStats trades;
  AssemblyStats assembly;
  std::vector<std::string> malformed_examples;
};

/// Reads every file before writing anything, then writes one store file per date.
/// A missing or unreadable input is a DataError and leaves the store untouched.
IngestSummary ingest_files(std::span<const std::filesystem::path> inputs, const SymbolMap& map, const BarStore& store,
                           const SessionSpec& session = {});

}  // namespace mkteff
