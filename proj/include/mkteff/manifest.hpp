#pragma once

#include <filesystem>
#include <optional>

#include "json.hpp"
#include "mkteff/analytics.hpp"
#include "mkteff/walkforward.hpp"

namespace mkteff {

inline constexpr const char* kVersion = "0.1.0";

/// Config echo, per-month selections with every cell's scores and seeds, and data checksums.
nlohmann::ordered_json run_manifest(const ExperimentConfig& config, const ExperimentResult& result);

/// Writes trades_<learner>.csv, manifest.json and every report CSV into `dir`.
void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                       const ExperimentResult& result, const std::optional<HftSeries>& hft);

ReportOptions report_options(const ExperimentConfig& config, std::optional<HftSeries> hft);

}  // namespace mkteff
