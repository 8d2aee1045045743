#include "mkteff/kernels.hpp"

#include "mkteff/dataset.hpp"

namespace mkteff::kernels {

std::int64_t symbol_dollar_volume(const SymbolDay& s) {
  std::int64_t total = 0;
  for (int m = 0; m < s.minutes(); ++m) total += s.close[m] * s.volume[m];
  return total;
}

namespace {

void relative_row(const CloseRows& closes, std::span<const double> mean_returns, int end_x, RowOutputs& out,
                  std::size_t i) {
  const auto row = closes.row(i);
  auto dst = std::span<double>(out.observations.row(static_cast<Eigen::Index>(i)).data(),
                               static_cast<std::size_t>(out.observations.cols()));
  make_observation(row, mean_returns, end_x, dst);
  out.forward[i] = forward_relative_return(row, mean_returns, end_x);
}

}  // namespace

namespace serial {

BarBatch build_bars(std::span<const SymbolDayInput> inputs, const SessionSpec& session) {
  BarBatch batch;
  batch.bars.resize(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    batch.bars[i] = build_minute_bars(inputs[i].trades, session, inputs[i].prior_close, &batch.stats);
  }
  return batch;
}

std::vector<std::int64_t> dollar_volume(const DayBars& day) {
  std::vector<std::int64_t> out(day.symbols.size());
  for (std::size_t i = 0; i < day.symbols.size(); ++i) out[i] = symbol_dollar_volume(day.symbols[i]);
  return out;
}

void relative_rows(const CloseRows& closes, std::span<const double> mean_returns, int end_x, RowOutputs out) {
  for (std::size_t i = 0; i < closes.rows(); ++i) relative_row(closes, mean_returns, end_x, out, i);
}

}  // namespace serial

namespace parallel {

BarBatch build_bars(std::span<const SymbolDayInput> inputs, const SessionSpec& session) {
  BarBatch batch;
  batch.bars.resize(inputs.size());
  const auto n = static_cast<std::int64_t>(inputs.size());
  std::int64_t out_of_session = 0, untradable = 0, built = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : out_of_session, untradable, built)
  for (std::int64_t i = 0; i < n; ++i) {
    BarBuildStats local;
    batch.bars[i] = build_minute_bars(inputs[i].trades, session, inputs[i].prior_close, &local);
    out_of_session += local.out_of_session;
    untradable += local.untradable;
    built += local.built;
  }
  batch.stats = {out_of_session, untradable, built};
  return batch;
}

std::vector<std::int64_t> dollar_volume(const DayBars& day) {
  std::vector<std::int64_t> out(day.symbols.size());
  const auto n = static_cast<std::int64_t>(day.symbols.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = symbol_dollar_volume(day.symbols[i]);
  return out;
}

void relative_rows(const CloseRows& closes, std::span<const double> mean_returns, int end_x, RowOutputs out) {
  const auto n = static_cast<std::int64_t>(closes.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) relative_row(closes, mean_returns, end_x, out, static_cast<std::size_t>(i));
}

}  // namespace parallel

}  // namespace mkteff::kernels
