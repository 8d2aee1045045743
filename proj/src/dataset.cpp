#include "mkteff/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "mkteff/kernels.hpp"
#include "mkteff/universe.hpp"

namespace mkteff {

std::string_view to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

void Hyperparams::validate() const {
  if (end_x >= -1) throw UsageError(fmt::format("end_x must be < -1 (got {})", end_x));
  if (bps <= 0) throw UsageError(fmt::format("bps threshold must be > 0 (got {})", bps));
}

std::vector<Hyperparams> hyperparameter_grid() {
  std::vector<Hyperparams> grid;
  for (int e : kEndXGrid)
    for (int b : kBpsGrid) grid.push_back({e, b});
  return grid;
}

std::vector<double> universe_mean_returns(const CloseRows& rows) {
  if (rows.rows() == 0) throw DataError(fmt::format("{}: empty universe", format_date(rows.date)));
  const int m_count = rows.minutes;
  std::vector<double> mean(static_cast<std::size_t>(m_count), 0.0);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto c = rows.row(i);
    for (int m = 1; m < m_count; ++m) mean[m] += c[m] / c[m - 1] - 1.0;
  }
  const double n = static_cast<double>(rows.rows());
  for (int m = 1; m < m_count; ++m) mean[m] /= n;
  return mean;
}

namespace {

void check_closes(std::span<const double> closes, std::span<const double> mean_returns, int end_x) {
  const int minutes = static_cast<int>(closes.size());
  if (mean_returns.size() != closes.size()) throw DataError("close and universe return lengths differ");
  if (minutes + end_x < 1 || end_x > -1) {
    throw UsageError(fmt::format("end_x {} does not fit a {}-minute session", end_x, minutes));
  }
  for (double c : closes) {
    if (!(c > 0.0)) throw DataError("nonpositive close");
  }
}

}  // namespace

void make_observation(std::span<const double> closes, std::span<const double> mean_returns, int end_x,
                      std::span<double> out) {
  check_closes(closes, mean_returns, end_x);
  const int last = static_cast<int>(closes.size()) + end_x - 1;
  if (out.size() != static_cast<std::size_t>(last + 1)) throw UsageError("observation buffer has the wrong width");
  // Backward running products of one-minute gross returns from E down to k.
  double sym = 1.0;
  double uni = 1.0;
  out[last] = 0.0;
  for (int k = last - 1; k >= 0; --k) {
    sym *= closes[k + 1] / closes[k];
    uni *= 1.0 + mean_returns[k + 1];
    out[k] = -((sym - 1.0) - (uni - 1.0));
  }
}

std::vector<double> make_observation(std::span<const double> closes, std::span<const double> mean_returns,
                                     int end_x) {
  std::vector<double> out(closes.size() + end_x);
  make_observation(closes, mean_returns, end_x, out);
  return out;
}

double forward_relative_return(std::span<const double> closes, std::span<const double> mean_returns, int end_x) {
  check_closes(closes, mean_returns, end_x);
  const int minutes = static_cast<int>(closes.size());
  const int entry = minutes + end_x;
  double sym = 1.0;
  double uni = 1.0;
  for (int m = entry + 1; m < minutes; ++m) {
    sym *= closes[m] / closes[m - 1];
    uni *= 1.0 + mean_returns[m];
  }
  return (sym - 1.0) - (uni - 1.0);
}

bool exceeds_threshold(double relative_return, int bps, Direction direction) {
  const double threshold = static_cast<double>(bps) / 10000.0;
  return direction == Direction::Up ? relative_return > threshold : relative_return < -threshold;
}

bool make_label(std::span<const double> closes, std::span<const double> mean_returns, int end_x, int bps,
                Direction direction) {
  return exceeds_threshold(forward_relative_return(closes, mean_returns, end_x), bps, direction);
}

DayExamples build_day_examples(const CloseRows& rows, int end_x, bool parallel) {
  DayExamples out;
  out.date = rows.date;
  out.end_x = end_x;
  out.minutes = rows.minutes;

  CloseRows valid;
  valid.date = rows.date;
  valid.minutes = rows.minutes;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto r = rows.row(i);
    if (std::all_of(r.begin(), r.end(), [](double c) { return c > 0.0; })) {
      valid.symbols.push_back(rows.symbols[i]);
      valid.closes.insert(valid.closes.end(), r.begin(), r.end());
    } else {
      ++out.excluded;
    }
  }
  if (valid.rows() == 0) return out;
  if (valid.minutes + end_x < 2) {
    throw UsageError(fmt::format("end_x {} leaves no decision minute in a {}-minute session", end_x, valid.minutes));
  }

  const auto mean = universe_mean_returns(valid);
  const auto n = valid.rows();
  out.symbols = valid.symbols;
  out.observations.resize(static_cast<Eigen::Index>(n), valid.minutes + end_x);
  out.forward_relative.resize(n);
  kernels::RowOutputs dst{out.observations, out.forward_relative};
  if (parallel) {
    kernels::parallel::relative_rows(valid, mean, end_x, dst);
  } else {
    kernels::serial::relative_rows(valid, mean, end_x, dst);
  }
  const int entry = valid.minutes + end_x;
  out.entry_price.resize(n);
  out.exit_price.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = valid.row(i);
    out.entry_price[i] = r[entry];
    out.exit_price[i] = r.back();
  }
  return out;
}

Dataset stack_days(std::span<const DayExamples* const> days, int end_x) {
  Dataset ds;
  ds.end_x = end_x;
  std::size_t rows = 0;
  Eigen::Index width = -1;
  for (const auto* d : days) {
    rows += d->rows();
    if (d->rows() > 0) {
      if (width >= 0 && d->observations.cols() != width) throw DataError("mixed observation widths");
      width = d->observations.cols();
    }
  }
  ds.observations.resize(static_cast<Eigen::Index>(rows), std::max<Eigen::Index>(width, 0));
  ds.forward_relative.reserve(rows);
  ds.dates.reserve(rows);
  ds.symbols.reserve(rows);
  Eigen::Index r = 0;
  for (const auto* d : days) {
    if (d->rows() == 0) continue;
    ds.observations.middleRows(r, static_cast<Eigen::Index>(d->rows())) = d->observations;
    r += static_cast<Eigen::Index>(d->rows());
    ds.forward_relative.insert(ds.forward_relative.end(), d->forward_relative.begin(), d->forward_relative.end());
    ds.dates.insert(ds.dates.end(), d->rows(), d->date);
    ds.symbols.insert(ds.symbols.end(), d->symbols.begin(), d->symbols.end());
  }
  return ds;
}

std::vector<std::uint8_t> make_labels(std::span<const double> forward_relative, int bps, Direction direction) {
  std::vector<std::uint8_t> labels(forward_relative.size());
  for (std::size_t i = 0; i < forward_relative.size(); ++i) {
    labels[i] = exceeds_threshold(forward_relative[i], bps, direction) ? 1 : 0;
  }
  return labels;
}

LabeledDataset build_dataset(std::span<const Date> dates, const BarSource& store,
                             const std::map<Date, UniverseDay>& universes, Hyperparams hyperparams,
                             Direction direction, DatasetStats* stats) {
  hyperparams.validate();
  if (dates.empty()) throw DataError("empty period");
  std::vector<DayExamples> days;
  days.reserve(dates.size());
  DatasetStats local;
  for (Date d : dates) {
    auto it = universes.find(d);
    if (it == universes.end()) throw DataError(fmt::format("no universe for {}", format_date(d)));
    const auto closes = load_closes(store, d, it->second.symbols);
    ++local.days;
    if (closes.minutes == 0) {
      ++local.missing_days;
      continue;
    }
    local.untradable += static_cast<std::int64_t>(it->second.symbols.size() - closes.rows());
    days.push_back(build_day_examples(closes, hyperparams.end_x));
    local.excluded += days.back().excluded;
  }
  std::vector<const DayExamples*> ptrs;
  for (const auto& d : days) ptrs.push_back(&d);
  LabeledDataset out;
  out.data = stack_days(ptrs, hyperparams.end_x);
  out.hyperparams = hyperparams;
  out.direction = direction;
  out.labels = make_labels(out.data.forward_relative, hyperparams.bps, direction);
  if (stats) *stats = local;
  return out;
}

namespace {

constexpr char kDumpMagic[8] = {'M', 'K', 'T', 'D', 'S', 'E', 'T', '\0'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void write_dataset_dump(const std::filesystem::path& path, const LabeledDataset& ds) {
  const auto rows = static_cast<std::size_t>(ds.data.observations.rows());
  if (ds.labels.size() != rows || ds.data.forward_relative.size() != rows) {
    throw UsageError(fmt::format("dataset dump: {} observation rows, {} labels, {} forward returns", rows,
                                 ds.labels.size(), ds.data.forward_relative.size()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out.write(kDumpMagic, sizeof(kDumpMagic));
  write_pod<std::uint8_t>(out, 1);
  for (int i = 0; i < 3; ++i) write_pod<std::uint8_t>(out, 0);
  write_pod<std::uint64_t>(out, rows);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ds.data.observations.cols()));
  write_pod<std::int32_t>(out, ds.hyperparams.end_x);
  write_pod<std::int32_t>(out, ds.hyperparams.bps);
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(ds.direction));
  for (int i = 0; i < 3; ++i) write_pod<std::uint8_t>(out, 0);
  out.write(reinterpret_cast<const char*>(ds.data.observations.data()),
            static_cast<std::streamsize>(ds.data.observations.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(ds.labels.data()), static_cast<std::streamsize>(ds.labels.size()));
  out.write(reinterpret_cast<const char*>(ds.data.forward_relative.data()),
            static_cast<std::streamsize>(ds.data.forward_relative.size() * sizeof(double)));
  if (!out) throw DataError(fmt::format("write failed for {}", path.string()));
}

LabeledDataset read_dataset_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kDumpMagic, sizeof(magic)) != 0) {
    throw DataError(fmt::format("{}: not a dataset dump", path.string()));
  }
  if (read_pod<std::uint8_t>(in) != 1) throw DataError(fmt::format("{}: unsupported version", path.string()));
  in.ignore(3);
  LabeledDataset ds;
  const auto rows = read_pod<std::uint64_t>(in);
  const auto cols = read_pod<std::uint32_t>(in);
  ds.hyperparams.end_x = read_pod<std::int32_t>(in);
  ds.hyperparams.bps = read_pod<std::int32_t>(in);
  ds.direction = static_cast<Direction>(read_pod<std::uint8_t>(in));
  in.ignore(3);
  ds.data.end_x = ds.hyperparams.end_x;
  const auto expected = 36 + rows * (cols * sizeof(double) + 1 + sizeof(double));
  if (std::filesystem::file_size(path) != expected) {
    throw DataError(fmt::format("{}: size does not match {} x {} header", path.string(), rows, cols));
  }
  ds.data.observations.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(ds.data.observations.data()),
          static_cast<std::streamsize>(ds.data.observations.size() * sizeof(double)));
  ds.labels.resize(rows);
  in.read(reinterpret_cast<char*>(ds.labels.data()), static_cast<std::streamsize>(rows));
  ds.data.forward_relative.resize(rows);
  in.read(reinterpret_cast<char*>(ds.data.forward_relative.data()), static_cast<std::streamsize>(rows * sizeof(double)));
  if (!in) throw DataError(fmt::format("{}: truncated dataset dump", path.string()));
  return ds;
}

}  // namespace mkteff
