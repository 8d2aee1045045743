#include "mkteff/bar_store.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mkteff/rng.hpp"

namespace mkteff {

static_assert(std::endian::native == std::endian::little, "bar files are little-endian");

namespace {

constexpr std::size_t kHeaderSize = 24;

template <typename T>
void put(std::vector<std::byte>& out, T value) {
  const auto* p = reinterpret_cast<const std::byte*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::byte> bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void put_column(std::vector<std::byte>& out, const std::vector<T>& col) {
  const auto* p = reinterpret_cast<const std::byte*>(col.data());
  out.insert(out.end(), p, p + col.size() * sizeof(T));
}

template <typename T>
void get_column(std::span<const std::byte> bytes, std::size_t offset, std::vector<T>& col) {
  std::memcpy(col.data(), bytes.data() + offset, col.size() * sizeof(T));
}

}  // namespace

std::vector<std::byte> encode_day(const DayBars& day) {
  for (std::size_t i = 1; i < day.symbols.size(); ++i) {
    if (!(day.symbols[i - 1].symbol < day.symbols[i].symbol)) {
      throw DataError(fmt::format("{}: symbols must be unique and sorted", format_date(day.date)));
    }
  }
  const std::size_t m = static_cast<std::size_t>(day.minutes);
  std::vector<std::byte> out;
  out.reserve(kHeaderSize + day.symbols.size() * (kSymbolWidth + 40 * m) + 8);
  for (char c : kBarMagic) out.push_back(static_cast<std::byte>(c));
  out.push_back(static_cast<std::byte>(kBarVersion));
  for (int i = 0; i < 3; ++i) out.push_back(std::byte{0});
  put<std::uint32_t>(out, static_cast<std::uint32_t>(day.minutes));
  put<std::int32_t>(out, day_number(day.date));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(day.symbols.size()));
  for (const auto& s : day.symbols) {
    if (s.symbol.empty() || s.symbol.size() >= kSymbolWidth) {
      throw DataError(fmt::format("symbol '{}' does not fit the directory", s.symbol));
    }
    char buf[kSymbolWidth] = {};
    std::memcpy(buf, s.symbol.data(), s.symbol.size());
    for (char c : buf) out.push_back(static_cast<std::byte>(c));
  }
  for (const auto& s : day.symbols) {
    if (static_cast<std::size_t>(s.minutes()) != m) {
      throw DataError(fmt::format("{} {}: expected {} bars", format_date(day.date), s.symbol, m));
    }
    put_column(out, s.open);
    put_column(out, s.high);
    put_column(out, s.low);
    put_column(out, s.close);
    put_column(out, s.volume);
  }
  put<std::uint64_t>(out, fnv1a(out));
  return out;
}

DayBars decode_day(std::span<const std::byte> bytes, const std::string& identity) {
  auto corrupt = [&](std::string_view what) { return DataError(fmt::format("corrupt bar file {}: {}", identity, what)); };
  if (bytes.size() < kHeaderSize + 8) throw corrupt("truncated header");
  if (std::memcmp(bytes.data(), kBarMagic, sizeof(kBarMagic)) != 0) throw corrupt("bad magic");
  if (static_cast<std::uint8_t>(bytes[8]) != kBarVersion) {
    throw corrupt(fmt::format("unsupported version {}", static_cast<int>(bytes[8])));
  }
  const auto stored = get<std::uint64_t>(bytes, bytes.size() - 8);
  if (fnv1a(bytes.first(bytes.size() - 8)) != stored) throw corrupt("checksum mismatch");

  DayBars day;
  day.minutes = static_cast<int>(get<std::uint32_t>(bytes, 12));
  day.date = from_day_number(get<std::int32_t>(bytes, 16));
  const auto count = get<std::uint32_t>(bytes, 20);
  const std::size_t m = static_cast<std::size_t>(day.minutes);
  if (day.minutes < 1 || bytes.size() != kHeaderSize + count * (kSymbolWidth + 40 * m) + 8) {
    throw corrupt("size does not match header");
  }
  day.symbols.reserve(count);
  std::size_t offset = kHeaderSize;
  for (std::uint32_t i = 0; i < count; ++i, offset += kSymbolWidth) {
    const char* p = reinterpret_cast<const char*>(bytes.data() + offset);
    day.symbols.emplace_back(std::string(p, strnlen(p, kSymbolWidth)), day.minutes);
  }
  for (auto& s : day.symbols) {
    get_column(bytes, offset, s.open);
    offset += 8 * m;
    get_column(bytes, offset, s.high);
    offset += 8 * m;
    get_column(bytes, offset, s.low);
    offset += 8 * m;
    get_column(bytes, offset, s.close);
    offset += 8 * m;
    get_column(bytes, offset, s.volume);
    offset += 8 * m;
  }
  return day;
}

// ---------------------------------------------------------------------------

BarStore::BarStore(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path BarStore::file_for(Date date) const { return root_ / (format_date(date) + ".bars"); }

std::vector<Date> BarStore::dates() const {
  std::vector<Date> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(root_, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".bars") continue;
    try {
      out.push_back(parse_date(entry.path().stem().string()));
    } catch (const UsageError&) {
      spdlog::warn("ignoring unexpected file {} in bar store", entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::shared_ptr<const DayBars> BarStore::day(Date date) const {
  const auto path = file_for(date);
  std::ifstream in(path, std::ios::binary);
  if (!in) return nullptr;
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw DataError(fmt::format("cannot read bar file {}", path.string()));
  }
  auto decoded = std::make_shared<DayBars>(decode_day(bytes, path.string()));
  if (decoded->date != date) {
    throw DataError(fmt::format("corrupt bar file {}: header date {}", path.string(), format_date(decoded->date)));
  }
  return decoded;
}

void BarStore::write(const DayBars& day) const {
  std::filesystem::create_directories(root_);
  const auto bytes = encode_day(day);
  const auto path = file_for(day.date);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write {}", tmp.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError(fmt::format("write failed for {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

void MemoryBarSource::put(DayBars day) {
  std::sort(day.symbols.begin(), day.symbols.end(),
            [](const SymbolDay& a, const SymbolDay& b) { return a.symbol < b.symbol; });
  const Date d = day.date;
  days_[d] = std::make_shared<const DayBars>(std::move(day));
}

std::vector<Date> MemoryBarSource::dates() const {
  std::vector<Date> out;
  out.reserve(days_.size());
  for (const auto& [d, _] : days_) out.push_back(d);
  return out;
}

std::shared_ptr<const DayBars> MemoryBarSource::day(Date date) const {
  auto it = days_.find(date);
  return it == days_.end() ? nullptr : it->second;
}

void store_bars(const BarStore& store, const DayBars& day) { store.write(day); }

DayBars load_bars(const BarSource& store, Date date, std::span<const std::string> symbols) {
  DayBars out;
  out.date = date;
  const auto day = store.day(date);
  if (!day) {
    spdlog::warn("no bars stored for {}", format_date(date));
    return out;
  }
  out.minutes = day->minutes;
  for (const auto& sym : symbols) {
    if (const auto* s = day->find(sym)) out.symbols.push_back(*s);
  }
  std::sort(out.symbols.begin(), out.symbols.end(),
            [](const SymbolDay& a, const SymbolDay& b) { return a.symbol < b.symbol; });
  return out;
}

CloseRows load_closes(const BarSource& store, Date date, std::span<const std::string> symbols) {
  CloseRows out;
  out.date = date;
  const auto day = store.day(date);
  if (!day) {
    spdlog::warn("no bars stored for {}", format_date(date));
    return out;
  }
  out.minutes = day->minutes;
  for (const auto& sym : symbols) {
    const auto* s = day->find(sym);
    if (!s) continue;
    out.symbols.push_back(sym);
    for (auto c : s->close) out.closes.push_back(to_double(c));
  }
  return out;
}

std::optional<Price> prior_close(const BarSource& store, Date date, const std::string& symbol, int lookback) {
  const auto dates = store.dates();
  auto it = std::lower_bound(dates.begin(), dates.end(), date);
  for (int i = 0; i < lookback && it != dates.begin(); ++i) {
    --it;
    const auto day = store.day(*it);
    if (!day) continue;
    if (const auto* s = day->find(symbol)) return s->close.back();
  }
  return std::nullopt;
}

}  // namespace mkteff
