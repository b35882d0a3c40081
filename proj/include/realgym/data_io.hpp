#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "realgym/errors.hpp"
#include "realgym/rng.hpp"

namespace realgym {

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerMinute = 60;

struct DailySeries {
  std::vector<double> values;
  std::chrono::sys_days start_day{};
  std::string label;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

struct HourlySeries {
  std::vector<double> values;
  std::int64_t start_timestamp = 0;
  std::string label;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  std::int64_t timestamp(std::size_t i) const noexcept {
    return start_timestamp + static_cast<std::int64_t>(i) * kSecondsPerHour;
  }
};

/// Bid/ask quotes keyed by epoch seconds. Trading-session times are read
/// from the time of day of each timestamp, so files are expected to carry
/// exchange-local wall-clock time encoded as epoch seconds.
struct MinuteBarSeries {
  std::vector<std::int64_t> timestamps;
  std::vector<double> bid;
  std::vector<double> ask;

  std::size_t size() const noexcept { return timestamps.size(); }
  bool empty() const noexcept { return timestamps.empty(); }

  void push_back(std::int64_t ts, double b, double a) {
    timestamps.push_back(ts);
    bid.push_back(b);
    ask.push_back(a);
  }

  friend bool operator==(const MinuteBarSeries&, const MinuteBarSeries&) = default;
};

inline std::int64_t day_of(std::int64_t timestamp) noexcept {
  return timestamp >= 0 ? timestamp / kSecondsPerDay
                        : -((-timestamp + kSecondsPerDay - 1) / kSecondsPerDay);
}

inline std::int64_t seconds_into_day(std::int64_t timestamp) noexcept {
  return timestamp - day_of(timestamp) * kSecondsPerDay;
}

// ---------------------------------------------------------------------------
// CSV loading

enum class SeriesKind { daily, hourly, minute_bars };

struct CsvSchema {
  SeriesKind kind;
  // Name of the value column (daily and hourly files). Ignored for bars.
  std::string label;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

inline double parse_real(std::string_view cell, std::size_t line) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw ParseError("not a number: '" + std::string(cell) + "'", line);
  return v;
}

inline std::int64_t parse_int(std::string_view cell, std::size_t line) {
  std::int64_t v = 0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("not an integer: '" + std::string(cell) + "'", line);
  return v;
}

inline std::chrono::sys_days parse_date(std::string_view cell, std::size_t line) {
  // YYYY-MM-DD
  if (cell.size() != 10 || cell[4] != '-' || cell[7] != '-')
    throw ParseError("not an ISO-8601 date: '" + std::string(cell) + "'", line);
  const auto y = parse_int(cell.substr(0, 4), line);
  const auto m = parse_int(cell.substr(5, 2), line);
  const auto d = parse_int(cell.substr(8, 2), line);
  const std::chrono::year_month_day ymd{std::chrono::year(static_cast<int>(y)),
                                        std::chrono::month(static_cast<unsigned>(m)),
                                        std::chrono::day(static_cast<unsigned>(d))};
  if (!ymd.ok()) throw ParseError("invalid calendar date: '" + std::string(cell) + "'", line);
  return std::chrono::sys_days(ymd);
}

struct CsvRows {
  std::vector<std::string> header;
  // (line number, cells)
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

inline CsvRows read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvRows out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    for (auto c : split_commas(line)) cells.emplace_back(c);
    if (!have_header) {
      out.header = std::move(cells);
      have_header = true;
    } else {
      out.rows.emplace_back(line_no, std::move(cells));
    }
  }
  if (!have_header) throw SchemaError("'" + path + "': missing header row");
  return out;
}

inline void expect_header(const CsvRows& csv, const std::vector<std::string>& expected,
                          const std::string& path) {
  if (csv.header != expected) {
    std::string want, got;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    for (const auto& h : csv.header) got += (got.empty() ? "" : ",") + h;
    throw SchemaError("'" + path + "': header '" + got + "' does not match schema '" + want + "'");
  }
}

inline void expect_columns(const std::vector<std::string>& cells, std::size_t n, std::size_t line) {
  if (cells.size() != n)
    throw ParseError("expected " + std::to_string(n) + " columns, found " +
                         std::to_string(cells.size()),
                     line);
}

}  // namespace detail

/// Daily file: header "date,<label>", one consecutive ISO date per row.
inline DailySeries load_daily_csv(const std::string& path, const std::string& label) {
  const auto csv = detail::read_csv(path);
  detail::expect_header(csv, {"date", label}, path);
  DailySeries out;
  out.label = label;
  std::chrono::sys_days prev{};
  for (const auto& [line, cells] : csv.rows) {
    detail::expect_columns(cells, 2, line);
    const auto day = detail::parse_date(cells[0], line);
    const double v = detail::parse_real(cells[1], line);
    if (out.values.empty()) {
      out.start_day = day;
    } else if (day - prev != std::chrono::days(1)) {
      throw SchemaError("'" + path + "' line " + std::to_string(line) +
                        ": dates must be consecutive days");
    }
    prev = day;
    out.values.push_back(v);
  }
  if (out.values.empty()) throw DataError("'" + path + "': no data rows");
  return out;
}

/// Hourly file: header "timestamp,<label>", epoch seconds at uniform 3600 s spacing.
inline HourlySeries load_hourly_csv(const std::string& path, const std::string& label) {
  const auto csv = detail::read_csv(path);
  detail::expect_header(csv, {"timestamp", label}, path);
  const bool is_price = label.rfind("price", 0) == 0;
  HourlySeries out;
  out.label = label;
  std::int64_t prev = 0;
  for (const auto& [line, cells] : csv.rows) {
    detail::expect_columns(cells, 2, line);
    const auto ts = detail::parse_int(cells[0], line);
    const double v = detail::parse_real(cells[1], line);
    if (out.values.empty()) {
      out.start_timestamp = ts;
    } else if (ts - prev != kSecondsPerHour) {
      throw SchemaError("'" + path + "' line " + std::to_string(line) +
                        ": hourly rows must be spaced exactly 3600 s apart");
    }
    if (is_price && v < 0.0)
      throw SchemaError("'" + path + "' line " + std::to_string(line) + ": negative price");
    prev = ts;
    out.values.push_back(v);
  }
  if (out.values.empty()) throw DataError("'" + path + "': no data rows");
  return out;
}

/// Quote file: header "timestamp,bid,ask", strictly increasing epoch seconds.
inline MinuteBarSeries load_minute_bars_csv(const std::string& path) {
  const auto csv = detail::read_csv(path);
  detail::expect_header(csv, {"timestamp", "bid", "ask"}, path);
  MinuteBarSeries out;
  for (const auto& [line, cells] : csv.rows) {
    detail::expect_columns(cells, 3, line);
    const auto ts = detail::parse_int(cells[0], line);
    const double bid = detail::parse_real(cells[1], line);
    const double ask = detail::parse_real(cells[2], line);
    if (!out.empty() && ts <= out.timestamps.back())
      throw SchemaError("'" + path + "' line " + std::to_string(line) +
                        ": timestamps must be strictly increasing");
    if (ask < bid)
      throw SchemaError("'" + path + "' line " + std::to_string(line) + ": ask below bid");
    out.push_back(ts, bid, ask);
  }
  if (out.empty()) throw DataError("'" + path + "': no data rows");
  return out;
}

using AnySeries = std::variant<DailySeries, HourlySeries, MinuteBarSeries>;

inline AnySeries load_csv(const std::string& path, const CsvSchema& schema) {
  switch (schema.kind) {
    case SeriesKind::daily: return load_daily_csv(path, schema.label);
    case SeriesKind::hourly: return load_hourly_csv(path, schema.label);
    case SeriesKind::minute_bars: return load_minute_bars_csv(path);
  }
  throw UsageError("load_csv: unknown schema kind");
}

/// Day-of-year profile: header "day,<label>", rows for days 1..366 in order.
/// Used for optional minimum-release and evaporation tables.
inline std::vector<double> load_day_of_year_csv(const std::string& path, const std::string& label) {
  const auto csv = detail::read_csv(path);
  detail::expect_header(csv, {"day", label}, path);
  std::vector<double> out;
  for (const auto& [line, cells] : csv.rows) {
    detail::expect_columns(cells, 2, line);
    const auto day = detail::parse_int(cells[0], line);
    if (day != static_cast<std::int64_t>(out.size()) + 1)
      throw SchemaError("'" + path + "' line " + std::to_string(line) +
                        ": expected day " + std::to_string(out.size() + 1));
    out.push_back(detail::parse_real(cells[1], line));
  }
  if (out.size() != 366)
    throw SchemaError("'" + path + "': expected 366 day-of-year rows, found " +
                      std::to_string(out.size()));
  return out;
}

/// Splits a daily series into whole periods (years by default), the first
/// round(fraction * periods) going to training.
inline std::pair<DailySeries, DailySeries> train_test_split(const DailySeries& s,
                                                            double train_fraction = 0.8,
                                                            std::size_t period = 365) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw UsageError("train_test_split: fraction must be in (0, 1)");
  const std::size_t periods = s.size() / period;
  if (periods < 2) throw DataError("train_test_split: need at least two whole periods");
  auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(periods)));
  n_train = std::clamp<std::size_t>(n_train, 1, periods - 1);
  const auto cut = n_train * period;
  DailySeries train{{s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(cut)},
                    s.start_day, s.label};
  DailySeries test{{s.values.begin() + static_cast<std::ptrdiff_t>(cut),
                    s.values.begin() + static_cast<std::ptrdiff_t>(periods * period)},
                   s.start_day + std::chrono::days(static_cast<long>(cut)), s.label};
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Tick preprocessing

/// Collapses raw quotes onto a one-minute grid, keeping the last quote seen
/// within each minute.
inline MinuteBarSeries resample_to_minutes(const MinuteBarSeries& ticks) {
  MinuteBarSeries out;
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const auto ts = ticks.timestamps[i];
    const auto minute = ts - (((ts % kSecondsPerMinute) + kSecondsPerMinute) % kSecondsPerMinute);
    if (!out.empty() && out.timestamps.back() == minute) {
      out.bid.back() = ticks.bid[i];
      out.ask.back() = ticks.ask[i];
    } else {
      out.push_back(minute, ticks.bid[i], ticks.ask[i]);
    }
  }
  return out;
}

struct PreprocessReport {
  std::vector<std::int64_t> kept_days;     // epoch day numbers
  std::vector<std::int64_t> removed_days;
  std::size_t filled_minutes = 0;
};

/// Forward-fills gaps of at most max_gap_minutes missing bars inside a day
/// and drops every day containing a wider gap. Input must be minute-aligned
/// and strictly increasing.
inline MinuteBarSeries preprocess_ticks(const MinuteBarSeries& raw, int max_gap_minutes = 5,
                                        PreprocessReport* report = nullptr) {
  if (raw.empty()) throw DataError("preprocess_ticks: empty input");
  if (max_gap_minutes < 0) throw UsageError("preprocess_ticks: max_gap_minutes must be >= 0");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.timestamps[i] % kSecondsPerMinute != 0)
      throw DataError("preprocess_ticks: timestamps must be minute-aligned (resample first)");
    if (i > 0 && raw.timestamps[i] <= raw.timestamps[i - 1])
      throw DataError("preprocess_ticks: timestamps must be strictly increasing");
  }

  MinuteBarSeries out;
  PreprocessReport local;
  std::size_t begin = 0;
  while (begin < raw.size()) {
    const auto day = day_of(raw.timestamps[begin]);
    std::size_t end = begin;
    while (end < raw.size() && day_of(raw.timestamps[end]) == day) ++end;

    bool keep = true;
    for (std::size_t i = begin + 1; i < end; ++i) {
      const auto missing = (raw.timestamps[i] - raw.timestamps[i - 1]) / kSecondsPerMinute - 1;
      if (missing > max_gap_minutes) {
        keep = false;
        break;
      }
    }
    if (keep) {
      for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) {
          for (auto ts = raw.timestamps[i - 1] + kSecondsPerMinute; ts < raw.timestamps[i];
               ts += kSecondsPerMinute) {
            out.push_back(ts, raw.bid[i - 1], raw.ask[i - 1]);
            ++local.filled_minutes;
          }
        }
        out.push_back(raw.timestamps[i], raw.bid[i], raw.ask[i]);
      }
      local.kept_days.push_back(day);
    } else {
      local.removed_days.push_back(day);
    }
    begin = end;
  }
  if (report != nullptr) *report = std::move(local);
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic stand-ins for the licensed datasets

struct DamProfiles {
  DailySeries inflow;
  DailySeries demand;
};

/// Daily inflow and demand for `years` 365-day years, in m^3/s.
///
/// Inflow: seasonal sinusoid (late-spring snowmelt peak) times AR(1)
/// lognormal noise. Demand: annual irrigation cycle plus a weekly cycle and
/// mild noise. Both strictly positive.
inline DamProfiles synth_dam_profiles(std::uint64_t seed, std::size_t years,
                                      std::chrono::sys_days start = std::chrono::sys_days(
                                          std::chrono::year(1990) / 1 / 1)) {
  if (years < 1) throw UsageError("synth_dam_profiles: years must be >= 1");
  const std::size_t n = 365 * years;
  RngStream inflow_rng(seed, 101);
  RngStream demand_rng(seed, 102);
  DamProfiles p{{{}, start, "inflow"}, {{}, start, "demand"}};
  p.inflow.values.reserve(n);
  p.demand.values.reserve(n);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double sigma = 0.35;
  constexpr double phi = 0.85;
  double log_noise = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double doy = static_cast<double>(t % 365);
    const double seasonal = 145.0 + 75.0 * std::sin(two_pi * (doy - 80.0) / 365.0);
    log_noise = phi * log_noise + std::sqrt(1.0 - phi * phi) * sigma * inflow_rng.normal();
    p.inflow.values.push_back(seasonal * std::exp(log_noise - 0.5 * sigma * sigma));

    const double annual = 125.0 + 55.0 * std::sin(two_pi * (doy - 100.0) / 365.0);
    const double weekly = 8.0 * std::cos(two_pi * static_cast<double>(t % 7) / 7.0);
    const double noise = std::exp(0.05 * demand_rng.normal());
    p.demand.values.push_back((annual + weekly) * noise);
  }
  return p;
}

inline constexpr std::int64_t kSessionOpenSeconds = 8 * kSecondsPerHour;
inline constexpr std::int64_t kSessionCloseSeconds = 18 * kSecondsPerHour;

/// One trading day of minute bars from 08:00 to 18:00 inclusive (601 bars).
///
/// The mid-price follows a geometric random walk with per-minute drift and
/// volatility; bid and ask sit half a fixed spread either side of it.
inline MinuteBarSeries synth_market_day(std::uint64_t seed, double drift, double volatility,
                                        std::int64_t epoch_day = 19360, double start_price = 1.1,
                                        double spread = 1e-4) {
  if (volatility < 0.0) throw UsageError("synth_market_day: volatility must be >= 0");
  if (!(spread > 0.0)) throw UsageError("synth_market_day: spread must be > 0");
  RngStream rng(seed, 200 + static_cast<std::uint64_t>(epoch_day));
  MinuteBarSeries out;
  double mid = start_price;
  const std::int64_t open = epoch_day * kSecondsPerDay + kSessionOpenSeconds;
  const std::int64_t bars = (kSessionCloseSeconds - kSessionOpenSeconds) / kSecondsPerMinute + 1;
  const double log_drift = drift - 0.5 * volatility * volatility;
  for (std::int64_t i = 0; i < bars; ++i) {
    if (i > 0) {
      const double shock = volatility > 0.0 ? volatility * rng.normal() : 0.0;
      mid *= std::exp(log_drift + shock);
    }
    out.push_back(open + i * kSecondsPerMinute, mid - 0.5 * spread, mid + 0.5 * spread);
  }
  return out;
}

/// Consecutive weekdays of synthetic sessions, each continuing from the
/// previous day's closing mid-price.
inline MinuteBarSeries synth_market_days(std::uint64_t seed, std::size_t days, double drift,
                                         double volatility, std::int64_t first_epoch_day = 19360) {
  MinuteBarSeries out;
  std::int64_t day = first_epoch_day;
  double price = 1.1;
  for (std::size_t d = 0; d < days; ++d) {
    // 1970-01-01 was a Thursday; weekday index 0 = Monday.
    while ((day + 3) % 7 >= 5) ++day;
    auto bars = synth_market_day(seed, drift, volatility, day, price);
    price = 0.5 * (bars.bid.back() + bars.ask.back());
    for (std::size_t i = 0; i < bars.size(); ++i)
      out.push_back(bars.timestamps[i], bars.bid[i], bars.ask[i]);
    ++day;
  }
  return out;
}

struct MicrogridProfiles {
  HourlySeries demand;       // W
  HourlySeries generation;   // W
  HourlySeries price_buy;    // EUR/kWh
  HourlySeries price_sell;   // EUR/kWh
  DailySeries temperature;   // degC
};

/// Hourly residential demand, 3 kW photovoltaic generation, market prices
/// and daily ambient temperature for `years` 365-day years.
inline MicrogridProfiles synth_microgrid_profiles(std::uint64_t seed, std::size_t years,
                                                  std::int64_t start_timestamp = 1420070400) {
  if (years < 1) throw UsageError("synth_microgrid_profiles: years must be >= 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const std::size_t days = 365 * years;
  const std::size_t hours = 24 * days;
  RngStream demand_rng(seed, 301);
  RngStream sky_rng(seed, 302);
  RngStream price_rng(seed, 303);
  RngStream temp_rng(seed, 304);

  MicrogridProfiles p;
  p.demand = {{}, start_timestamp, "demand"};
  p.generation = {{}, start_timestamp, "generation"};
  p.price_buy = {{}, start_timestamp, "price_buy"};
  p.price_sell = {{}, start_timestamp, "price_sell"};
  p.temperature = {{},
                   std::chrono::sys_days(std::chrono::days(day_of(start_timestamp))),
                   "temperature"};
  p.demand.values.reserve(hours);
  p.generation.values.reserve(hours);
  p.price_buy.values.reserve(hours);
  p.price_sell.values.reserve(hours);
  p.temperature.values.reserve(days);

  for (std::size_t d = 0; d < days; ++d) {
    const double doy = static_cast<double>(d % 365);
    const double winter = std::cos(two_pi * (doy + 10.0) / 365.0);  // +1 mid-winter
    const double day_length = 12.0 - 3.0 * winter;
    const double sunrise = 12.5 - 0.5 * day_length;
    const double clear_sky = 0.25 + 0.75 * sky_rng.uniform();
    const double daily_price = 0.02 * price_rng.normal();
    p.temperature.values.push_back(13.0 - 10.0 * winter + 2.0 * temp_rng.normal());

    for (int h = 0; h < 24; ++h) {
      const double hour = static_cast<double>(h);
      const double morning = std::exp(-0.5 * std::pow((hour - 7.5) / 1.2, 2.0));
      const double evening = std::exp(-0.5 * std::pow((hour - 20.0) / 1.8, 2.0));
      const double base = 250.0 + 550.0 * morning + 900.0 * evening;
      const double demand = base * (1.0 + 0.2 * winter) * std::exp(0.25 * demand_rng.normal() - 0.03125);
      p.demand.values.push_back(demand);

      const double solar_t = (hour + 0.5 - sunrise) / day_length;
      const double cf = (solar_t > 0.0 && solar_t < 1.0) ? std::sin(std::numbers::pi * solar_t) : 0.0;
      p.generation.values.push_back(3000.0 * 0.8 * clear_sky * cf);

      const double intraday = 0.025 * morning + 0.035 * evening - 0.01 * cf;
      const double sell = std::max(0.01, 0.06 + 0.01 * winter + intraday + daily_price +
                                              0.005 * price_rng.normal());
      p.price_sell.values.push_back(sell);
      p.price_buy.values.push_back(sell + 0.12);
    }
  }
  return p;
}

}  // namespace realgym
