#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "realgym/config.hpp"
#include "realgym/core.hpp"
#include "realgym/data_io.hpp"

namespace realgym {

struct BatteryParams {
  double nominal_capacity = 60.0;   // Ah
  double v_max = 398.4;             // V
  double v_min = 288.0;             // V
  double replacement_cost = 3000.0; // EUR
  double soc_min = 0.2;
  double soc_max = 1.0;
  double soh_eol = 0.8;
  double initial_soc = 0.5;
  // +-0.5C at the mid-range voltage.
  double p_charge_max = 30.0 * 343.2;     // W
  double p_discharge_max = -30.0 * 343.2; // W
  // Idle battery loses 10% SoH over five years of hourly steps.
  double calendar_fade_per_step = 0.1 / (5.0 * 8760.0);
  // ~3000 full cycles (120 Ah throughput each) to lose 20%.
  double cycle_fade_per_ah = 0.2 / (3000.0 * 120.0);

  double nominal_voltage() const noexcept { return 0.5 * (v_max + v_min); }

  void validate() const {
    if (!(0.0 < soc_min && soc_min < soc_max && soc_max <= 1.0))
      throw ConfigError("battery: require 0 < soc_min < soc_max <= 1");
    if (!(0.0 < soh_eol && soh_eol < 1.0)) throw ConfigError("battery: soh_eol must be in (0, 1)");
    if (!(v_min < v_max)) throw ConfigError("battery: require v_min < v_max");
    if (!(p_discharge_max < 0.0 && 0.0 < p_charge_max))
      throw ConfigError("battery: require p_discharge_max < 0 < p_charge_max");
    if (!(nominal_capacity > 0.0)) throw ConfigError("battery: nominal_capacity must be > 0");
    if (!(soc_min <= initial_soc && initial_soc <= soc_max))
      throw ConfigError("battery: initial_soc outside the SoC range");
    if (calendar_fade_per_step < 0.0 || cycle_fade_per_ah < 0.0)
      throw ConfigError("battery: fade rates must be >= 0");
  }
};

struct MicrogridParams {
  BatteryParams battery;
  double clip_weight = 0.001;  // lambda, EUR per W of violation
  double step_hours = 1.0;

  void validate() const {
    battery.validate();
    if (clip_weight < 0.0) throw ConfigError("microgrid: clip_weight must be >= 0");
    if (!(step_hours > 0.0)) throw ConfigError("microgrid: step_hours must be > 0");
  }

  static MicrogridParams from_config(const Config& cfg, const std::string& section = "microgrid") {
    MicrogridParams p;
    auto& b = p.battery;
    b.nominal_capacity = cfg.get(section, "nominal_capacity", b.nominal_capacity);
    b.v_max = cfg.get(section, "v_max", b.v_max);
    b.v_min = cfg.get(section, "v_min", b.v_min);
    b.replacement_cost = cfg.get(section, "replacement_cost", b.replacement_cost);
    b.soc_min = cfg.get(section, "soc_min", b.soc_min);
    b.soc_max = cfg.get(section, "soc_max", b.soc_max);
    b.soh_eol = cfg.get(section, "soh_eol", b.soh_eol);
    b.initial_soc = cfg.get(section, "initial_soc", b.initial_soc);
    b.p_charge_max = cfg.get(section, "p_charge_max", b.p_charge_max);
    b.p_discharge_max = cfg.get(section, "p_discharge_max", b.p_discharge_max);
    b.calendar_fade_per_step = cfg.get(section, "calendar_fade_per_step", b.calendar_fade_per_step);
    b.cycle_fade_per_ah = cfg.get(section, "cycle_fade_per_ah", b.cycle_fade_per_ah);
    p.clip_weight = cfg.get(section, "clip_weight", p.clip_weight);
    p.step_hours = cfg.get(section, "step_hours", p.step_hours);
    p.validate();
    return p;
  }
};

struct BatteryState {
  double soc = 0.5;
  double soh = 1.0;
  double capacity = 60.0;  // Ah
  double voltage = 0.0;    // V
  double temperature = 20.0;

  friend bool operator==(const BatteryState&, const BatteryState&) = default;
};

// Open-circuit voltage, linear between v_min at soc_min and v_max at soc_max.
inline double battery_voltage(double soc, const BatteryParams& p) {
  return p.v_min + (soc - p.soc_min) / (p.soc_max - p.soc_min) * (p.v_max - p.v_min);
}

inline BatteryState initial_battery(const BatteryParams& p, double ambient) {
  return {p.initial_soc, 1.0, p.nominal_capacity, battery_voltage(p.initial_soc, p), ambient};
}

struct PowerSplit {
  double battery;  // W
  double market;   // W
};

inline PowerSplit split_power(double fraction, double net_power) {
  const double a = std::clamp(fraction, 0.0, 1.0);
  const double battery = a * net_power;
  return {battery, net_power - battery};
}

struct SocPowerBounds {
  double lower;  // W, most negative admissible battery power
  double upper;  // W
};

// Battery powers that keep the SoC inside its range after one step.
inline SocPowerBounds soc_power_bounds(const BatteryState& s, const BatteryParams& p, double dt_hours) {
  const double scale = s.capacity * s.voltage / dt_hours;
  return {(p.soc_min - s.soc) * scale, (p.soc_max - s.soc) * scale};
}

struct ClippedPower {
  double feasible;   // W
  double violation;  // W, |requested - feasible|
};

inline ClippedPower clip_battery_power(double requested, const BatteryState& s,
                                       const BatteryParams& p, double dt_hours) {
  if (!(dt_hours > 0.0)) throw UsageError("clip_battery_power: dt must be > 0");
  const auto soc = soc_power_bounds(s, p, dt_hours);
  const double lo = std::max(p.p_discharge_max, soc.lower);
  const double hi = std::min(p.p_charge_max, soc.upper);
  const double feasible = std::clamp(requested, std::min(lo, 0.0), std::max(hi, 0.0));
  return {feasible, std::abs(requested - feasible)};
}

/// Integrates one step of battery power: SoC by coulomb counting, SoH by
/// calendar plus throughput fade, voltage from the SoC.
inline BatteryState battery_advance(const BatteryState& s, double power, double ambient,
                                    const BatteryParams& p, double dt_hours) {
  BatteryState n = s;
  const double current = power / s.voltage;
  n.soc = std::clamp(s.soc + current * dt_hours / s.capacity, p.soc_min, p.soc_max);
  n.soh = std::max(0.0, s.soh - p.calendar_fade_per_step -
                            p.cycle_fade_per_ah * std::abs(current) * dt_hours);
  n.capacity = n.soh * p.nominal_capacity;
  n.voltage = battery_voltage(n.soc, p);
  n.temperature = ambient;
  return n;
}

inline double trading_reward(double market_power, double price_sell, double price_buy,
                             double dt_hours) {
  const double sold = std::max(market_power, 0.0);
  const double bought = std::min(market_power, 0.0);
  return (price_sell * sold + price_buy * bought) * dt_hours / 1000.0;
}

inline double degradation_reward(double soh_before, double soh_after, const BatteryParams& p) {
  return (soh_after - soh_before) / (1.0 - p.soh_eol) * p.replacement_cost;
}

// Excess of the requested battery power over the SoC-derived bounds, in W.
inline double soc_violation(double requested, const BatteryState& s, const BatteryParams& p,
                            double dt_hours) {
  const auto b = soc_power_bounds(s, p, dt_hours);
  return std::max({0.0, requested - b.upper, b.lower - requested});
}

struct MicrogridState {
  BatteryState battery;
  std::size_t start_index = 0;
  std::size_t t = 0;
  std::size_t steps = 0;
  bool finished = false;

  friend bool operator==(const MicrogridState&, const MicrogridState&) = default;
};

/// Residential PV + battery + grid connection, hourly control.
///
/// Observation: (soc, temperature, demand estimate, generation estimate,
/// buy price, sell price, cos/sin day angle, cos/sin year angle). The
/// estimates are the previous step's true values. Action in [0, 1]: share
/// of the net power routed to the battery. Whatever the battery cannot
/// absorb or supply is settled with the market.
class MicrogridEnv final : public Environment {
 public:
  static constexpr std::size_t kYearHours = 8760;

  MicrogridEnv(MicrogridParams params, MicrogridProfiles data)
      : params_(std::move(params)), data_(std::move(data)) {
    params_.validate();
    const auto n = data_.demand.size();
    if (data_.generation.size() != n || data_.price_buy.size() != n || data_.price_sell.size() != n)
      throw DataError("microgrid: hourly series differ in length");
    if (data_.temperature.size() * 24 < n)
      throw DataError("microgrid: temperature series shorter than the hourly data");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(data_.price_sell[i] < data_.price_buy[i]))
        throw DataError("microgrid: sell price must be below buy price at hour " + std::to_string(i));
      if (data_.demand[i] < 0.0 || data_.generation[i] < 0.0)
        throw DataError("microgrid: negative demand or generation at hour " + std::to_string(i));
    }
    spec_.observation_dim = 10;
    spec_.action_kind = ActionKind::continuous;
    spec_.action_bounds = {0.0, 1.0};
    spec_.horizon = kYearHours;
    spec_.step_seconds = params_.step_hours * kSecondsPerHour;
    spec_.validate();
  }

  std::string name() const override { return "microgrid"; }
  const EnvSpec& spec() const override { return spec_; }
  const MicrogridParams& params() const noexcept { return params_; }

  std::size_t episode_count() const override { return data_.demand.size() / kYearHours; }

  Observation reset(std::uint64_t /*seed*/, const EpisodeConfig& episode = {}) override {
    if (episode.episode >= episode_count())
      throw DataError("microgrid: episode " + std::to_string(episode.episode) +
                      " not in dataset (" + std::to_string(episode_count()) + " years available)");
    begin_episode();
    state_ = {};
    state_.start_index = episode.episode * kYearHours;
    state_.battery = initial_battery(params_.battery, ambient(state_.start_index));
    return observe();
  }

  StepResult step(const Action& action) override {
    check_steppable();
    const double raw = expect_continuous(action);
    const auto& bp = params_.battery;
    const double dt = params_.step_hours;
    const std::size_t g = state_.start_index + state_.t;

    const double net = data_.generation[g] - data_.demand[g];
    const auto split = split_power(raw, net);
    const auto clipped = clip_battery_power(split.battery, state_.battery, bp, dt);
    const double violation = soc_violation(raw * net, state_.battery, bp, dt);

    const double soh_before = state_.battery.soh;
    state_.battery = battery_advance(state_.battery, clipped.feasible, ambient(g), bp, dt);
    const double market = net - clipped.feasible;

    StepResult out;
    out.reward_components = {
        {"trading", trading_reward(market, data_.price_sell[g], data_.price_buy[g], dt)},
        {"degradation", degradation_reward(soh_before, state_.battery.soh, bp)},
        {"clip", -params_.clip_weight * violation}};
    out.settle_reward();

    ++state_.t;
    out.terminated = state_.battery.soh <= bp.soh_eol;
    out.truncated = !out.terminated && state_.t >= spec_.horizon;
    out.observation = observe();
    out.info = {{"net_power", net},
                {"battery_power", clipped.feasible},
                {"market_power", market},
                {"battery_power_requested", split.battery},
                {"power_violation", clipped.violation},
                {"soc_violation", violation},
                {"soc", state_.battery.soc},
                {"soh", state_.battery.soh},
                {"voltage", state_.battery.voltage}};
    end_step(out);
    state_.steps = steps_;
    state_.finished = finished_;
    return out;
  }

  const MicrogridState& state() const noexcept { return state_; }
  MicrogridState snapshot() const { return state_; }
  void restore(const MicrogridState& s) {
    state_ = s;
    steps_ = s.steps;
    finished_ = s.finished;
    started_ = true;
  }

 private:
  double ambient(std::size_t g) const {
    return data_.temperature[std::min(g / 24, data_.temperature.size() - 1)];
  }

  Observation observe() const {
    const std::size_t g = state_.start_index + state_.t;
    const std::size_t last = data_.demand.size() - 1;
    const std::size_t prev = g == 0 ? 0 : std::min(g - 1, last);
    const std::size_t now = std::min(g, last);
    const auto ts = data_.demand.timestamp(now);
    const auto day = cyclic_encode(static_cast<double>(seconds_into_day(ts)),
                                   static_cast<double>(kSecondsPerDay));
    const auto year = cyclic_encode(static_cast<double>((g % kYearHours) * kSecondsPerHour),
                                    static_cast<double>(kYearHours * kSecondsPerHour));
    return {state_.battery.soc,   state_.battery.temperature,
            data_.demand[prev],   data_.generation[prev],
            data_.price_buy[now], data_.price_sell[now],
            day.cos_phi,          day.sin_phi,
            year.cos_phi,         year.sin_phi};
  }

  MicrogridParams params_;
  MicrogridProfiles data_;
  EnvSpec spec_;
  MicrogridState state_;
};

}  // namespace realgym
