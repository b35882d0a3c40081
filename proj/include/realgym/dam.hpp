#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "realgym/config.hpp"
#include "realgym/core.hpp"
#include "realgym/data_io.hpp"

namespace realgym {

/// Reservoir constants. Defaults describe Lake Como.
struct DamParams {
  double surface_area_km2 = 145.9;
  double initial_level = 0.35;       // m
  double min_flow = 5.0;             // m^3/s, default daily minimum release
  double min_level = -0.5;           // m
  double max_level = 1.25;           // m
  double zero_flow_level = -2.5;     // m
  double rating_exponent = 2.015;
  double discharge_coeff = 33.37;    // m^(3-beta)/s
  double linear_slope = 1488.1;      // m^2/s
  double linear_intercept = 744.05;  // m^3/s
  double linear_limit = -0.4;        // m
  int integration_substeps = 24;
  bool evaporation_enabled = false;
  std::optional<std::vector<double>> evaporation_rates;  // 366 day-of-year entries, m^3/s
  std::optional<std::vector<double>> min_release;        // 366 day-of-year entries, m^3/s

  double weight_deficit = 1.0;
  double weight_overflow = 1.0;
  double weight_starving = 1.0;
  double weight_wasted = 1.0;
  double clip_weight = 0.001;    // lambda_1
  double wasted_weight = 0.1;    // lambda_2
  int demand_ma_window = 7;      // days
  int horizon_days = 365;

  double surface_area_m2() const noexcept { return surface_area_km2 * 1e6; }

  double min_release_on(std::size_t day_of_year) const {
    return min_release ? (*min_release)[day_of_year % min_release->size()] : min_flow;
  }

  void validate() const {
    if (!(min_level < linear_limit && linear_limit < max_level))
      throw ConfigError("dam: require min_level < linear_limit < max_level");
    if (!(discharge_coeff > 0.0)) throw ConfigError("dam: discharge_coeff must be > 0");
    if (!(rating_exponent > 0.0)) throw ConfigError("dam: rating_exponent must be > 0");
    if (!(surface_area_km2 > 0.0)) throw ConfigError("dam: surface_area must be > 0");
    if (integration_substeps < 1) throw ConfigError("dam: integration_substeps must be >= 1");
    if (demand_ma_window < 1) throw ConfigError("dam: demand_ma_window must be >= 1");
    if (horizon_days < 1) throw ConfigError("dam: horizon_days must be >= 1");
    for (double w : {weight_deficit, weight_overflow, weight_starving, weight_wasted, clip_weight,
                     wasted_weight})
      if (w < 0.0) throw ConfigError("dam: reward weights must be >= 0");
    if (evaporation_enabled && (!evaporation_rates || evaporation_rates->size() != 366))
      throw ConfigError("dam: evaporation enabled but no 366-entry evaporation_rates table");
    if (min_release && min_release->size() != 366)
      throw ConfigError("dam: min_release table must have 366 entries");
  }

  static DamParams from_config(const Config& cfg, const std::string& section = "dam") {
    DamParams p;
    p.surface_area_km2 = cfg.get(section, "surface_area", p.surface_area_km2);
    p.initial_level = cfg.get(section, "initial_level", p.initial_level);
    p.min_flow = cfg.get(section, "min_flow", p.min_flow);
    p.min_level = cfg.get(section, "min_level", p.min_level);
    p.max_level = cfg.get(section, "max_level", p.max_level);
    p.zero_flow_level = cfg.get(section, "zero_flow_level", p.zero_flow_level);
    p.rating_exponent = cfg.get(section, "rating_exponent", p.rating_exponent);
    p.discharge_coeff = cfg.get(section, "discharge_coeff", p.discharge_coeff);
    p.linear_slope = cfg.get(section, "linear_slope", p.linear_slope);
    p.linear_intercept = cfg.get(section, "linear_intercept", p.linear_intercept);
    p.linear_limit = cfg.get(section, "linear_limit", p.linear_limit);
    p.integration_substeps = cfg.get(section, "integration", p.integration_substeps);
    p.evaporation_enabled = cfg.get(section, "evaporation", p.evaporation_enabled);
    if (cfg.has(section, "evaporation_rates"))
      p.evaporation_rates =
          load_day_of_year_csv(cfg.get<std::string>(section, "evaporation_rates", ""), "evaporation");
    if (cfg.has(section, "min_release"))
      p.min_release =
          load_day_of_year_csv(cfg.get<std::string>(section, "min_release", ""), "min_release");
    p.weight_deficit = cfg.get(section, "weight_deficit", p.weight_deficit);
    p.weight_overflow = cfg.get(section, "weight_overflow", p.weight_overflow);
    p.weight_starving = cfg.get(section, "weight_starving", p.weight_starving);
    p.weight_wasted = cfg.get(section, "weight_wasted", p.weight_wasted);
    p.clip_weight = cfg.get(section, "clip_weight", p.clip_weight);
    p.wasted_weight = cfg.get(section, "wasted_weight", p.wasted_weight);
    p.demand_ma_window = cfg.get(section, "demand_ma_window", p.demand_ma_window);
    p.horizon_days = cfg.get(section, "horizon_days", p.horizon_days);
    p.validate();
    return p;
  }
};

inline double rating_curve(double level, const DamParams& p) {
  return p.discharge_coeff * std::pow(level - p.zero_flow_level, p.rating_exponent);
}

// Lower bound on the release at `level` given the day's minimum release.
inline double q_min(double level, double min_release_today, const DamParams& p) {
  if (level <= p.min_level) return 0.0;
  if (level <= p.max_level) return min_release_today;
  return rating_curve(level, p);
}

// Upper bound on the release at `level`.
inline double q_max(double level, const DamParams& p) {
  if (level <= p.min_level) return 0.0;
  if (level <= p.linear_limit) return p.linear_slope * level + p.linear_intercept;
  return rating_curve(level, p);
}

/// Release actually achieved for a requested flow. Just above min_level the
/// linear maximum can fall below the minimum-release requirement; the
/// physical maximum wins there.
inline double feasible_release(double requested, double level, double min_release_today,
                               const DamParams& p) {
  const double hi = q_max(level, p);
  const double lo = std::min(q_min(level, min_release_today, p), hi);
  return std::clamp(requested, lo, hi);
}

struct DamRewardTerms {
  double deficit = 0.0;
  double overflow = 0.0;
  double starving = 0.0;
  double wasted = 0.0;
  double clip = 0.0;
};

// Unweighted reward terms for one day.
inline DamRewardTerms dam_reward_terms(double action, double release, double demand, double level,
                                       double min_release_today, const DamParams& p) {
  DamRewardTerms t;
  t.deficit = -std::max(demand - std::max(release - min_release_today, 0.0), 0.0);
  t.overflow = level > p.max_level ? -1.0 : 0.0;
  t.starving = level < p.min_level ? -1.0 : 0.0;
  t.wasted = -std::max(release - demand, 0.0);
  t.clip = -(action - release) * (action - release);
  return t;
}

inline RewardComponents dam_reward(const DamRewardTerms& t, const DamParams& p) {
  return {{"deficit", p.weight_deficit * t.deficit},
          {"overflow", p.weight_overflow * t.overflow},
          {"starving", p.weight_starving * t.starving},
          {"wasted", p.wasted_weight * p.weight_wasted * t.wasted},
          {"clip", p.clip_weight * t.clip}};
}

struct DamState {
  double level = 0.0;
  std::size_t day = 0;          // days into the episode
  std::size_t start_index = 0;  // offset of the episode in the data series
  double demand_ma = 0.0;
  std::size_t steps = 0;
  bool finished = false;

  friend bool operator==(const DamState&, const DamState&) = default;
};

/// Daily release control of a reservoir with sub-daily volume balance.
///
/// Observation: (level, demand moving average, cos, sin of the year angle).
/// Action: requested release in m^3/s. One episode is one year of the data.
class DamEnv final : public Environment {
 public:
  DamEnv(DamParams params, DamProfiles data) : params_(std::move(params)), data_(std::move(data)) {
    params_.validate();
    if (data_.inflow.size() != data_.demand.size())
      throw DataError("dam: inflow and demand series differ in length");
    spec_.observation_dim = 4;
    spec_.action_kind = ActionKind::continuous;
    spec_.action_bounds = {0.0, 500.0};
    spec_.horizon = static_cast<std::size_t>(params_.horizon_days);
    spec_.step_seconds = static_cast<double>(kSecondsPerDay);
    spec_.validate();
  }

  std::string name() const override { return "dam"; }
  const EnvSpec& spec() const override { return spec_; }
  const DamParams& params() const noexcept { return params_; }

  std::size_t episode_count() const override { return data_.inflow.size() / spec_.horizon; }

  Observation reset(std::uint64_t /*seed*/, const EpisodeConfig& episode = {}) override {
    if (episode.episode >= episode_count())
      throw DataError("dam: episode " + std::to_string(episode.episode) + " not in dataset (" +
                      std::to_string(episode_count()) + " years available)");
    begin_episode();
    state_ = {};
    state_.level = params_.initial_level;
    state_.start_index = episode.episode * spec_.horizon;
    state_.demand_ma = demand_average(state_.start_index);
    return observe();
  }

  StepResult step(const Action& action) override {
    check_steppable();
    const double requested = expect_continuous(action);
    const double flow_request = std::max(requested, 0.0);
    const std::size_t g = state_.start_index + state_.day;
    const std::size_t doy = state_.day % 366;
    const double inflow = data_.inflow[g];
    const double demand = data_.demand[g];
    const double min_rel = params_.min_release_on(doy);
    const double evaporation =
        params_.evaporation_enabled ? (*params_.evaporation_rates)[doy] : 0.0;

    const double dt = static_cast<double>(kSecondsPerDay) / params_.integration_substeps;
    const double area = params_.surface_area_m2();
    double release_sum = 0.0;
    int inversions = 0;
    for (int k = 0; k < params_.integration_substeps; ++k) {
      if (q_min(state_.level, min_rel, params_) > q_max(state_.level, params_)) ++inversions;
      const double r = feasible_release(flow_request, state_.level, min_rel, params_);
      release_sum += r;
      state_.level += (inflow - r - evaporation) * dt / area;
    }
    const double release = release_sum / params_.integration_substeps;

    const auto terms = dam_reward_terms(requested, release, demand, state_.level, min_rel, params_);
    StepResult out;
    out.reward_components = dam_reward(terms, params_);
    out.settle_reward();

    ++state_.day;
    state_.demand_ma = demand_average(state_.start_index + state_.day);
    out.truncated = state_.day >= spec_.horizon;
    out.observation = observe();
    out.info = {{"level", state_.level},       {"release", release},
                {"inflow", inflow},            {"demand", demand},
                {"min_release", min_rel},      {"raw_deficit", terms.deficit},
                {"raw_overflow", terms.overflow}, {"raw_starving", terms.starving},
                {"raw_wasted", terms.wasted},  {"raw_clip", terms.clip},
                {"bound_inversions", static_cast<double>(inversions)}};
    end_step(out);
    state_.steps = steps_;
    state_.finished = finished_;
    return out;
  }

  DamState snapshot() const { return state_; }
  void restore(const DamState& s) {
    state_ = s;
    steps_ = s.steps;
    finished_ = s.finished;
    started_ = true;
  }

 private:
  // Mean demand over the window of days preceding global index g.
  double demand_average(std::size_t g) const {
    const auto window = static_cast<std::size_t>(params_.demand_ma_window);
    if (g == 0) return data_.demand[0];
    const std::size_t first = g > window ? g - window : 0;
    double sum = 0.0;
    for (std::size_t i = first; i < g; ++i) sum += data_.demand[i];
    return sum / static_cast<double>(g - first);
  }

  Observation observe() const {
    const double year = static_cast<double>(spec_.horizon) * kSecondsPerDay;
    const auto enc = cyclic_encode(static_cast<double>(state_.day) * kSecondsPerDay, year);
    return {state_.level, state_.demand_ma, enc.cos_phi, enc.sin_phi};
  }

  DamParams params_;
  DamProfiles data_;
  EnvSpec spec_;
  DamState state_;
};

}  // namespace realgym
