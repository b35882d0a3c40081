#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "realgym/config.hpp"
#include "realgym/core.hpp"
#include "realgym/rng.hpp"

namespace realgym {

struct ElevatorParams {
  int floors = 4;              // upper floors; the ground floor is 0
  int capacity = 4;            // persons
  double speed = 3.0;          // m/s, one vertical unit per step
  double floor_height = 6.0;   // m
  int max_queue = 3;           // persons per floor
  int max_new_arrivals = 2;    // persons per floor per step
  std::optional<std::vector<double>> arrival_rates;  // pinned per-floor rates
  std::pair<double, double> arrival_rate_range{0.01, 0.1};
  std::size_t horizon = 3600;
  double offload_bonus = 2.0;  // beta

  int units_per_floor() const noexcept {
    return static_cast<int>(std::lround(floor_height / speed));
  }
  int max_height() const noexcept { return floors * units_per_floor(); }

  void validate() const {
    if (floors < 1) throw ConfigError("elevator: floors must be >= 1");
    if (capacity < 1) throw ConfigError("elevator: capacity must be >= 1");
    if (!(speed > 0.0) || !(floor_height > 0.0))
      throw ConfigError("elevator: speed and floor_height must be > 0");
    const double ratio = floor_height / speed;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw ConfigError("elevator: floor_height must be divisible by speed");
    if (max_queue < 0 || max_new_arrivals < 0)
      throw ConfigError("elevator: max_queue and max_new_arrivals must be >= 0");
    if (horizon < 1) throw ConfigError("elevator: horizon must be >= 1");
    if (!(offload_bonus >= 0.0)) throw ConfigError("elevator: offload_bonus must be >= 0");
    const auto [lo, hi] = arrival_rate_range;
    if (!(0.0 <= lo && lo <= hi)) throw ConfigError("elevator: invalid arrival_rate_range");
    if (arrival_rates) {
      if (arrival_rates->size() != static_cast<std::size_t>(floors))
        throw ConfigError("elevator: arrival_rates needs one rate per upper floor");
      for (double r : *arrival_rates)
        if (r < 0.0) throw ConfigError("elevator: arrival rates must be >= 0");
    }
  }

  static ElevatorParams from_config(const Config& cfg, const std::string& section = "elevator") {
    ElevatorParams p;
    p.floors = cfg.get(section, "floors", p.floors);
    p.capacity = cfg.get(section, "capacity", p.capacity);
    p.speed = cfg.get(section, "speed", p.speed);
    p.floor_height = cfg.get(section, "floor_height", p.floor_height);
    p.max_queue = cfg.get(section, "max_queue", p.max_queue);
    p.max_new_arrivals = cfg.get(section, "max_new_arrivals", p.max_new_arrivals);
    if (cfg.has(section, "arrival_rates")) p.arrival_rates = cfg.get_list(section, "arrival_rates", {});
    const auto range = cfg.get_list(section, "arrival_rate_range",
                                    {p.arrival_rate_range.first, p.arrival_rate_range.second});
    if (range.size() != 2) throw ConfigError("elevator: arrival_rate_range needs two values");
    p.arrival_rate_range = {range[0], range[1]};
    p.horizon = cfg.get(section, "horizon", p.horizon);
    p.offload_bonus = cfg.get(section, "offload_bonus", p.offload_bonus);
    p.validate();
    return p;
  }
};

enum ElevatorAction : std::int64_t { kUp = 0, kDown = 1, kOpen = 2 };

struct ElevatorState {
  int position = 0;             // vertical units, 0..H
  int load = 0;
  std::vector<int> queues;      // index f-1 for floor f
  std::vector<int> arrivals;    // admitted this step
  int prev_load = 0;
  std::int64_t stairs_diverted = 0;
  std::int64_t delivered = 0;
  std::int64_t total_arrivals = 0;
  std::vector<double> rates;
  std::vector<RngStream> floor_rngs;
  std::size_t steps = 0;
  bool finished = false;

  friend bool operator==(const ElevatorState&, const ElevatorState&) = default;
};

/// Draws this step's arrivals on every upper floor: Poisson(rate) truncated
/// at max_new_arrivals, admitted while the queue has room, the rest divert
/// to the stairs.
inline void sample_arrivals(std::span<RngStream> rngs, const ElevatorParams& p, ElevatorState& s) {
  for (std::size_t f = 0; f < s.queues.size(); ++f) {
    const auto drawn = static_cast<int>(
        std::min<std::uint64_t>(rngs[f].poisson(s.rates[f]),
                                static_cast<std::uint64_t>(p.max_new_arrivals)));
    const int admitted = std::min(drawn, p.max_queue - s.queues[f]);
    s.queues[f] += admitted;
    s.arrivals[f] = admitted;
    s.stairs_diverted += drawn - admitted;
    s.total_arrivals += drawn;
  }
}

// Reward after a transition: -(queued + riding) plus the offload bonus on
// the step the cabin becomes empty.
inline RewardComponents elevator_reward(int prev_load, const ElevatorState& after, double beta) {
  int waiting = 0;
  for (int w : after.queues) waiting += w;
  const double bonus = after.load == 0 ? beta * prev_load : 0.0;
  return {{"waiting", -static_cast<double>(waiting)},
          {"load", -static_cast<double>(after.load)},
          {"offload", bonus}};
}

/// Single elevator under peak-down traffic.
///
/// Observation: (h, c, w_1..w_F, k_1..k_F) as doubles, where h is the
/// vertical position in speed-sized units, c the cabin load, w the queues
/// and k the arrivals admitted this step. Actions: up, down, open.
class ElevatorEnv final : public Environment {
 public:
  explicit ElevatorEnv(ElevatorParams params) : params_(std::move(params)) {
    params_.validate();
    const auto F = static_cast<std::size_t>(params_.floors);
    spec_.observation_dim = 2 + 2 * F;
    spec_.action_kind = ActionKind::discrete;
    spec_.action_count = 3;
    spec_.horizon = params_.horizon;
    spec_.step_seconds = 1.0;
    spec_.validate();
  }

  std::string name() const override { return "elevator"; }
  const EnvSpec& spec() const override { return spec_; }
  const ElevatorParams& params() const noexcept { return params_; }

  // Arrivals are generated, so any number of episodes is available.
  std::size_t episode_count() const override { return static_cast<std::size_t>(-1); }

  Observation reset(std::uint64_t seed, const EpisodeConfig& /*episode*/ = {}) override {
    begin_episode();
    const auto F = static_cast<std::size_t>(params_.floors);
    state_ = {};
    state_.queues.assign(F, 0);
    state_.arrivals.assign(F, 0);
    if (params_.arrival_rates) {
      state_.rates = *params_.arrival_rates;
    } else {
      RngStream rate_rng(seed, 999);
      state_.rates.resize(F);
      for (auto& r : state_.rates)
        r = rate_rng.uniform(params_.arrival_rate_range.first, params_.arrival_rate_range.second);
    }
    state_.floor_rngs.clear();
    for (std::size_t f = 0; f < F; ++f) state_.floor_rngs.emplace_back(seed, 1000 + f);
    return observe();
  }

  StepResult step(const Action& action) override {
    check_steppable();
    const auto a = expect_discrete(action, spec_.action_count);
    state_.prev_load = state_.load;
    const int H = params_.max_height();
    const int unit = params_.units_per_floor();

    switch (a) {
      case kUp: state_.position = std::min(state_.position + 1, H); break;
      case kDown: state_.position = std::max(state_.position - 1, 0); break;
      case kOpen:
        if (state_.position % unit == 0) {
          const int floor = state_.position / unit;
          if (floor == 0) {
            state_.delivered += state_.load;
            state_.load = 0;
          } else {
            int& queue = state_.queues[static_cast<std::size_t>(floor - 1)];
            const int boarding = std::min(queue, params_.capacity - state_.load);
            queue -= boarding;
            state_.load += boarding;
          }
        }
        break;
      default: break;
    }

    sample_arrivals(state_.floor_rngs, params_, state_);

    StepResult out;
    out.reward_components = elevator_reward(state_.prev_load, state_, params_.offload_bonus);
    out.settle_reward();
    out.truncated = steps_ + 1 >= spec_.horizon;
    out.observation = observe();
    out.info = {{"delivered", static_cast<double>(state_.delivered)},
                {"stairs_diverted", static_cast<double>(state_.stairs_diverted)},
                {"total_arrivals", static_cast<double>(state_.total_arrivals)}};
    end_step(out);
    state_.steps = steps_;
    state_.finished = finished_;
    return out;
  }

  const ElevatorState& state() const noexcept { return state_; }
  ElevatorState snapshot() const { return state_; }
  void restore(const ElevatorState& s) {
    state_ = s;
    steps_ = s.steps;
    finished_ = s.finished;
    started_ = true;
  }

 private:
  Observation observe() const {
    Observation obs;
    obs.reserve(spec_.observation_dim);
    obs.push_back(state_.position);
    obs.push_back(state_.load);
    for (int w : state_.queues) obs.push_back(w);
    for (int k : state_.arrivals) obs.push_back(k);
    return obs;
  }

  ElevatorParams params_;
  EnvSpec spec_;
  ElevatorState state_;
};

}  // namespace realgym
