#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>

#include "realgym/core.hpp"
#include "realgym/elevator.hpp"
#include "realgym/rng.hpp"
#include "realgym/trading.hpp"

namespace realgym {

/// Decision rule mapping observations to actions. act() may only depend on
/// the observation, the policy's own episode state, and the supplied stream.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Clears per-episode state. Called before the first act() of each episode.
  virtual void reset() {}
  virtual Action act(const Observation& obs, RngStream& rng) = 0;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(EnvSpec spec) : spec_(std::move(spec)) {}
  std::string name() const override { return "random"; }
  Action act(const Observation&, RngStream& rng) override {
    if (spec_.action_kind == ActionKind::discrete)
      return static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(spec_.action_count)));
    return rng.uniform(spec_.action_bounds.first, spec_.action_bounds.second);
  }

 private:
  EnvSpec spec_;
};

// Plays the same action every step.
class ConstantPolicy final : public Policy {
 public:
  ConstantPolicy(std::string name, Action action) : name_(std::move(name)), action_(action) {}
  std::string name() const override { return name_; }
  Action act(const Observation&, RngStream&) override { return action_; }

 private:
  std::string name_;
  Action action_;
};

/// Releases an exponential moving average of the observed demand
/// (observation component 1).
class DamEadPolicy final : public Policy {
 public:
  explicit DamEadPolicy(double smoothing = 0.1) : smoothing_(smoothing) {
    if (!(smoothing > 0.0 && smoothing <= 1.0))
      throw ConfigError("dam-ead: smoothing must be in (0, 1]");
  }
  std::string name() const override { return "dam-ead"; }
  void reset() override { ema_.reset(); }
  Action act(const Observation& obs, RngStream&) override {
    const double demand = obs.at(1);
    ema_ = ema_ ? smoothing_ * demand + (1.0 - smoothing_) * *ema_ : demand;
    return *ema_;
  }

 private:
  double smoothing_;
  std::optional<double> ema_;
};

/// Longest-first / shortest-first elevator routine: with an empty cabin,
/// travel to the floor holding the longest (shortest) non-empty queue and
/// open; with passengers aboard, travel straight to the ground and open.
/// Ties go to the lowest floor.
class ElevatorRoutePolicy final : public Policy {
 public:
  ElevatorRoutePolicy(ElevatorParams params, bool longest_first)
      : params_(std::move(params)), longest_(longest_first) {}

  std::string name() const override { return longest_ ? "elevator-lf" : "elevator-sf"; }

  // Floor (1-based) the routine heads for, or 0 when no queue is waiting.
  int target_floor(const Observation& obs) const {
    const auto F = static_cast<std::size_t>(params_.floors);
    int best = 0;
    double best_len = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
      const double len = obs.at(2 + f);
      if (len <= 0.0) continue;
      if (best == 0 || (longest_ ? len > best_len : len < best_len)) {
        best = static_cast<int>(f) + 1;
        best_len = len;
      }
    }
    return best;
  }

  Action act(const Observation& obs, RngStream&) override {
    const int position = static_cast<int>(obs.at(0));
    const int load = static_cast<int>(obs.at(1));
    const int unit = params_.units_per_floor();
    int goal = 0;
    if (load == 0) {
      goal = target_floor(obs);
      if (goal == 0) return std::int64_t{kOpen};  // idle
    }
    const int goal_height = goal * unit;
    if (position < goal_height) return std::int64_t{kUp};
    if (position > goal_height) return std::int64_t{kDown};
    return std::int64_t{kOpen};
  }

 private:
  ElevatorParams params_;
  bool longest_;
};

}  // namespace realgym
