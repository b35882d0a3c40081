#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "realgym/errors.hpp"

namespace realgym {

using Observation = std::vector<double>;

// A continuous action is a double, a discrete one an index in [0, n).
using Action = std::variant<double, std::int64_t>;

enum class ActionKind { continuous, discrete };

struct EnvSpec {
  std::size_t observation_dim = 0;
  ActionKind action_kind = ActionKind::continuous;
  std::pair<double, double> action_bounds{0.0, 1.0};  // continuous only
  std::int64_t action_count = 0;                      // discrete only
  std::size_t horizon = 1;
  double step_seconds = 1.0;

  void validate() const {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (step_seconds <= 0.0) throw ConfigError("step_seconds must be > 0");
    if (action_kind == ActionKind::continuous && !(action_bounds.first < action_bounds.second))
      throw ConfigError("continuous action bounds must satisfy lower < upper");
    if (action_kind == ActionKind::discrete && action_count < 2)
      throw ConfigError("discrete action spaces need at least two actions");
  }
};

// Ordered (name, value) pairs; order is stable so records serialize identically.
using RewardComponents = std::vector<std::pair<std::string, double>>;
using InfoMap = std::vector<std::pair<std::string, double>>;

struct StepResult {
  Observation observation;
  double reward = 0.0;
  RewardComponents reward_components;
  bool terminated = false;
  bool truncated = false;
  InfoMap info;

  bool done() const noexcept { return terminated || truncated; }

  // Sets reward to the sum of the components.
  void settle_reward() {
    reward = 0.0;
    for (const auto& [name, value] : reward_components) reward += value;
  }

  std::optional<double> component(std::string_view name) const {
    for (const auto& [n, v] : reward_components)
      if (n == name) return v;
    return std::nullopt;
  }

  std::optional<double> info_value(std::string_view name) const {
    for (const auto& [n, v] : info)
      if (n == name) return v;
    return std::nullopt;
  }
};

// Selects the dataset slice (year, profile, trading day) an episode runs on.
struct EpisodeConfig {
  std::size_t episode = 0;
};

struct CyclicTime {
  double cos_phi;
  double sin_phi;
};

// Maps tau in [0, period] onto the unit circle.
inline CyclicTime cyclic_encode(double tau, double period) {
  if (!(period > 0.0)) throw ConfigError("cyclic_encode: period must be > 0");
  const double phi = 2.0 * std::numbers::pi * (tau / period);
  return {std::cos(phi), std::sin(phi)};
}

inline double expect_continuous(const Action& action) {
  if (const auto* v = std::get_if<double>(&action)) return *v;
  throw UsageError("expected a continuous action");
}

inline std::int64_t expect_discrete(const Action& action, std::int64_t count) {
  const auto* v = std::get_if<std::int64_t>(&action);
  if (v == nullptr) throw UsageError("expected a discrete action");
  if (*v < 0 || *v >= count)
    throw UsageError("discrete action " + std::to_string(*v) + " outside [0, " +
                     std::to_string(count) + ")");
  return *v;
}

/// Uniform environment contract shared by every simulator.
///
/// reset() reseeds all random streams and returns the initial observation;
/// step() advances exactly one control period. Stepping after the episode
/// ended (terminated or truncated) is a usage error.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual const EnvSpec& spec() const = 0;

  // Number of distinct episode slices the loaded data supports.
  virtual std::size_t episode_count() const = 0;

  virtual Observation reset(std::uint64_t seed, const EpisodeConfig& episode = {}) = 0;
  virtual StepResult step(const Action& action) = 0;

  std::size_t steps_taken() const noexcept { return steps_; }
  double elapsed_seconds() const noexcept {
    return static_cast<double>(steps_) * spec().step_seconds;
  }
  bool finished() const noexcept { return finished_; }

 protected:
  void begin_episode() noexcept {
    steps_ = 0;
    finished_ = false;
    started_ = true;
  }

  void check_steppable() const {
    if (!started_) throw UsageError(name() + ": step() called before reset()");
    if (finished_) throw UsageError(name() + ": step() called on a finished episode");
  }

  void end_step(const StepResult& result) noexcept {
    ++steps_;
    finished_ = result.done();
  }

  std::size_t steps_ = 0;
  bool finished_ = false;
  bool started_ = false;
};

}  // namespace realgym
