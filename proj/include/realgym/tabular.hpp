#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "realgym/core.hpp"
#include "realgym/elevator.hpp"
#include "realgym/policies.hpp"
#include "realgym/rng.hpp"

namespace realgym {

using StateIndex = std::uint64_t;

/// Mixed-radix bijection between elevator observations and integers.
/// Digits, least significant first: h, c, w_1..w_F, k_1..k_F.
class ElevatorIndexer {
 public:
  explicit ElevatorIndexer(const ElevatorParams& p) {
    radices_.push_back(static_cast<StateIndex>(p.max_height()) + 1);
    radices_.push_back(static_cast<StateIndex>(p.capacity) + 1);
    for (int f = 0; f < p.floors; ++f) radices_.push_back(static_cast<StateIndex>(p.max_queue) + 1);
    for (int f = 0; f < p.floors; ++f)
      radices_.push_back(static_cast<StateIndex>(p.max_new_arrivals) + 1);
    size_ = 1;
    for (auto r : radices_) size_ *= r;
  }

  StateIndex size() const noexcept { return size_; }
  const std::vector<StateIndex>& radices() const noexcept { return radices_; }

  StateIndex operator()(const Observation& obs) const { return index(obs); }

  StateIndex index(const Observation& obs) const {
    if (obs.size() != radices_.size())
      throw UsageError("state_index: observation has " + std::to_string(obs.size()) +
                       " components, expected " + std::to_string(radices_.size()));
    StateIndex idx = 0;
    StateIndex scale = 1;
    for (std::size_t i = 0; i < radices_.size(); ++i) {
      const double v = obs[i];
      if (!(v >= 0.0) || v != std::floor(v) || static_cast<StateIndex>(v) >= radices_[i])
        throw UsageError("state_index: component " + std::to_string(i) + " out of range");
      idx += static_cast<StateIndex>(v) * scale;
      scale *= radices_[i];
    }
    return idx;
  }

  Observation inverse(StateIndex idx) const {
    if (idx >= size_) throw UsageError("state_index: index out of range");
    Observation obs;
    obs.reserve(radices_.size());
    for (auto r : radices_) {
      obs.push_back(static_cast<double>(idx % r));
      idx /= r;
    }
    return obs;
  }

 private:
  std::vector<StateIndex> radices_;
  StateIndex size_ = 1;
};

/// Sparse action-value table. Unvisited states read as all zeros.
class QTable {
 public:
  explicit QTable(std::size_t action_count = 0) : actions_(action_count) {}

  std::size_t action_count() const noexcept { return actions_; }
  std::size_t visited_states() const noexcept { return entries_.size(); }

  double value(StateIndex s, std::size_t a) const {
    const auto it = entries_.find(s);
    return it == entries_.end() ? 0.0 : it->second.q[a];
  }

  std::uint64_t visits(StateIndex s, std::size_t a) const {
    const auto it = entries_.find(s);
    return it == entries_.end() ? 0 : it->second.visits[a];
  }

  void set(StateIndex s, std::size_t a, double v) { entry(s).q[a] = v; }

  double max_value(StateIndex s) const {
    const auto it = entries_.find(s);
    if (it == entries_.end()) return 0.0;
    return *std::max_element(it->second.q.begin(), it->second.q.end());
  }

  // Greedy action; ties resolve to the lowest index.
  std::size_t greedy(StateIndex s) const {
    const auto it = entries_.find(s);
    if (it == entries_.end()) return 0;
    const auto& q = it->second.q;
    return static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
  }

  // Increments and returns the visit count of (s, a).
  std::uint64_t visit(StateIndex s, std::size_t a) { return ++entry(s).visits[a]; }

  void scale(double k) {
    for (auto& [s, e] : entries_)
      for (auto& v : e.q) v *= k;
  }

  /// Text dump: a header line, then "index q_0 ... q_{n-1}" per visited
  /// state in increasing index order. Values use round-trip precision.
  void save(std::ostream& out) const {
    out << "qtable " << actions_ << ' ' << entries_.size() << '\n';
    std::map<StateIndex, const Entry*> ordered;
    for (const auto& [s, e] : entries_) ordered.emplace(s, &e);
    char buf[32];
    for (const auto& [s, e] : ordered) {
      out << s;
      for (double v : e->q) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ' ' << buf;
      }
      out << '\n';
    }
  }

  static QTable load(std::istream& in) {
    std::string magic;
    std::size_t actions = 0, count = 0;
    if (!(in >> magic >> actions >> count) || magic != "qtable" || actions == 0)
      throw DataError("qtable: bad header");
    QTable t(actions);
    for (std::size_t i = 0; i < count; ++i) {
      StateIndex s = 0;
      if (!(in >> s)) throw DataError("qtable: truncated at entry " + std::to_string(i));
      auto& e = t.entry(s);
      for (std::size_t a = 0; a < actions; ++a)
        if (!(in >> e.q[a])) throw DataError("qtable: truncated at entry " + std::to_string(i));
    }
    return t;
  }

  friend bool operator==(const QTable& a, const QTable& b) {
    if (a.actions_ != b.actions_ || a.entries_.size() != b.entries_.size()) return false;
    for (const auto& [s, e] : a.entries_) {
      const auto it = b.entries_.find(s);
      if (it == b.entries_.end() || it->second.q != e.q) return false;
    }
    return true;
  }

 private:
  struct Entry {
    std::vector<double> q;
    std::vector<std::uint64_t> visits;
  };

  Entry& entry(StateIndex s) {
    auto [it, inserted] = entries_.try_emplace(s);
    if (inserted) {
      it->second.q.assign(actions_, 0.0);
      it->second.visits.assign(actions_, 0);
    }
    return it->second;
  }

  std::size_t actions_;
  std::unordered_map<StateIndex, Entry> entries_;
};

enum class TabularAlgorithm { q_learning, sarsa };
enum class StepSizeRule { constant, inverse_visits };

struct StepSize {
  StepSizeRule rule = StepSizeRule::constant;
  double alpha = 0.1;
};

/// One temporal-difference update of Q(s, a).
///
/// Q-Learning bootstraps on max_b Q(s', b); SARSA (next_action set) on
/// Q(s', a'). A terminal transition does not bootstrap. Returns the new
/// Q(s, a).
inline double q_update(QTable& table, StateIndex s, std::size_t a, double reward, StateIndex next,
                       std::optional<std::size_t> next_action, StepSize step, double gamma,
                       bool terminal = false) {
  const auto n = table.visit(s, a);
  const double alpha =
      step.rule == StepSizeRule::inverse_visits ? 1.0 / static_cast<double>(n) : step.alpha;
  double target = reward;
  if (!terminal)
    target += gamma * (next_action ? table.value(next, *next_action) : table.max_value(next));
  const double q = table.value(s, a);
  const double updated = q + alpha * (target - q);
  table.set(s, a, updated);
  return updated;
}

// With probability epsilon a uniformly random action, otherwise greedy.
inline std::size_t epsilon_greedy(const QTable& table, StateIndex s, double epsilon, RngStream& rng) {
  if (rng.uniform() < epsilon) return static_cast<std::size_t>(rng.uniform_int(table.action_count()));
  return table.greedy(s);
}

struct TrainConfig {
  std::size_t episodes_max = 100000;
  double gamma = 1.0;
  double epsilon_init = 1.0;
  double epsilon_decay = 0.99;
  double epsilon_min = 0.05;
  double tolerance = 0.1;
  std::size_t patience = 10;
  std::size_t eval_every = 100;
  std::size_t eval_episodes = 30;
  StepSize step_size{};
  bool bootstrap_on_truncation = false;
  std::uint64_t seed = 42;
  std::uint64_t eval_seed = 1'000'003;

  void validate() const {
    if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0))
      throw ConfigError("train: epsilon_decay must be in (0, 1]");
    if (patience < 1) throw ConfigError("train: patience must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("train: gamma must be in [0, 1]");
    if (step_size.rule == StepSizeRule::constant && !(step_size.alpha > 0.0 && step_size.alpha <= 1.0))
      throw ConfigError("train: learning rate must be in (0, 1]");
    if (eval_every < 1 || eval_episodes < 1)
      throw ConfigError("train: eval_every and eval_episodes must be >= 1");
    if (episodes_max < 1) throw ConfigError("train: episodes_max must be >= 1");
  }
};

inline double epsilon_after(const TrainConfig& c, std::size_t decays) {
  return std::max(c.epsilon_min, c.epsilon_init * std::pow(c.epsilon_decay, static_cast<double>(decays)));
}

struct EvalPoint {
  std::size_t episode;  // training episodes completed
  double mean_return;
  double ci95_half_width;
  double epsilon;
};

struct TrainResult {
  QTable table;       // at the end of training
  QTable best_table;  // at the best evaluation
  std::vector<EvalPoint> curve;
  std::size_t episodes_run = 0;
  bool early_stopped = false;
  double best_mean = -std::numeric_limits<double>::infinity();
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;
using ObservationIndexer = std::function<StateIndex(const Observation&)>;

inline std::uint64_t train_episode_seed(std::uint64_t seed, std::size_t episode) {
  return mix_seed(seed, episode);
}

/// Greedy evaluation over a fixed set of episode seeds.
inline std::vector<double> evaluate_greedy(Environment& env, const ObservationIndexer& index,
                                           const QTable& table, std::uint64_t eval_seed,
                                           std::size_t episodes) {
  std::vector<double> returns;
  returns.reserve(episodes);
  const auto slices = env.episode_count();
  for (std::size_t e = 0; e < episodes; ++e) {
    auto obs = env.reset(mix_seed(eval_seed, e), {e % slices});
    double total = 0.0;
    while (true) {
      const auto a = static_cast<std::int64_t>(table.greedy(index(obs)));
      auto res = env.step(a);
      total += res.reward;
      if (res.done()) break;
      obs = std::move(res.observation);
    }
    returns.push_back(total);
  }
  return returns;
}

inline std::pair<double, double> mean_and_ci95(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

/// Epsilon-greedy tabular training with periodic greedy evaluation and
/// early stopping once `patience` consecutive evaluations fail to beat the
/// best mean return by more than `tolerance`.
inline TrainResult train_tabular(const EnvFactory& factory, const ObservationIndexer& index,
                                 const TrainConfig& cfg, TabularAlgorithm algorithm) {
  cfg.validate();
  auto env = factory();
  auto eval_env = factory();
  if (env->spec().action_kind != ActionKind::discrete)
    throw UsageError("train_tabular: environment '" + env->name() + "' has no discrete actions");
  const auto actions = static_cast<std::size_t>(env->spec().action_count);

  TrainResult result{QTable(actions), QTable(actions), {}, 0, false};
  QTable& q = result.table;
  RngStream explore(cfg.seed, 7);
  const auto slices = env->episode_count();
  double epsilon = cfg.epsilon_init;
  std::size_t stale = 0;

  for (std::size_t ep = 0; ep < cfg.episodes_max; ++ep) {
    auto obs = env->reset(train_episode_seed(cfg.seed, ep), {ep % slices});
    StateIndex s = index(obs);
    std::size_t a = epsilon_greedy(q, s, epsilon, explore);
    while (true) {
      auto res = env->step(static_cast<std::int64_t>(a));
      const StateIndex s2 = index(res.observation);
      const bool terminal = res.terminated || (res.truncated && !cfg.bootstrap_on_truncation);
      const std::size_t a2 = epsilon_greedy(q, s2, epsilon, explore);
      if (algorithm == TabularAlgorithm::sarsa)
        q_update(q, s, a, res.reward, s2, a2, cfg.step_size, cfg.gamma, terminal);
      else
        q_update(q, s, a, res.reward, s2, std::nullopt, cfg.step_size, cfg.gamma, terminal);
      if (res.done()) break;
      s = s2;
      a = a2;
    }
    epsilon = std::max(cfg.epsilon_min, epsilon * cfg.epsilon_decay);
    result.episodes_run = ep + 1;

    if ((ep + 1) % cfg.eval_every == 0) {
      const auto returns = evaluate_greedy(*eval_env, index, q, cfg.eval_seed, cfg.eval_episodes);
      const auto [mean, hw] = mean_and_ci95(returns);
      result.curve.push_back({ep + 1, mean, hw, epsilon});
      if (mean > result.best_mean + cfg.tolerance) {
        result.best_mean = mean;
        result.best_table = q;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        result.early_stopped = true;
        break;
      }
    }
  }
  if (result.curve.empty()) result.best_table = q;
  return result;
}

/// Greedy policy read from a trained table.
class TabularPolicy final : public Policy {
 public:
  TabularPolicy(QTable table, ObservationIndexer index)
      : table_(std::move(table)), index_(std::move(index)) {}
  std::string name() const override { return "tabular"; }
  Action act(const Observation& obs, RngStream&) override {
    return static_cast<std::int64_t>(table_.greedy(index_(obs)));
  }
  const QTable& table() const noexcept { return table_; }

 private:
  QTable table_;
  ObservationIndexer index_;
};

}  // namespace realgym
