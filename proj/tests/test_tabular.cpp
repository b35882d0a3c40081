#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "realgym/tabular.hpp"
#include "toy_mdp.hpp"

using namespace realgym;
using namespace realgym::testing;

TEST(ElevatorIndexer, OriginAndSize) {
  const ElevatorParams p;
  const ElevatorIndexer idx(p);
  EXPECT_EQ(idx(Observation(10, 0.0)), 0u);
  EXPECT_EQ(idx.size(), 9u * 5 * 4 * 4 * 4 * 4 * 3 * 3 * 3 * 3);
  const Observation top{8, 4, 3, 3, 3, 3, 2, 2, 2, 2};
  EXPECT_EQ(idx(top), idx.size() - 1);
}

TEST(ElevatorIndexer, RoundTrip) {
  const ElevatorIndexer idx(ElevatorParams{});
  RngStream rng(17, 0);
  for (int i = 0; i < 10000; ++i) {
    const auto k = rng.uniform_int(idx.size());
    ASSERT_EQ(idx(idx.inverse(k)), k);
  }
}

TEST(ElevatorIndexer, ReducedConfigSize) {
  ElevatorParams p;
  p.floors = 3;
  p.max_queue = 2;
  const ElevatorIndexer idx(p);
  EXPECT_EQ(idx.size(), 7u * 5 * 3 * 3 * 3 * 3 * 3 * 3);
}

TEST(ElevatorIndexer, RejectsOutOfRange) {
  const ElevatorIndexer idx(ElevatorParams{});
  EXPECT_THROW(idx(Observation{9, 0, 0, 0, 0, 0, 0, 0, 0, 0}), UsageError);
  EXPECT_THROW(idx(Observation{0, 0, 0, 0, 0, 0, 0, 0, 0, 3}), UsageError);
  EXPECT_THROW(idx(Observation{0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0}), UsageError);
  EXPECT_THROW(idx(Observation{0, 0}), UsageError);
  EXPECT_THROW(idx.inverse(idx.size()), UsageError);
}

TEST(QUpdate, BanditReduction) {
  QTable q(2);
  EXPECT_DOUBLE_EQ(q_update(q, 0, 1, 5.0, 3, std::nullopt, {StepSizeRule::constant, 0.5}, 0.0), 2.5);
  EXPECT_EQ(q.visits(0, 1), 1u);
  EXPECT_EQ(q.visits(0, 0), 0u);
}

TEST(QUpdate, RepeatedTerminalUpdatesApproachReward) {
  QTable q(1);
  const StepSize step{StepSizeRule::constant, 0.3};
  for (int n = 1; n <= 60; ++n) {
    const double v = q_update(q, 0, 0, 4.0, 0, std::nullopt, step, 1.0, true);
    ASSERT_NEAR(v, 4.0 * (1.0 - std::pow(0.7, n)), 1e-12);
  }
}

TEST(QUpdate, SarsaMatchesQLearningOnGreedyNextAction) {
  QTable a(3), b(3);
  for (auto* t : {&a, &b}) {
    t->set(5, 0, 1.0);
    t->set(5, 1, 4.0);
    t->set(5, 2, -2.0);
  }
  const StepSize step{StepSizeRule::constant, 0.25};
  const double ql = q_update(a, 1, 2, 1.0, 5, std::nullopt, step, 0.9);
  const double sarsa = q_update(b, 1, 2, 1.0, 5, a.greedy(5), step, 0.9);
  EXPECT_EQ(ql, sarsa);
  QTable c(3);
  c.set(5, 1, 4.0);
  EXPECT_DOUBLE_EQ(q_update(c, 1, 2, 1.0, 5, std::size_t{0}, step, 0.9), 0.25);
}

TEST(QUpdate, InverseVisitsAverages) {
  QTable q(1);
  const StepSize step{StepSizeRule::inverse_visits, 0.0};
  for (double r : {2.0, 4.0, 9.0}) q_update(q, 0, 0, r, 0, std::nullopt, step, 0.0, true);
  EXPECT_DOUBLE_EQ(q.value(0, 0), 5.0);
}

TEST(EpsilonGreedy, NonGreedyFrequency) {
  QTable q(3);
  q.set(0, 1, 1.0);
  RngStream rng(123, 0);
  const int n = 100000;
  int other = 0;
  for (int i = 0; i < n; ++i) other += epsilon_greedy(q, 0, 0.2, rng) != 1;
  const double p = 0.2 * 2.0 / 3.0;
  EXPECT_NEAR(static_cast<double>(other) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(QTable, ArgmaxStableUnderPositiveScaling) {
  RngStream rng(8, 0);
  QTable q(4);
  for (StateIndex s = 0; s < 200; ++s)
    for (std::size_t a = 0; a < 4; ++a) q.set(s, a, rng.uniform(-10, 10));
  q.set(200, 1, 3.0);
  q.set(200, 3, 3.0);
  std::vector<std::size_t> before;
  for (StateIndex s = 0; s <= 200; ++s) before.push_back(q.greedy(s));
  EXPECT_EQ(before.back(), 1u);
  for (double k : {0.001, 3.7, 1e6}) {
    QTable scaled = q;
    scaled.scale(k);
    for (StateIndex s = 0; s <= 200; ++s) ASSERT_EQ(scaled.greedy(s), before[s]);
  }
}

TEST(QTable, UnvisitedReadsZeroAndTiesPickLowest) {
  QTable q(3);
  EXPECT_EQ(q.value(42, 2), 0.0);
  EXPECT_EQ(q.greedy(42), 0u);
  EXPECT_EQ(q.visited_states(), 0u);
}

TEST(QTable, SaveLoadRoundTrip) {
  QTable q(3);
  q.set(7, 0, 0.1);
  q.set(7, 2, -1.0 / 3.0);
  q.set(933119, 1, 1e-300);
  std::stringstream ss;
  q.save(ss);
  EXPECT_EQ(QTable::load(ss), q);
  std::stringstream bad("qtable 3 2\n7 1 2 3\n");
  EXPECT_THROW(QTable::load(bad), DataError);
  std::stringstream junk("hello");
  EXPECT_THROW(QTable::load(junk), DataError);
}

TEST(TrainConfig, EpsilonSchedule) {
  const TrainConfig c;
  for (std::size_t k : {0u, 1u, 10u, 100u, 298u, 299u, 1000u})
    EXPECT_DOUBLE_EQ(epsilon_after(c, k), std::max(0.05, std::pow(0.99, static_cast<double>(k))));
  TrainConfig bad;
  bad.epsilon_decay = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.patience = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(TrainTabular, QLearningMatchesValueIteration) {
  const auto run = q_learning_against_vi(four_state_mdp(), 0.2, 0.3, 100000, 42);
  EXPECT_LT(run.max_abs_error, 1e-3);
}

TEST(TrainTabular, TwoStateGreedyMatchesPolicyEnumeration) {
  const auto mdp = two_state_mdp();
  const double gamma = 0.9;
  // Best deterministic policy by exhaustive enumeration.
  std::vector<int> best;
  std::vector<double> best_v;
  for (int a0 = 0; a0 < 2; ++a0)
    for (int a1 = 0; a1 < 2; ++a1) {
      const auto v = policy_value(mdp, {a0, a1}, gamma);
      if (best.empty() || (v[0] >= best_v[0] && v[1] >= best_v[1])) {
        best = {a0, a1};
        best_v = v;
      }
    }

  for (auto algo : {TabularAlgorithm::q_learning, TabularAlgorithm::sarsa}) {
    TrainConfig cfg;
    cfg.gamma = gamma;
    cfg.episodes_max = 2000;
    cfg.eval_every = 50;
    cfg.eval_episodes = 4;
    cfg.patience = 1000;
    cfg.bootstrap_on_truncation = true;
    cfg.step_size = {StepSizeRule::constant, 0.2};
    const auto res = train_tabular([&] { return std::make_unique<ToyMdpEnv>(mdp, 30); },
                                   [](const Observation& o) { return static_cast<StateIndex>(o[0]); },
                                   cfg, algo);
    EXPECT_EQ(static_cast<int>(res.table.greedy(0)), best[0]);
    EXPECT_EQ(static_cast<int>(res.table.greedy(1)), best[1]);
  }
}

TEST(TrainTabular, ZeroArrivalElevatorReturnsZero) {
  ElevatorParams p;
  p.floors = 2;
  p.horizon = 50;
  p.arrival_rates = std::vector<double>{0.0, 0.0};
  const ElevatorIndexer idx(p);
  TrainConfig cfg;
  cfg.episodes_max = 30;
  cfg.eval_every = 10;
  cfg.eval_episodes = 3;
  const auto res = train_tabular([&] { return std::make_unique<ElevatorEnv>(p); }, idx, cfg,
                                 TabularAlgorithm::q_learning);
  ASSERT_FALSE(res.curve.empty());
  for (const auto& pt : res.curve) EXPECT_EQ(pt.mean_return, 0.0);
}

TEST(TrainTabular, EarlyStopsAfterPatience) {
  ElevatorParams p;
  p.floors = 1;
  p.horizon = 20;
  p.arrival_rates = std::vector<double>{0.0};
  TrainConfig cfg;
  cfg.episodes_max = 100000;
  cfg.eval_every = 5;
  cfg.eval_episodes = 2;
  cfg.patience = 3;
  const auto res = train_tabular([&] { return std::make_unique<ElevatorEnv>(p); },
                                 ElevatorIndexer(p), cfg, TabularAlgorithm::sarsa);
  // First evaluation sets the best; three stale ones follow.
  EXPECT_TRUE(res.early_stopped);
  EXPECT_EQ(res.curve.size(), 4u);
  EXPECT_EQ(res.episodes_run, 20u);
}

TEST(TrainTabular, RejectsContinuousEnvironments) {
  struct Cont final : Environment {
    EnvSpec s{1, ActionKind::continuous, {0, 1}, 0, 1, 1};
    std::string name() const override { return "cont"; }
    const EnvSpec& spec() const override { return s; }
    std::size_t episode_count() const override { return 1; }
    Observation reset(std::uint64_t, const EpisodeConfig&) override { return {0}; }
    StepResult step(const Action&) override { return {}; }
  };
  EXPECT_THROW(train_tabular([] { return std::make_unique<Cont>(); },
                             [](const Observation&) { return StateIndex{0}; }, {},
                             TabularAlgorithm::q_learning),
               UsageError);
}

TEST(TrainTabular, DeterministicForSeed) {
  ElevatorParams p;
  p.floors = 2;
  p.horizon = 100;
  TrainConfig cfg;
  cfg.episodes_max = 40;
  cfg.eval_every = 20;
  cfg.eval_episodes = 3;
  auto run = [&] {
    return train_tabular([&] { return std::make_unique<ElevatorEnv>(p); }, ElevatorIndexer(p), cfg,
                         TabularAlgorithm::q_learning);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.table, b.table);
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) EXPECT_EQ(a.curve[i].mean_return, b.curve[i].mean_return);
}
