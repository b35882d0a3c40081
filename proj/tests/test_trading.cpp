#include <gtest/gtest.h>

#include <cmath>

#include "realgym/policies.hpp"
#include "realgym/trading.hpp"

using namespace realgym;

namespace {

TradingParams no_fee() {
  TradingParams p;
  p.fee = 0.0;
  return p;
}

double play_constant(TradingEnv& env, std::size_t day, std::int64_t action, int* steps = nullptr) {
  env.reset(0, {day});
  double total = 0.0;
  int n = 0;
  StepResult r;
  do {
    r = env.step(action);
    total += r.reward;
    ++n;
  } while (!r.done());
  if (steps) *steps = n;
  return total;
}

}  // namespace

TEST(MidPrice, Examples) {
  EXPECT_NEAR(mid_price(1.1000, 1.1002), 1.1001, 1e-15);
  EXPECT_EQ(mid_price(1.25, 1.25), 1.25);
  EXPECT_THROW(mid_price(1.0, 0.9), DataError);
}

TEST(TradingParams, DerivedCounts) {
  const TradingParams p;
  EXPECT_EQ(p.session_minutes(), 600);
  EXPECT_EQ(p.warmup_minutes(), 60);
  EXPECT_EQ(p.decisions_per_session(), 108);
  TradingParams bad;
  bad.persistence = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  const auto q = TradingParams::from_config(
      Config::from_string("[trading]\nfees = 0\nreward_scaling = capital-scaled\n"));
  EXPECT_EQ(q.fee, 0.0);
  EXPECT_EQ(q.reward_scaling, RewardScaling::capital_scaled);
  EXPECT_THROW(TradingParams::from_config(Config::from_string("[trading]\nreward_scaling = eur\n")),
               ConfigError);
}

TEST(BuildObservation, ConstantPricesGiveZeroDeltas) {
  const std::vector<double> prices(601, 1.1);
  const TradingParams p;
  const auto obs = build_observation(prices, 60, p, 0);
  ASSERT_EQ(obs.size(), 63u);
  for (int k = 0; k < 60; ++k) EXPECT_EQ(obs[static_cast<std::size_t>(k)], 0.0);
  EXPECT_EQ(obs[60], 1.0);
  EXPECT_EQ(obs[61], 0.0);
  EXPECT_EQ(obs[62], 0.0);
}

TEST(BuildObservation, DeltaFormula) {
  std::vector<double> prices(601, 1.1000);
  prices[100] = 1.1011;
  const TradingParams p;
  const auto obs = build_observation(prices, 100, p, 1);
  EXPECT_NEAR(obs[0], 0.001, 1e-12);
  EXPECT_NEAR(obs[1], 0.0, 1e-15);
  EXPECT_EQ(obs[62], 1.0);
  EXPECT_THROW(build_observation(prices, 59, p, 0), UsageError);
}

TEST(TradingEnv, FlatDayReturnsZero) {
  TradingEnv env({}, synth_market_day(1, 0.0, 2e-4));
  EXPECT_EQ(play_constant(env, 0, kFlat), 0.0);
}

TEST(TradingEnv, FirstEntryFee) {
  TradingEnv env({}, synth_market_day(1, 0.0, 2e-4));
  env.reset(0);
  const auto r = env.step(std::int64_t{kLong});
  EXPECT_EQ(*r.component("fee"), -1.0);
  EXPECT_EQ(*env.step(std::int64_t{kLong}).component("fee"), 0.0);
  EXPECT_EQ(*env.step(std::int64_t{kShort}).component("fee"), -2.0);
}

TEST(TradingEnv, LongWindowPnl) {
  auto bars = synth_market_day(1, 0.0, 0.0, 19360, 1.1000, 2e-4);
  // Raise the mid at the end of the first decision window by 0.0010.
  bars.bid[65] += 0.0010;
  bars.ask[65] += 0.0010;
  TradingEnv env(no_fee(), bars);
  env.reset(0);
  const auto r = env.step(std::int64_t{kLong});
  EXPECT_NEAR(r.reward, 0.0010, 1e-15);
}

TEST(TradingEnv, TelescopingAndFees) {
  const auto bars = synth_market_days(5, 3, 0.0, 3e-4);
  TradingEnv free(no_fee(), bars), paid({}, bars);
  ASSERT_EQ(free.episode_count(), 3u);
  for (std::size_t d = 0; d < 3; ++d) {
    const auto& prices = free.session_prices(d);
    const double move = prices.back() - prices[60];
    int steps = 0;
    const double bh = play_constant(free, d, kLong, &steps);
    EXPECT_EQ(steps, 108);
    EXPECT_NEAR(bh, move, 1e-12);
    EXPECT_NEAR(play_constant(free, d, kShort), -move, 1e-12);
    EXPECT_NEAR(play_constant(paid, d, kLong), move - 2.0, 1e-12);
    EXPECT_NEAR(play_constant(paid, d, kShort), -move - 2.0, 1e-12);
  }
}

TEST(TradingEnv, EndsFlatAndRejectsFurtherSteps) {
  TradingEnv env({}, synth_market_day(2, 0.0, 1e-4));
  env.reset(0);
  StepResult r;
  do r = env.step(std::int64_t{kLong});
  while (!r.done());
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(env.state().position, 0);
  EXPECT_EQ(r.observation.back(), 0.0);
  EXPECT_EQ(env.state().bar, 600);
  EXPECT_THROW(env.step(std::int64_t{kFlat}), UsageError);
}

TEST(TradingEnv, CloseFeeCanBeDisabled) {
  auto p = TradingParams{};
  p.fee_on_close = false;
  TradingEnv env(p, synth_market_day(3, 0.0, 0.0));
  EXPECT_NEAR(play_constant(env, 0, kLong), -1.0, 1e-12);
}

TEST(TradingEnv, CapitalScaledPnl) {
  auto bars = synth_market_day(1, 0.0, 0.0, 19360, 1.1000, 2e-4);
  bars.bid[65] += 0.0011;
  bars.ask[65] += 0.0011;
  auto p = no_fee();
  p.reward_scaling = RewardScaling::capital_scaled;
  TradingEnv env(p, bars);
  env.reset(0);
  EXPECT_NEAR(env.step(std::int64_t{kLong}).reward, 100000.0 * 0.0011 / 1.1, 1e-9);
}

TEST(TradingEnv, IncompleteDaysSkipped) {
  auto bars = synth_market_day(1, 0.0, 1e-4, 19360);
  const auto second = synth_market_day(1, 0.0, 1e-4, 19361);
  for (std::size_t i = 0; i < second.size(); ++i)
    if (i != 300) bars.push_back(second.timestamps[i], second.bid[i], second.ask[i]);
  TradingEnv env({}, bars);
  EXPECT_EQ(env.episode_count(), 1u);
  EXPECT_EQ(env.skipped_days(), 1u);
  EXPECT_THROW(env.reset(0, {1}), DataError);
}

TEST(TradingEnv, SessionClockAndObservationPhase) {
  TradingEnv env({}, synth_market_day(1, 0.0, 1e-4));
  const auto obs = env.reset(0);
  EXPECT_EQ(obs[60], 1.0);
  EXPECT_EQ(obs[61], 0.0);
  env.step(std::int64_t{kFlat});
  EXPECT_EQ(env.elapsed_seconds(), 300.0);
}

TEST(TradingEnv, ZeroVolatilityBuyAndHoldPaysOnlyFees) {
  TradingEnv env({}, synth_market_day(9, 0.0, 0.0));
  EXPECT_EQ(play_constant(env, 0, kLong), -2.0);
}
