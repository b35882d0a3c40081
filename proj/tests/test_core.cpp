#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "realgym/config.hpp"
#include "realgym/core.hpp"
#include "realgym/rng.hpp"

using namespace realgym;

TEST(CyclicEncode, QuarterPoints) {
  auto e = cyclic_encode(0, 86400);
  EXPECT_DOUBLE_EQ(e.cos_phi, 1.0);
  EXPECT_DOUBLE_EQ(e.sin_phi, 0.0);
  e = cyclic_encode(21600, 86400);
  EXPECT_NEAR(e.cos_phi, 0.0, 1e-15);
  EXPECT_NEAR(e.sin_phi, 1.0, 1e-15);
  e = cyclic_encode(43200, 86400);
  EXPECT_NEAR(e.cos_phi, -1.0, 1e-15);
  EXPECT_NEAR(e.sin_phi, 0.0, 1e-15);
}

TEST(CyclicEncode, UnitCircle) {
  for (int i = 0; i <= 1000; ++i) {
    const auto e = cyclic_encode(i * 86.4, 86400);
    EXPECT_NEAR(e.cos_phi * e.cos_phi + e.sin_phi * e.sin_phi, 1.0, 1e-12);
  }
}

TEST(CyclicEncode, RejectsNonPositivePeriod) {
  EXPECT_THROW(cyclic_encode(1, 0), ConfigError);
  EXPECT_THROW(cyclic_encode(1, -5), ConfigError);
}

TEST(RngStream, SameSeedAndStreamRepeat) {
  RngStream a(42, 3), b(42, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, StreamsDiffer) {
  RngStream a(42, 3), b(42, 4), c(43, 3);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    same_b += x == b.next_u64();
    same_c += x == c.next_u64();
  }
  EXPECT_EQ(same_b, 0);
  EXPECT_EQ(same_c, 0);
}

// Pinned values guard against accidental changes to the generator.
TEST(RngStream, KnownSplitmixValues) {
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(splitmix64(0x9E3779B97F4A7C15ull), 0x6E789E6AA1B965F4ull);
}

TEST(RngStream, CounterRewindReplays) {
  RngStream a(7, 1);
  a.next_u64();
  const auto saved = a.counter();
  const auto x = a.uniform();
  a.set_counter(saved);
  EXPECT_EQ(a.uniform(), x);
}

TEST(RngStream, UniformMomentsAndRange) {
  RngStream r(1, 0);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
}

TEST(RngStream, UniformIntCoversRange) {
  RngStream r(5, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.uniform_int(3);
    ASSERT_LT(v, 3u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 3u);
}

TEST(RngStream, NormalMoments) {
  RngStream r(9, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 4 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(RngStream, PoissonMeanSmallAndLargeRates) {
  for (double rate : {0.05, 3.0, 75.0}) {
    RngStream r(11, static_cast<std::uint64_t>(rate * 100));
    const int n = 50000;
    double s = 0;
    for (int i = 0; i < n; ++i) s += static_cast<double>(r.poisson(rate));
    EXPECT_NEAR(s / n, rate, 4 * std::sqrt(rate / n)) << "rate " << rate;
  }
  RngStream r(0, 0);
  EXPECT_EQ(r.poisson(0.0), 0u);
}

TEST(EnvSpec, Validation) {
  EnvSpec s;
  s.horizon = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.horizon = 10;
  s.action_bounds = {1.0, 1.0};
  EXPECT_THROW(s.validate(), ConfigError);
  s.action_kind = ActionKind::discrete;
  s.action_count = 1;
  EXPECT_THROW(s.validate(), ConfigError);
  s.action_count = 2;
  EXPECT_NO_THROW(s.validate());
}

TEST(StepResult, SettleSumsComponents) {
  StepResult r;
  r.reward_components = {{"a", 1.5}, {"b", -0.25}, {"c", 2.0}};
  r.settle_reward();
  EXPECT_DOUBLE_EQ(r.reward, 3.25);
  EXPECT_EQ(r.component("b"), -0.25);
  EXPECT_FALSE(r.component("zzz").has_value());
  EXPECT_FALSE(r.done());
  r.truncated = true;
  EXPECT_TRUE(r.done());
}

TEST(Actions, KindChecks) {
  EXPECT_EQ(expect_continuous(Action{2.5}), 2.5);
  EXPECT_THROW(expect_continuous(Action{std::int64_t{1}}), UsageError);
  EXPECT_EQ(expect_discrete(Action{std::int64_t{2}}, 3), 2);
  EXPECT_THROW(expect_discrete(Action{std::int64_t{3}}, 3), UsageError);
  EXPECT_THROW(expect_discrete(Action{std::int64_t{-1}}, 3), UsageError);
  EXPECT_THROW(expect_discrete(Action{0.0}, 3), UsageError);
}

TEST(Config, ParsesSectionsAndTypes) {
  const auto c = Config::from_string(
      "[dam]\nintegration = 12\nsurface_area = 100.5\n"
      "[elevator]\narrival_rates = 0.1, 0.2,0.3\nflag = true\nname = abc\n");
  EXPECT_EQ(c.get("dam", "integration", 0), 12);
  EXPECT_DOUBLE_EQ(c.get("dam", "surface_area", 0.0), 100.5);
  EXPECT_EQ(c.get("dam", "missing", 7), 7);
  EXPECT_TRUE(c.get("elevator", "flag", false));
  EXPECT_EQ(c.get<std::string>("elevator", "name", ""), "abc");
  EXPECT_EQ(c.get_list("elevator", "arrival_rates", {}), (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_TRUE(c.has("dam", "integration"));
  EXPECT_FALSE(c.has("trading", "fees"));
}

TEST(Config, BadValuesAreConfigErrors) {
  const auto c = Config::from_string("[dam]\nintegration = twelve\nlevel = 1.5x\n");
  EXPECT_THROW(c.get("dam", "integration", 0), ConfigError);
  EXPECT_THROW(c.get("dam", "level", 0.0), ConfigError);
  EXPECT_THROW(Config::from_string("[dam\nx=1\n"), ConfigError);
  EXPECT_THROW(Config::from_file("/nonexistent/realgym.ini"), ConfigError);
}
