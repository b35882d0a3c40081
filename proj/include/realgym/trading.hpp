#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "realgym/config.hpp"
#include "realgym/core.hpp"
#include "realgym/data_io.hpp"

namespace realgym {

enum class RewardScaling { price_units, capital_scaled };

struct TradingParams {
  int n_deltas = 60;
  int delta_offset = 1;    // minutes
  int persistence = 5;     // minutes between decisions
  double capital = 100000.0;
  double fee = 1.0;        // per unit of position change
  std::int64_t session_open = kSessionOpenSeconds;   // seconds into the day
  std::int64_t session_close = kSessionCloseSeconds;
  RewardScaling reward_scaling = RewardScaling::price_units;
  bool fee_on_close = true;

  int session_minutes() const noexcept {
    return static_cast<int>((session_close - session_open) / kSecondsPerMinute);
  }
  int warmup_minutes() const noexcept { return n_deltas * delta_offset; }
  int decisions_per_session() const noexcept {
    return (session_minutes() - warmup_minutes()) / persistence;
  }

  void validate() const {
    if (n_deltas < 1) throw ConfigError("trading: n_deltas must be >= 1");
    if (delta_offset < 1) throw ConfigError("trading: delta_offset must be >= 1");
    if (persistence < 1) throw ConfigError("trading: persistence must be >= 1");
    if (!(session_open < session_close)) throw ConfigError("trading: session_open must precede session_close");
    if (session_open % kSecondsPerMinute != 0 || session_close % kSecondsPerMinute != 0)
      throw ConfigError("trading: session bounds must be whole minutes");
    if (fee < 0.0) throw ConfigError("trading: fee must be >= 0");
    if (!(capital > 0.0)) throw ConfigError("trading: capital must be > 0");
    if (decisions_per_session() < 1)
      throw ConfigError("trading: session too short for the warm-up and persistence");
  }

  static TradingParams from_config(const Config& cfg, const std::string& section = "trading") {
    TradingParams p;
    p.n_deltas = cfg.get(section, "n_deltas", p.n_deltas);
    p.delta_offset = cfg.get(section, "offset", p.delta_offset);
    p.persistence = cfg.get(section, "persistence", p.persistence);
    p.capital = cfg.get(section, "capital", p.capital);
    p.fee = cfg.get(section, "fees", p.fee);
    p.session_open = cfg.get(section, "session_open_minute", p.session_open / 60) * 60;
    p.session_close = cfg.get(section, "session_close_minute", p.session_close / 60) * 60;
    const auto scaling = cfg.get<std::string>(section, "reward_scaling", "price-units");
    if (scaling == "price-units") p.reward_scaling = RewardScaling::price_units;
    else if (scaling == "capital-scaled") p.reward_scaling = RewardScaling::capital_scaled;
    else throw ConfigError("trading: reward_scaling must be price-units or capital-scaled");
    p.fee_on_close = cfg.get(section, "fee_on_close", p.fee_on_close);
    p.validate();
    return p;
  }
};

inline double mid_price(double bid, double ask) {
  if (ask < bid) throw DataError("mid_price: ask below bid");
  return 0.5 * (bid + ask);
}

enum TradingAction : std::int64_t { kShort = 0, kFlat = 1, kLong = 2 };

inline int position_of(std::int64_t action) noexcept { return static_cast<int>(action) - 1; }

/// Observation at minute t of the session: n_deltas relative mid-price
/// changes (most recent first), the cyclic position of t within the
/// tradable part of the session, and the held position z in {-1, 0, 1}.
inline Observation build_observation(std::span<const double> prices, int t,
                                     const TradingParams& p, int position) {
  const int o = p.delta_offset;
  if (t < p.n_deltas * o || t >= static_cast<int>(prices.size()))
    throw UsageError("build_observation: insufficient price history at minute " + std::to_string(t));
  Observation obs;
  obs.reserve(static_cast<std::size_t>(p.n_deltas) + 3);
  for (int k = 0; k < p.n_deltas; ++k) {
    const double now = prices[static_cast<std::size_t>(t - k * o)];
    const double before = prices[static_cast<std::size_t>(t - (k + 1) * o)];
    obs.push_back((now - before) / before);
  }
  const int warmup = p.warmup_minutes();
  const auto enc = cyclic_encode(static_cast<double>(t - warmup),
                                 static_cast<double>(p.session_minutes() - warmup));
  obs.push_back(enc.cos_phi);
  obs.push_back(enc.sin_phi);
  obs.push_back(position);
  return obs;
}

struct TradingState {
  std::size_t day = 0;     // index into the usable days
  int bar = 0;             // minutes since session open
  int decision = 0;
  int position = 0;
  double realized_pnl = 0.0;
  std::size_t steps = 0;
  bool finished = false;

  friend bool operator==(const TradingState&, const TradingState&) = default;
};

/// Intraday single-asset trading over one session per episode.
///
/// Decisions are taken every `persistence` minutes after an observation-only
/// warm-up; the final decision's window runs to the close, where any open
/// position is flattened.
class TradingEnv final : public Environment {
 public:
  TradingEnv(TradingParams params, const MinuteBarSeries& bars) : params_(std::move(params)) {
    params_.validate();
    split_sessions(bars);
    spec_.observation_dim = static_cast<std::size_t>(params_.n_deltas) + 3;
    spec_.action_kind = ActionKind::discrete;
    spec_.action_count = 3;
    spec_.horizon = static_cast<std::size_t>(params_.decisions_per_session());
    spec_.step_seconds = static_cast<double>(params_.persistence * kSecondsPerMinute);
    spec_.validate();
  }

  std::string name() const override { return "trading"; }
  const EnvSpec& spec() const override { return spec_; }
  const TradingParams& params() const noexcept { return params_; }

  std::size_t episode_count() const override { return sessions_.size(); }
  std::size_t skipped_days() const noexcept { return skipped_days_; }
  std::int64_t session_day(std::size_t i) const { return session_days_.at(i); }
  const std::vector<double>& session_prices(std::size_t i) const { return sessions_.at(i); }

  Observation reset(std::uint64_t /*seed*/, const EpisodeConfig& episode = {}) override {
    if (episode.episode >= sessions_.size())
      throw DataError("trading: day " + std::to_string(episode.episode) + " not available (" +
                      std::to_string(sessions_.size()) + " complete sessions)");
    begin_episode();
    state_ = {};
    state_.day = episode.episode;
    state_.bar = params_.warmup_minutes();
    return build_observation(sessions_[state_.day], state_.bar, params_, state_.position);
  }

  StepResult step(const Action& action) override {
    check_steppable();
    const auto a = expect_discrete(action, spec_.action_count);
    const auto& prices = sessions_[state_.day];
    const int target = position_of(a);
    const int close = params_.session_minutes();
    const bool last = state_.decision + 1 >= params_.decisions_per_session();
    const int end = last ? close : state_.bar + params_.persistence;

    const double p0 = prices[static_cast<std::size_t>(state_.bar)];
    const double p1 = prices[static_cast<std::size_t>(end)];
    double pnl = target * (p1 - p0);
    if (params_.reward_scaling == RewardScaling::capital_scaled) pnl = params_.capital * pnl / p0;
    double fee = -params_.fee * std::abs(target - state_.position);
    if (last && params_.fee_on_close) fee -= params_.fee * std::abs(target);

    StepResult out;
    out.reward_components = {{"pnl", pnl}, {"fee", fee}};
    out.settle_reward();

    state_.position = last ? 0 : target;
    state_.bar = end;
    ++state_.decision;
    state_.realized_pnl += out.reward;
    out.truncated = last;
    out.observation = build_observation(prices, state_.bar, params_, state_.position);
    out.info = {{"mid_price", p1}, {"position", static_cast<double>(target)}};
    end_step(out);
    state_.steps = steps_;
    state_.finished = finished_;
    return out;
  }

  const TradingState& state() const noexcept { return state_; }
  TradingState snapshot() const { return state_; }
  void restore(const TradingState& s) {
    state_ = s;
    steps_ = s.steps;
    finished_ = s.finished;
    started_ = true;
  }

 private:
  // Keeps only days whose session is fully covered by consecutive minutes.
  void split_sessions(const MinuteBarSeries& bars) {
    const auto expected = static_cast<std::size_t>(params_.session_minutes()) + 1;
    std::size_t i = 0;
    while (i < bars.size()) {
      const auto day = day_of(bars.timestamps[i]);
      std::vector<double> mids;
      std::int64_t prev_ts = 0;
      bool contiguous = true;
      for (; i < bars.size() && day_of(bars.timestamps[i]) == day; ++i) {
        const auto tod = seconds_into_day(bars.timestamps[i]);
        if (tod < params_.session_open || tod > params_.session_close) continue;
        if (mids.empty() ? tod != params_.session_open
                         : bars.timestamps[i] - prev_ts != kSecondsPerMinute)
          contiguous = false;
        prev_ts = bars.timestamps[i];
        mids.push_back(mid_price(bars.bid[i], bars.ask[i]));
      }
      if (contiguous && mids.size() == expected) {
        sessions_.push_back(std::move(mids));
        session_days_.push_back(day);
      } else {
        ++skipped_days_;
      }
    }
  }

  TradingParams params_;
  EnvSpec spec_;
  std::vector<std::vector<double>> sessions_;
  std::vector<std::int64_t> session_days_;
  std::size_t skipped_days_ = 0;
  TradingState state_;
};

}  // namespace realgym
