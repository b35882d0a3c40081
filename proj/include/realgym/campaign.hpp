#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "realgym/config.hpp"
#include "realgym/core.hpp"
#include "realgym/dam.hpp"
#include "realgym/data_io.hpp"
#include "realgym/elevator.hpp"
#include "realgym/microgrid.hpp"
#include "realgym/policies.hpp"
#include "realgym/stats.hpp"
#include "realgym/tabular.hpp"
#include "realgym/trading.hpp"

namespace realgym {

inline constexpr int kReportSchemaVersion = 1;

inline const std::vector<std::string>& environment_names() {
  static const std::vector<std::string> names{"dam", "elevator", "microgrid", "trading"};
  return names;
}

/// Builds an environment. Datasets come from the CSV paths named in the
/// env's config section when present, otherwise from the synthetic
/// generators seeded with `data_seed` and sized for `episodes` episodes.
inline std::unique_ptr<Environment> make_env(const std::string& name, const Config& cfg,
                                             std::uint64_t data_seed, std::size_t episodes) {
  episodes = std::max<std::size_t>(episodes, 1);
  if (name == "dam") {
    auto params = DamParams::from_config(cfg);
    DamProfiles data;
    if (cfg.has("dam", "inflow_csv") || cfg.has("dam", "demand_csv")) {
      data.inflow = load_daily_csv(cfg.get<std::string>("dam", "inflow_csv", ""), "inflow");
      data.demand = load_daily_csv(cfg.get<std::string>("dam", "demand_csv", ""), "demand");
    } else {
      data = synth_dam_profiles(data_seed, episodes);
    }
    return std::make_unique<DamEnv>(std::move(params), std::move(data));
  }
  if (name == "elevator") return std::make_unique<ElevatorEnv>(ElevatorParams::from_config(cfg));
  if (name == "microgrid") {
    auto params = MicrogridParams::from_config(cfg);
    MicrogridProfiles data;
    if (cfg.has("microgrid", "demand_csv")) {
      const auto path = [&](const char* key) { return cfg.get<std::string>("microgrid", key, ""); };
      data.demand = load_hourly_csv(path("demand_csv"), "demand");
      data.generation = load_hourly_csv(path("generation_csv"), "generation");
      data.price_buy = load_hourly_csv(path("price_buy_csv"), "price_buy");
      data.price_sell = load_hourly_csv(path("price_sell_csv"), "price_sell");
      data.temperature = load_daily_csv(path("temperature_csv"), "temperature");
    } else {
      data = synth_microgrid_profiles(data_seed, episodes);
    }
    return std::make_unique<MicrogridEnv>(std::move(params), std::move(data));
  }
  if (name == "trading") {
    auto params = TradingParams::from_config(cfg);
    MinuteBarSeries bars;
    if (cfg.has("trading", "bars_csv")) {
      bars = preprocess_ticks(
          resample_to_minutes(load_minute_bars_csv(cfg.get<std::string>("trading", "bars_csv", ""))),
          cfg.get("trading", "max_gap_minutes", 5));
    } else {
      bars = synth_market_days(data_seed, episodes, cfg.get("trading", "drift", 0.0),
                               cfg.get("trading", "volatility", 1e-4));
    }
    return std::make_unique<TradingEnv>(std::move(params), bars);
  }
  throw ConfigError("unknown environment '" + name + "'");
}

inline std::string canonical_policy_name(const std::string& name) {
  static const std::vector<std::pair<std::string, std::string>> aliases{
      {"mean", "dam-mean"}, {"max", "dam-max"},      {"ead", "dam-ead"},
      {"lf", "elevator-lf"}, {"sf", "elevator-sf"},  {"om", "mg-om"},
      {"bf", "mg-bf"},       {"5050", "mg-5050"},    {"50-50", "mg-5050"},
      {"bh", "trade-bh"},    {"sh", "trade-sh"},     {"flat", "trade-flat"}};
  for (const auto& [alias, full] : aliases)
    if (name == alias) return full;
  return name;
}

// Environment a policy kind belongs to; empty for env-agnostic kinds.
inline std::string policy_environment(const std::string& kind) {
  if (kind == "random") return "";
  if (kind.rfind("dam-", 0) == 0) return "dam";
  if (kind.rfind("elevator-", 0) == 0 || kind == "tabular") return "elevator";
  if (kind.rfind("mg-", 0) == 0) return "microgrid";
  if (kind.rfind("trade-", 0) == 0) return "trading";
  throw ConfigError("unknown policy '" + kind + "'");
}

/// Instantiates a policy for `env`. Policy parameters live in [policy]:
/// dam_action_range, ead_smoothing, qtable.
inline std::unique_ptr<Policy> make_policy(const std::string& name, const Environment& env,
                                           const Config& cfg) {
  const auto kind = canonical_policy_name(name);
  const auto owner = policy_environment(kind);
  if (!owner.empty() && owner != env.name())
    throw UsageError("policy '" + kind + "' does not apply to environment '" + env.name() + "'");

  if (kind == "random") return std::make_unique<RandomPolicy>(env.spec());
  if (kind == "dam-mean" || kind == "dam-max") {
    const auto range = cfg.get_list("policy", "dam_action_range", {0.0, 500.0});
    if (range.size() != 2 || !(range[0] < range[1]))
      throw ConfigError("policy: dam_action_range needs lower < upper");
    const double a = kind == "dam-mean" ? 0.5 * (range[0] + range[1]) : range[1];
    return std::make_unique<ConstantPolicy>(kind, a);
  }
  if (kind == "dam-ead") return std::make_unique<DamEadPolicy>(cfg.get("policy", "ead_smoothing", 0.1));
  if (kind == "elevator-lf" || kind == "elevator-sf") {
    const auto& e = dynamic_cast<const ElevatorEnv&>(env);
    return std::make_unique<ElevatorRoutePolicy>(e.params(), kind == "elevator-lf");
  }
  if (kind == "tabular") {
    const auto path = cfg.get<std::string>("policy", "qtable", "");
    if (path.empty()) throw ConfigError("policy: tabular needs a qtable path");
    std::ifstream in(path);
    if (!in) throw DataError("cannot open q-table '" + path + "'");
    const ElevatorIndexer indexer(dynamic_cast<const ElevatorEnv&>(env).params());
    return std::make_unique<TabularPolicy>(QTable::load(in), indexer);
  }
  if (kind == "mg-om") return std::make_unique<ConstantPolicy>(kind, 0.0);
  if (kind == "mg-bf") return std::make_unique<ConstantPolicy>(kind, 1.0);
  if (kind == "mg-5050") return std::make_unique<ConstantPolicy>(kind, 0.5);
  if (kind == "trade-bh") return std::make_unique<ConstantPolicy>(kind, std::int64_t{kLong});
  if (kind == "trade-sh") return std::make_unique<ConstantPolicy>(kind, std::int64_t{kShort});
  if (kind == "trade-flat") return std::make_unique<ConstantPolicy>(kind, std::int64_t{kFlat});
  throw ConfigError("unknown policy '" + name + "'");
}

inline double action_value(const Action& a) {
  if (const auto* d = std::get_if<double>(&a)) return *d;
  return static_cast<double>(std::get<std::int64_t>(a));
}

/// Rolls one episode to termination or truncation.
inline EpisodeRecord run_episode(Environment& env, Policy& policy, std::uint64_t reset_seed,
                                 const EpisodeConfig& episode, RngStream& policy_rng) {
  EpisodeRecord rec;
  rec.reset_seed = reset_seed;
  rec.episode = episode.episode;
  policy.reset();
  auto obs = env.reset(reset_seed, episode);
  rec.steps.reserve(env.spec().horizon);
  while (true) {
    const auto action = policy.act(obs, policy_rng);
    auto res = env.step(action);
    if (rec.component_names.empty())
      for (const auto& [n, v] : res.reward_components) rec.component_names.push_back(n);
    StepRecord step{action_value(action), res.reward, {}, observation_digest(res.observation)};
    step.components.reserve(res.reward_components.size());
    for (const auto& [n, v] : res.reward_components) step.components.push_back(v);
    rec.steps.push_back(std::move(step));
    rec.total_return += res.reward;
    if (res.done()) {
      rec.terminated = res.terminated;
      rec.truncated = res.truncated;
      break;
    }
    obs = std::move(res.observation);
  }
  return rec;
}

/// Plays one trading session (day index) with the given policy.
inline EpisodeRecord run_session(TradingEnv& env, std::size_t day, Policy& policy,
                                 std::uint64_t seed = 0) {
  RngStream rng(seed, 77);
  return run_episode(env, policy, seed, {day}, rng);
}

struct CampaignConfig {
  std::string env = "elevator";
  std::string policy = "random";
  std::size_t episodes = 30;
  std::vector<std::uint64_t> seeds{42};
  std::string output_path;          // JSON report; empty = no files
  bool record_components = false;   // also write <output>.steps.csv
  Config settings;                  // env and policy sections

  void validate() const {
    if (episodes < 1) throw ConfigError("campaign: episodes must be >= 1");
    if (seeds.empty()) throw ConfigError("campaign: at least one seed is required");
  }
};

struct CampaignResult {
  std::string env;
  std::string policy;
  std::vector<std::uint64_t> seeds;
  std::size_t episodes = 0;
  std::vector<EpisodeRecord> records;  // seed-major, episode-minor
  ReturnStats stats;
};

inline std::uint64_t campaign_reset_seed(std::uint64_t seed, std::size_t episode) {
  return mix_seed(seed, 0x5EED0000ull + episode);
}

inline CampaignResult run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  CampaignResult out;
  out.env = cfg.env;
  out.policy = canonical_policy_name(cfg.policy);
  out.seeds = cfg.seeds;
  out.episodes = cfg.episodes;
  for (const auto seed : cfg.seeds) {
    auto env = make_env(cfg.env, cfg.settings, seed, cfg.episodes);
    if (env->episode_count() < cfg.episodes)
      throw DataError(cfg.env + ": dataset holds " + std::to_string(env->episode_count()) +
                      " episodes, campaign needs " + std::to_string(cfg.episodes));
    auto policy = make_policy(cfg.policy, *env, cfg.settings);
    for (std::size_t e = 0; e < cfg.episodes; ++e) {
      const auto reset_seed = campaign_reset_seed(seed, e);
      RngStream policy_rng(reset_seed, 77);
      auto rec = run_episode(*env, *policy, reset_seed, {e}, policy_rng);
      rec.seed = seed;
      out.records.push_back(std::move(rec));
    }
  }
  out.stats = ReturnStats::from_records(out.records);
  return out;
}

inline nlohmann::ordered_json report_json(const CampaignResult& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["env"] = r.env;
  j["policy"] = r.policy;
  j["episodes"] = r.episodes;
  j["seeds"] = r.seeds;
  auto& eps = j["per_episode"] = nlohmann::ordered_json::array();
  for (const auto& rec : r.records)
    eps.push_back({{"seed", rec.seed},
                   {"episode", rec.episode},
                   {"return", rec.total_return},
                   {"steps", rec.steps.size()},
                   {"terminated", rec.terminated}});
  const auto& s = r.stats;
  j["stats"] = {{"mean", s.mean},     {"std", s.std},   {"min", s.min},
                {"q1", s.q1},         {"median", s.median}, {"q3", s.q3},
                {"max", s.max},       {"ci95_half_width", s.ci95_half_width}};
  j["trajectory"] = {{"mean_cumulative_reward", s.trajectory_mean},
                     {"ci95_half_width", s.trajectory_half_width}};
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

inline std::string steps_csv(const std::vector<EpisodeRecord>& records) {
  std::string out = "seed,episode,step,action,reward";
  if (!records.empty())
    for (const auto& n : records.front().component_names) out += "," + n;
  out += ",digest\n";
  char buf[64];
  for (const auto& rec : records) {
    for (std::size_t t = 0; t < rec.steps.size(); ++t) {
      const auto& st = rec.steps[t];
      out += std::to_string(rec.seed) + ',' + std::to_string(rec.episode) + ',' + std::to_string(t);
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", st.action, st.reward);
      out += buf;
      for (double c : st.components) {
        std::snprintf(buf, sizeof buf, ",%.17g", c);
        out += buf;
      }
      std::snprintf(buf, sizeof buf, ",%016llx\n", static_cast<unsigned long long>(st.digest));
      out += buf;
    }
  }
  return out;
}

inline std::string steps_csv_path(const std::string& report_path) {
  auto base = report_path;
  if (base.size() > 5 && base.substr(base.size() - 5) == ".json") base.resize(base.size() - 5);
  return base + ".steps.csv";
}

inline void write_campaign(const CampaignResult& r, const CampaignConfig& cfg) {
  if (cfg.output_path.empty()) return;
  write_text(cfg.output_path, report_json(r).dump(2) + "\n");
  if (cfg.record_components) write_text(steps_csv_path(cfg.output_path), steps_csv(r.records));
}

// ---------------------------------------------------------------------------
// Policy comparison

struct ReportSummary {
  std::string env;
  std::string policy;
  std::vector<std::pair<std::uint64_t, std::size_t>> episode_ids;  // (seed, episode)
  ReturnStats stats;
};

inline ReportSummary summarize(const CampaignResult& r) {
  ReportSummary s{r.env, r.policy, {}, ReturnStats::from_returns(r.stats.returns)};
  for (const auto& rec : r.records) s.episode_ids.emplace_back(rec.seed, rec.episode);
  return s;
}

inline ReportSummary load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw DataError("report '" + path + "': unsupported schema_version");
    ReportSummary s;
    s.env = j.at("env").get<std::string>();
    s.policy = j.at("policy").get<std::string>();
    std::vector<double> returns;
    for (const auto& e : j.at("per_episode")) {
      s.episode_ids.emplace_back(e.at("seed").get<std::uint64_t>(), e.at("episode").get<std::size_t>());
      returns.push_back(e.at("return").get<double>());
    }
    s.stats = ReturnStats::from_returns(std::move(returns));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("report '" + path + "': " + e.what());
  }
}

struct RankedPolicy {
  std::string policy;
  double mean;
  double ci95_half_width;
};

struct PairwiseDifference {
  std::string a;
  std::string b;
  WelchInterval interval;  // mean(a) - mean(b)
};

struct ComparisonReport {
  std::string env;
  std::vector<RankedPolicy> ranking;  // best first
  std::vector<PairwiseDifference> pairs;
};

/// Ranks policies by mean return and reports pairwise Welch intervals. All
/// inputs must come from the same environment and the same episode set.
inline ComparisonReport compare_policies(const std::vector<ReportSummary>& stats) {
  if (stats.empty()) throw UsageError("compare: no reports given");
  for (const auto& s : stats) {
    if (s.env != stats.front().env)
      throw UsageError("compare: reports come from different environments");
    if (s.episode_ids != stats.front().episode_ids)
      throw UsageError("compare: reports cover different episode sets (" + s.policy + " vs " +
                       stats.front().policy + ")");
  }
  ComparisonReport out;
  out.env = stats.front().env;
  std::vector<std::size_t> order(stats.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return stats[i].stats.mean > stats[j].stats.mean;
  });
  for (auto i : order)
    out.ranking.push_back({stats[i].policy, stats[i].stats.mean, stats[i].stats.ci95_half_width});
  for (std::size_t x = 0; x < order.size(); ++x)
    for (std::size_t y = x + 1; y < order.size(); ++y)
      out.pairs.push_back({stats[order[x]].policy, stats[order[y]].policy,
                           welch_interval(stats[order[x]].stats, stats[order[y]].stats)});
  return out;
}

inline nlohmann::ordered_json comparison_json(const ComparisonReport& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["env"] = c.env;
  auto& rank = j["ranking"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < c.ranking.size(); ++i)
    rank.push_back({{"rank", i + 1},
                    {"policy", c.ranking[i].policy},
                    {"mean", c.ranking[i].mean},
                    {"ci95_half_width", c.ranking[i].ci95_half_width}});
  auto& pairs = j["pairwise"] = nlohmann::ordered_json::array();
  for (const auto& p : c.pairs)
    pairs.push_back({{"a", p.a},
                     {"b", p.b},
                     {"mean_difference", p.interval.difference},
                     {"welch_ci95_half_width", p.interval.half_width}});
  return j;
}

// ---------------------------------------------------------------------------
// Runtime benchmark

// Reference per-episode seconds measured on an Apple M1.
inline double reference_episode_seconds(const std::string& env) {
  if (env == "dam") return 0.045;
  if (env == "elevator") return 0.035;
  if (env == "microgrid") return 2.781;
  if (env == "trading") return 0.007;
  throw ConfigError("no runtime reference for '" + env + "'");
}

inline constexpr double kRuntimeBoundFactor = 10.0;

struct RuntimeReport {
  std::string env;
  std::size_t episodes = 0;
  std::vector<double> seconds;
  double median = 0.0;
  double p95 = 0.0;
  double reference = 0.0;
  double hard_bound = 0.0;

  bool meets_reference() const noexcept { return median <= reference; }
  bool within_bound() const noexcept { return median <= hard_bound; }
};

/// Times full episodes under the random policy. The first (warm-up)
/// episode is run but not timed.
inline RuntimeReport bench_runtime(const std::string& env_name, std::size_t episodes,
                                   const Config& cfg = {}, std::uint64_t seed = 42) {
  if (episodes < 1) throw UsageError("bench: episodes must be >= 1");
  auto env = make_env(env_name, cfg, seed, episodes + 1);
  RandomPolicy policy(env->spec());
  RuntimeReport r;
  r.env = env_name;
  r.episodes = episodes;
  r.reference = reference_episode_seconds(env_name);
  r.hard_bound = kRuntimeBoundFactor * r.reference;
  for (std::size_t e = 0; e <= episodes; ++e) {
    RngStream rng(seed, 77 + e);
    const auto slice = e % env->episode_count();
    const auto start = std::chrono::steady_clock::now();
    auto obs = env->reset(mix_seed(seed, e), {slice});
    while (true) {
      auto res = env->step(policy.act(obs, rng));
      if (res.done()) break;
      obs = std::move(res.observation);
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    if (e > 0) r.seconds.push_back(dt.count());
  }
  auto sorted = r.seconds;
  std::sort(sorted.begin(), sorted.end());
  r.median = quantile_sorted(sorted, 0.5);
  r.p95 = quantile_sorted(sorted, 0.95);
  return r;
}

inline nlohmann::ordered_json runtime_json(const RuntimeReport& r) {
  return {{"schema_version", kReportSchemaVersion},
          {"env", r.env},
          {"episodes", r.episodes},
          {"median_seconds", r.median},
          {"p95_seconds", r.p95},
          {"reference_seconds", r.reference},
          {"hard_bound_seconds", r.hard_bound},
          {"meets_reference", r.meets_reference()},
          {"within_hard_bound", r.within_bound()}};
}

}  // namespace realgym
