// realgym command-line harness: run, train, compare, bench.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "realgym/realgym.hpp"

namespace {

using namespace realgym;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("seeds: cannot parse '" + item + "'");
    }
  }
  return out;
}

struct RunOptions {
  std::string env = "elevator";
  std::string policy = "random";
  std::size_t episodes = 30;
  std::string seeds = "42";
  std::string out;
  std::string config;
  std::string qtable;
  bool record_components = false;
};

// Values from the [campaign] section of the config file take precedence.
CampaignConfig resolve_campaign(const RunOptions& o) {
  CampaignConfig c;
  if (!o.config.empty()) c.settings = Config::from_file(o.config);
  const auto& s = c.settings;
  c.env = s.get<std::string>("campaign", "env", o.env);
  c.policy = s.get<std::string>("campaign", "policy", o.policy);
  c.episodes = s.get<std::size_t>("campaign", "episodes", o.episodes);
  c.seeds = parse_seeds(s.get<std::string>("campaign", "seeds", o.seeds));
  c.output_path = s.get<std::string>("campaign", "out", o.out);
  c.record_components = s.get("campaign", "record_components", o.record_components);
  const auto qtable = s.get<std::string>("campaign", "qtable", o.qtable);
  if (!qtable.empty()) c.settings.set("policy", "qtable", qtable);
  return c;
}

int cmd_run(const RunOptions& o) {
  const auto cfg = resolve_campaign(o);
  const auto result = run_campaign(cfg);
  write_campaign(result, cfg);
  const auto& s = result.stats;
  std::printf("%s / %s: %zu episodes, mean %.6g +- %.3g (95%% CI), median %.6g, min %.6g, max %.6g\n",
              result.env.c_str(), result.policy.c_str(), s.returns.size(), s.mean,
              s.ci95_half_width, s.median, s.min, s.max);
  if (!cfg.output_path.empty()) std::printf("report: %s\n", cfg.output_path.c_str());
  return 0;
}

struct TrainOptions {
  std::string env = "elevator";
  std::string algorithm = "q-learning";
  std::string config;
  std::string out = "qtable.txt";
  std::string curve;
  std::size_t episodes = 0;  // 0 = config or default
  std::uint64_t seed = 42;
};

TrainConfig train_config(const Config& s, const TrainOptions& o) {
  TrainConfig t;
  t.seed = s.get("train", "seed", o.seed);
  t.episodes_max = s.get("train", "episodes_max", o.episodes ? o.episodes : t.episodes_max);
  t.gamma = s.get("train", "gamma", t.gamma);
  t.epsilon_init = s.get("train", "epsilon_init", t.epsilon_init);
  t.epsilon_decay = s.get("train", "epsilon_decay", t.epsilon_decay);
  t.epsilon_min = s.get("train", "epsilon_min", t.epsilon_min);
  t.tolerance = s.get("train", "tolerance", t.tolerance);
  t.patience = s.get("train", "patience", t.patience);
  t.eval_every = s.get("train", "eval_every", t.eval_every);
  t.eval_episodes = s.get("train", "eval_episodes", t.eval_episodes);
  t.step_size.alpha = s.get("train", "learning_rate", t.step_size.alpha);
  const auto rule = s.get<std::string>("train", "step_size", "constant");
  if (rule == "inverse-visits") t.step_size.rule = StepSizeRule::inverse_visits;
  else if (rule != "constant") throw ConfigError("train: step_size must be constant or inverse-visits");
  t.bootstrap_on_truncation = s.get("train", "bootstrap_on_truncation", t.bootstrap_on_truncation);
  return t;
}

int cmd_train(const TrainOptions& o) {
  Config settings;
  if (!o.config.empty()) settings = Config::from_file(o.config);
  const auto env_name = settings.get<std::string>("campaign", "env", o.env);
  if (env_name != "elevator")
    throw UsageError("train: tabular agents need discrete indexable observations (elevator only)");
  const auto algo_name = settings.get<std::string>("train", "algorithm", o.algorithm);
  TabularAlgorithm algo;
  if (algo_name == "q-learning") algo = TabularAlgorithm::q_learning;
  else if (algo_name == "sarsa") algo = TabularAlgorithm::sarsa;
  else throw ConfigError("train: algorithm must be q-learning or sarsa");

  const auto params = ElevatorParams::from_config(settings);
  const auto tc = train_config(settings, o);
  const auto res = train_tabular([&] { return std::make_unique<ElevatorEnv>(params); },
                                 ElevatorIndexer(params), tc, algo);

  const auto out = settings.get<std::string>("train", "out", o.out);
  std::ofstream f(out);
  if (!f) throw DataError("cannot write '" + out + "'");
  res.best_table.save(f);

  const auto curve_path = settings.get<std::string>("train", "curve", o.curve);
  if (!curve_path.empty()) {
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["algorithm"] = algo_name;
    j["episodes_run"] = res.episodes_run;
    j["early_stopped"] = res.early_stopped;
    auto& pts = j["curve"] = nlohmann::ordered_json::array();
    for (const auto& p : res.curve)
      pts.push_back({{"episode", p.episode},
                     {"mean_return", p.mean_return},
                     {"ci95_half_width", p.ci95_half_width},
                     {"epsilon", p.epsilon}});
    write_text(curve_path, j.dump(2) + "\n");
  }
  std::printf("%s: %zu episodes%s, best greedy mean %.6g, %zu states visited -> %s\n",
              algo_name.c_str(), res.episodes_run, res.early_stopped ? " (early stop)" : "",
              res.best_mean, res.best_table.visited_states(), out.c_str());
  return 0;
}

int cmd_compare(const std::vector<std::string>& reports, const std::string& out) {
  std::vector<ReportSummary> stats;
  for (const auto& r : reports) stats.push_back(load_report(r));
  const auto c = compare_policies(stats);
  std::printf("%-4s %-16s %14s %12s\n", "rank", "policy", "mean", "ci95");
  for (std::size_t i = 0; i < c.ranking.size(); ++i)
    std::printf("%-4zu %-16s %14.6g %12.4g\n", i + 1, c.ranking[i].policy.c_str(),
                c.ranking[i].mean, c.ranking[i].ci95_half_width);
  for (const auto& p : c.pairs)
    std::printf("%s - %s: %.6g +- %.4g (Welch 95%%)\n", p.a.c_str(), p.b.c_str(),
                p.interval.difference, p.interval.half_width);
  if (!out.empty()) write_text(out, comparison_json(c).dump(2) + "\n");
  return 0;
}

int cmd_bench(const std::vector<std::string>& envs, std::size_t episodes, const std::string& config,
              const std::string& out) {
  Config settings;
  if (!config.empty()) settings = Config::from_file(config);
  auto list = envs.empty() ? environment_names() : envs;
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  bool ok = true;
  for (const auto& env : list) {
    const auto r = bench_runtime(env, episodes, settings);
    std::printf("%-10s median %.4fs  p95 %.4fs  reference %.3fs [%s]  bound %.3fs [%s]\n",
                env.c_str(), r.median, r.p95, r.reference, r.meets_reference() ? "met" : "missed",
                r.hard_bound, r.within_bound() ? "ok" : "EXCEEDED");
    ok = ok && r.within_bound();
    j.push_back(runtime_json(r));
  }
  if (!out.empty()) write_text(out, j.dump(2) + "\n");
  return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"realgym: real-world sequential decision environments"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Evaluate a policy over a campaign of episodes");
  run_cmd->add_option("--env", run.env, "dam | elevator | microgrid | trading");
  run_cmd->add_option("--policy", run.policy, "Policy kind (random, lf, sf, dam-ead, mg-5050, trade-bh, tabular, ...)");
  run_cmd->add_option("--episodes", run.episodes, "Episodes per seed");
  run_cmd->add_option("--seeds", run.seeds, "Comma-separated seeds");
  run_cmd->add_option("--out", run.out, "JSON report path");
  run_cmd->add_option("--config", run.config, "INI config; its values override flags");
  run_cmd->add_option("--qtable", run.qtable, "Q-table for the tabular policy");
  run_cmd->add_flag("--record-components", run.record_components, "Also write per-step CSV");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a tabular agent on the elevator env");
  train_cmd->add_option("--env", train.env);
  train_cmd->add_option("--algorithm", train.algorithm, "q-learning | sarsa");
  train_cmd->add_option("--episodes", train.episodes, "Maximum training episodes");
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_option("--out", train.out, "Q-table output path");
  train_cmd->add_option("--curve", train.curve, "Learning-curve JSON path");
  train_cmd->add_option("--config", train.config);

  std::vector<std::string> reports;
  std::string compare_out;
  auto* cmp_cmd = app.add_subcommand("compare", "Rank policies from run reports");
  cmp_cmd->add_option("reports", reports, "Report JSON files")->required();
  cmp_cmd->add_option("--out", compare_out);

  std::vector<std::string> bench_envs;
  std::size_t bench_episodes = 5;
  std::string bench_config, bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Time full episodes against reference runtimes");
  bench_cmd->add_option("--env", bench_envs, "Environments (default: all)");
  bench_cmd->add_option("--episodes", bench_episodes, "Timed episodes (after one warm-up)");
  bench_cmd->add_option("--config", bench_config);
  bench_cmd->add_option("--out", bench_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*train_cmd) return cmd_train(train);
    if (*cmp_cmd) return cmd_compare(reports, compare_out);
    if (*bench_cmd) return cmd_bench(bench_envs, bench_episodes, bench_config, bench_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
