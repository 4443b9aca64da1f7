// Copyright 2025 The gtsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gtsim/config.hpp"
#include "gtsim/csv.hpp"
#include "gtsim/stackelberg.hpp"
#include "gtsim/version.hpp"
#include "gtsim/zero_sum.hpp"

namespace gtsim {

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
};

// What a run produced: summary lines for the terminal, the files written,
// and a convergence flag the CLI turns into its exit code. Every file path
// starts with out_dir/<output>, so runs with distinct output names coexist
// in one directory.
struct RunReport {
  ScenarioConfig config;
  std::vector<std::string> summary;
  std::vector<std::string> files;
  double duration_seconds = 0.0;
  std::string version = kVersion;
  bool converged = true;
};

namespace detail {

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("run: cannot open for writing: " + path);
  file << text;
  if (!file) throw std::runtime_error("run: write failed: " + path);
}

inline void emit_table(const csv::Table& table, const std::string& path, RunReport& report) {
  table.write(path);
  report.files.push_back(path);
}

inline std::string format_members(CoalitionMask mask) {
  std::string out = "{";
  bool first = true;
  for (int agent : coalition_members(mask)) {
    if (!first) out += ", ";
    out += std::to_string(agent + 1);  // agents are numbered from 1 outside the library
    first = false;
  }
  return out + "}";
}

inline std::string format_vector(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += csv::format_real(values[i]);
  }
  return out + "]";
}

inline std::string format_policy(const std::vector<int>& policy) {
  std::string out = "[";
  for (std::size_t i = 0; i < policy.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(policy[i]);
  }
  return out + "]";
}

inline void run_normal_form(const ScenarioConfig& config, const std::string& base,
                            RunReport& report) {
  const NormalFormConfig& nf = *config.normal_form;
  const NormalFormGame game = build_normal_form_game(nf);
  const bool labeled = nf.labels.has_value();
  std::vector<int> label_counts;
  if (labeled)
    for (const auto& names : nf.labels->spaces)
      label_counts.push_back(static_cast<int>(names.size()));

  const int n = game.num_players();
  std::vector<std::string> columns = {"profile"};
  for (int i = 0; i < n; ++i) columns.push_back("action_" + std::to_string(i));
  if (labeled)
    for (int i = 0; i < n; ++i) columns.push_back("label_" + std::to_string(i));
  for (int i = 0; i < n; ++i) columns.push_back("payoff_" + std::to_string(i));
  columns.push_back("epsilon_nash");

  csv::Table table(columns);
  long long nash_count = 0;
  for (long long idx = 0; idx < game.num_profiles(); ++idx) {
    const std::vector<int> moves = game.profile_at(idx);
    StrategyProfile profile;
    for (int i = 0; i < n; ++i) profile.push_back(MixedStrategy::pure(moves[i], game.action_count(i)));
    const bool nash = is_epsilon_nash(game, profile, nf.epsilon);
    if (nash) ++nash_count;

    std::vector<std::string> row = {csv::format_int(idx)};
    for (int i = 0; i < n; ++i)
      row.push_back(csv::format_int(labeled ? moves[i] / label_counts[i] : moves[i]));
    if (labeled)
      for (int i = 0; i < n; ++i) row.push_back(csv::format_int(moves[i] % label_counts[i]));
    for (int i = 0; i < n; ++i) row.push_back(csv::format_real(game.payoff(i, moves)));
    row.push_back(nash ? "1" : "0");
    table.add_row(row);
  }
  emit_table(table, base + "_profiles.csv", report);

  std::ostringstream line;
  line << n << " players, " << game.num_profiles() << " pure profiles"
       << (labeled ? " over (action, label) moves" : "");
  report.summary.push_back(line.str());
  report.summary.push_back("epsilon-Nash pure profiles at epsilon=" +
                           csv::format_real(nf.epsilon) + ": " + std::to_string(nash_count) +
                           " of " + std::to_string(game.num_profiles()));
}

inline void run_zero_sum(const ScenarioConfig& config, const std::string& base,
                         RunReport& report) {
  const ZeroSumConfig& zs = *config.zero_sum;
  ZeroSumGame game{zs.matrix};
  const ZeroSumSolution solution =
      solve_zero_sum(game, zs.tolerance, static_cast<int>(zs.max_iterations));

  csv::Table table({"player", "action", "probability"});
  for (std::size_t a = 0; a < solution.row.probs.size(); ++a)
    table.add_row({"row", csv::format_int(static_cast<long long>(a)),
                   csv::format_real(solution.row.probs[a])});
  for (std::size_t a = 0; a < solution.col.probs.size(); ++a)
    table.add_row({"col", csv::format_int(static_cast<long long>(a)),
                   csv::format_real(solution.col.probs[a])});
  emit_table(table, base + "_strategies.csv", report);

  report.summary.push_back("game value " + csv::format_real(solution.value) + " in [" +
                           csv::format_real(solution.lower) + ", " +
                           csv::format_real(solution.upper) + "] after " +
                           std::to_string(solution.iterations) + " iterations");
  if (!solution.converged) {
    report.converged = false;
    report.summary.push_back("bound gap still exceeds tolerance " +
                             csv::format_real(zs.tolerance) + " at max_iterations " +
                             std::to_string(zs.max_iterations));
  }
}

inline void run_stackelberg(const ScenarioConfig& config, const std::string& base,
                            RunReport& report) {
  const StackelbergConfig& st = *config.stackelberg;
  const NormalFormGame game = NormalFormGame::bimatrix(st.leader_payoffs, st.follower_payoffs);
  const StackelbergSolution solution = solve_stackelberg(game, st.grid_resolution);

  csv::Table table({"player", "action", "probability"});
  for (std::size_t a = 0; a < solution.leader.probs.size(); ++a)
    table.add_row({"leader", csv::format_int(static_cast<long long>(a)),
                   csv::format_real(solution.leader.probs[a])});
  table.add_row({"follower", csv::format_int(solution.follower_action), "1"});
  emit_table(table, base + "_strategies.csv", report);

  report.summary.push_back("leader commits to " + format_vector(solution.leader.probs) +
                           " for value " + csv::format_real(solution.leader_value));
  report.summary.push_back("follower best responds with action " +
                           std::to_string(solution.follower_action) + " for value " +
                           csv::format_real(solution.follower_value));
}

inline void run_moderation(const ScenarioConfig& config, const std::string& base,
                           RunReport& report) {
  const ModerationConfig& mod = *config.moderation;
  for (std::size_t entry = 0; entry < mod.arrival_p.size(); ++entry) {
    const double arrival_p = mod.arrival_p[entry];
    const ModerationScenario scenario = build_moderation_scenario(mod, arrival_p, config.seed);
    const SimulationTrace trace = simulate_moderation(scenario);

    const std::string prefix =
        mod.arrival_is_sweep ? base + "_" + std::to_string(entry) : base;

    csv::Table trace_table(
        {"round", "user_type", "signal_count", "belief_post", "action", "m_payoff", "u_payoff"});
    double moderator_total = 0.0, user_total = 0.0;
    long long counts[kNumModActions] = {0, 0, 0};
    for (const ModerationRound& round : trace.rounds) {
      trace_table.add_row({csv::format_int(round.round), to_string(round.user_type),
                           csv::format_int(round.suspicious_count),
                           csv::format_real(round.belief_post), to_string(round.action),
                           csv::format_real(round.moderator_payoff),
                           csv::format_real(round.user_payoff)});
      moderator_total += round.moderator_payoff;
      user_total += round.user_payoff;
      ++counts[static_cast<int>(round.action)];
    }
    emit_table(trace_table, prefix + "_trace.csv", report);

    csv::Table freq_table({"round", "freq_refuse", "freq_filter", "freq_allow"});
    for (const FrequencyRow& row : action_frequencies(trace, mod.window))
      freq_table.add_row({csv::format_int(row.round), csv::format_real(row.refuse),
                          csv::format_real(row.filter), csv::format_real(row.allow)});
    emit_table(freq_table, prefix + "_freq.csv", report);

    const double rounds = static_cast<double>(trace.rounds.size());
    std::ostringstream line;
    line << "arrival_p=" << csv::format_real(arrival_p) << ": refuse "
         << csv::format_real(counts[0] / rounds) << ", filter "
         << csv::format_real(counts[1] / rounds) << ", allow "
         << csv::format_real(counts[2] / rounds) << "; mean moderator payoff "
         << csv::format_real(moderator_total / rounds) << ", mean user payoff "
         << csv::format_real(user_total / rounds);
    report.summary.push_back(line.str());
  }
}

inline void run_coalition(const ScenarioConfig& config, const std::string& base,
                          RunReport& report) {
  const CoalitionConfig& co = *config.coalition;
  const CharacteristicFunction f = build_characteristic_function(co);
  const std::optional<SabotageModel> sabotage = build_sabotage_model(co);
  const SabotageModel* sab = sabotage ? &*sabotage : nullptr;

  csv::Table subsets({"subset_mask", "size", "v", "c", "v_tilde"});
  const CoalitionMask full = full_coalition(co.n_agents);
  for (CoalitionMask mask = 0; mask <= full; ++mask) {
    const double v = f.value(mask);
    const double c = sab ? sab->cost(f, mask) : 0.0;
    subsets.add_row({csv::format_int(mask),
                     csv::format_int(static_cast<int>(coalition_members(mask).size())),
                     csv::format_real(v), csv::format_real(c), csv::format_real(v - c)});
  }
  emit_table(subsets, base + "_subsets.csv", report);

  const std::vector<double> phi = shapley(f, sab);
  csv::Table allocation({"agent", "shapley"});
  for (int i = 0; i < co.n_agents; ++i)
    allocation.add_row({csv::format_int(i + 1), csv::format_real(phi[i])});
  emit_table(allocation, base + "_allocation.csv", report);

  const BestCoalition best = best_coalition(f, sab);
  report.summary.push_back("best coalition " + format_members(best.mask) + " with value " +
                           csv::format_real(best.value));
  report.summary.push_back("shapley allocation " + format_vector(phi));

  if (co.test_allocation) {
    const CoreCheck check = core_contains(f, sab, *co.test_allocation);
    if (check.in_core) {
      report.summary.push_back("test allocation lies in the core");
    } else if (check.blocking_subset) {
      const CoalitionMask witness = *check.blocking_subset;
      double allocated = 0.0;
      for (int agent : coalition_members(witness)) allocated += (*co.test_allocation)[agent];
      const double deficit = coalition_value(f, sab, witness) - allocated;
      report.summary.push_back("test allocation blocked by " + format_members(witness) +
                               " (deficit " + csv::format_real(deficit) + ")");
    } else {
      report.summary.push_back(
          "test allocation rejected: it does not distribute the grand coalition's value");
    }
  }
}

inline void run_qlearning(const ScenarioConfig& config, const std::string& base,
                          RunReport& report) {
  const QLearningConfig& q = *config.qlearning;
  std::unique_ptr<TabularEnvironment> owned;
  if (q.env == "moderation") {
    const ModerationScenario scenario =
        build_moderation_scenario(*q.moderation, q.moderation->arrival_p.front(), config.seed);
    owned = make_moderation_env(scenario, q.belief_buckets);
  } else {
    owned = std::make_unique<MatrixGameEnv>(
        build_normal_form_game(q.matrix->action_counts, q.matrix->payoffs));
  }

  const TrainResult result = train(*owned, q.learning);

  csv::Table curve({"episode", "reward_sum", "epsilon"});
  for (std::size_t e = 0; e < result.episode_rewards.size(); ++e)
    curve.add_row({csv::format_int(static_cast<long long>(e + 1)),
                   csv::format_real(result.episode_rewards[e]),
                   csv::format_real(result.episode_epsilons[e])});
  emit_table(curve, base + "_curve.csv", report);

  csv::Table policy_table({"agent", "state", "greedy_action"});
  std::vector<std::vector<int>> policies;
  for (std::size_t agent = 0; agent < result.tables.size(); ++agent) {
    policies.push_back(greedy_policy(result.tables[agent]));
    for (std::size_t s = 0; s < policies.back().size(); ++s)
      policy_table.add_row({csv::format_int(static_cast<long long>(agent)),
                            csv::format_int(static_cast<long long>(s)),
                            csv::format_int(policies.back()[s])});
  }
  emit_table(policy_table, base + "_policy.csv", report);

  const std::size_t episodes = result.episode_rewards.size();
  const std::size_t tail = std::min<std::size_t>(100, episodes);
  double tail_sum = 0.0;
  for (std::size_t e = episodes - tail; e < episodes; ++e) tail_sum += result.episode_rewards[e];
  std::ostringstream line;
  line << episodes << " episodes on the " << q.env << " environment, final epsilon "
       << csv::format_real(result.episode_epsilons.empty() ? 0.0 : result.episode_epsilons.back())
       << ", mean reward over the last " << tail << " episodes "
       << csv::format_real(tail == 0 ? 0.0 : tail_sum / static_cast<double>(tail));
  report.summary.push_back(line.str());
  if (result.truncated_episodes > 0)
    report.summary.push_back(std::to_string(result.truncated_episodes) +
                             " episodes hit max_steps before a terminal state");
  for (std::size_t agent = 0; agent < policies.size(); ++agent) {
    if (policies[agent].size() <= 32)
      report.summary.push_back("agent " + std::to_string(agent) + " greedy policy " +
                               format_policy(policies[agent]));
    else
      report.summary.push_back("agent " + std::to_string(agent) + " greedy policy written to " +
                               base + "_policy.csv");
  }
}

}  // namespace detail

// Runs one validated scenario end to end: writes a fully resolved copy of
// the config next to the outputs, then the kind's CSV files. Identical
// configs and seeds produce byte-identical files.
inline RunReport run_scenario(ScenarioConfig config, const RunOptions& options = {}) {
  const auto start = std::chrono::steady_clock::now();
  if (options.seed_override) {
    config.seed = *options.seed_override;
    if (config.qlearning) config.qlearning->learning.seed = *options.seed_override;
  }

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec)
    throw std::runtime_error("run: cannot create output directory " + options.out_dir + ": " +
                             ec.message());

  RunReport report;
  report.config = config;
  const std::string base = options.out_dir + "/" + config.output;

  detail::write_text_file(base + "_resolved.json", resolved_json(config).dump(2) + "\n");
  report.files.push_back(base + "_resolved.json");

  if (config.kind == "normal_form")
    detail::run_normal_form(config, base, report);
  else if (config.kind == "zero_sum")
    detail::run_zero_sum(config, base, report);
  else if (config.kind == "stackelberg")
    detail::run_stackelberg(config, base, report);
  else if (config.kind == "moderation")
    detail::run_moderation(config, base, report);
  else if (config.kind == "coalition")
    detail::run_coalition(config, base, report);
  else if (config.kind == "qlearning")
    detail::run_qlearning(config, base, report);
  else
    throw ConfigError("config.kind: unknown kind \"" + config.kind + "\"");

  report.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace gtsim
