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
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gtsim/belief.hpp"
#include "gtsim/coalition.hpp"
#include "gtsim/labels.hpp"
#include "gtsim/moderation.hpp"
#include "gtsim/qlearning.hpp"

namespace gtsim {

// Raised for anything wrong with a scenario file: unreadable input, parse
// errors, unknown fields, or invariant violations. The CLI maps it to its
// own exit code so scripts can tell bad configs from solver trouble.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

struct LabelOffsetEntry {
  int player = 0;
  std::vector<int> profile;
  double value = 0.0;
};

// Label spaces plus offsets for a general normal-form game: one name list
// per player and sparse per-profile payoff adjustments.
struct GameLabelsConfig {
  std::vector<std::vector<std::string>> spaces;
  std::vector<LabelOffsetEntry> offsets;
};

struct NormalFormConfig {
  std::vector<int> action_counts;
  std::vector<std::vector<double>> payoffs;
  double epsilon = 0.0;
  std::optional<GameLabelsConfig> labels;
};

struct ZeroSumConfig {
  std::vector<std::vector<double>> matrix;
  double tolerance = 1e-3;
  long long max_iterations = 1000000;
};

struct StackelbergConfig {
  std::vector<std::vector<double>> leader_payoffs;
  std::vector<std::vector<double>> follower_payoffs;
  double grid_resolution = 0.01;
};

// Label wiring for the moderation scenario: one label per moderator action
// and per user type, with sparse offsets over (moderator, user) pairs.
struct ModerationLabelsConfig {
  std::vector<std::string> moderator_labels;
  std::vector<std::string> user_labels;
  std::array<int, 3> moderator_label_by_action = {0, 0, 0};
  std::array<int, 2> user_label_by_type = {0, 0};
  std::vector<LabelOffsetEntry> offsets;
};

struct ModerationConfig {
  // Several arrival rates make a sweep: one simulation per value, outputs
  // indexed in order. A single value runs exactly once.
  std::vector<double> arrival_p = {0.15};
  bool arrival_is_sweep = false;
  double prior_beta = 0.2;
  double q_adv = 0.7;
  double q_leg = 0.2;
  int signals_per_user = 3;
  long long rounds = 10000;
  long long window = 1000;
  double explore_epsilon = 0.0;
  std::array<std::array<double, 3>, 2> moderator_payoffs = {{{2.0, 1.0, 3.0}, {3.0, -1.0, -6.0}}};
  std::array<std::array<double, 3>, 2> user_payoffs = {{{0.0, 2.0, 5.0}, {-2.0, 1.0, 6.0}}};
  std::optional<ModerationLabelsConfig> labels;
};

struct SubsetValueEntry {
  std::vector<int> members;  // 1-based agent ids
  double value = 0.0;
};

struct TrustConfig {
  double alpha0 = 0.5;
  double rho = 0.8;
  double alpha_min = 0.0;
  int verified_rounds = 0;
};

struct CoalitionConfig {
  int n_agents = 0;
  std::optional<double> pairwise_weight;
  std::optional<std::vector<SubsetValueEntry>> explicit_values;
  std::vector<int> malicious;  // 1-based agent ids
  std::optional<double> alpha;
  std::optional<std::vector<SubsetValueEntry>> explicit_costs;
  std::optional<TrustConfig> trust;
  std::optional<std::vector<double>> test_allocation;
};

struct MatrixEnvConfig {
  std::vector<int> action_counts;
  std::vector<std::vector<double>> payoffs;
};

struct QLearningConfig {
  std::string env = "moderation";
  int belief_buckets = 20;
  std::optional<ModerationConfig> moderation;
  std::optional<MatrixEnvConfig> matrix;
  LearningConfig learning;
};

struct ScenarioConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::string output;

  std::optional<NormalFormConfig> normal_form;
  std::optional<ZeroSumConfig> zero_sum;
  std::optional<StackelbergConfig> stackelberg;
  std::optional<ModerationConfig> moderation;
  std::optional<CoalitionConfig> coalition;
  std::optional<QLearningConfig> qlearning;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* key) { return item.key() == key; });
    if (!known) fail(path + "." + item.key(), "unknown field");
  }
}

inline const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
  const json* value = find(obj, key);
  if (!value) fail(path + "." + key, "required field is missing");
  return *value;
}

inline double as_real(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  const double value = j.get<double>();
  if (!std::isfinite(value)) fail(path, "must be finite");
  return value;
}

inline long long as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "must be an integer");
  return j.get<long long>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "must be a string");
  return j.get<std::string>();
}

inline const json& as_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
  return j;
}

inline const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "must be an array");
  return j;
}

inline double real_field(const json& obj, const std::string& path, const char* key,
                         double fallback) {
  const json* value = find(obj, key);
  return value ? as_real(*value, path + "." + key) : fallback;
}

inline long long int_field(const json& obj, const std::string& path, const char* key,
                           long long fallback) {
  const json* value = find(obj, key);
  return value ? as_int(*value, path + "." + key) : fallback;
}

inline void check_unit(double value, const std::string& path) {
  if (!(value >= 0.0) || !(value <= 1.0)) fail(path, "must lie in [0, 1]");
}

inline std::vector<std::vector<double>> as_matrix(const json& j, const std::string& path) {
  const json& rows = as_array(j, path);
  if (rows.empty()) fail(path, "must have at least one row");
  std::vector<std::vector<double>> matrix;
  matrix.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    const json& row = as_array(rows[r], row_path);
    if (row.empty()) fail(row_path, "must have at least one entry");
    std::vector<double> values;
    values.reserve(row.size());
    for (std::size_t c = 0; c < row.size(); ++c)
      values.push_back(as_real(row[c], row_path + "[" + std::to_string(c) + "]"));
    if (!matrix.empty() && values.size() != matrix.front().size())
      fail(row_path, "rows must all have the same length");
    matrix.push_back(std::move(values));
  }
  return matrix;
}

inline std::vector<LabelOffsetEntry> parse_offsets(const json& j, const std::string& path,
                                                   int num_players) {
  const json& entries = as_array(j, path);
  std::vector<LabelOffsetEntry> out;
  out.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string entry_path = path + "[" + std::to_string(i) + "]";
    const json& entry = as_object(entries[i], entry_path);
    check_keys(entry, entry_path, {"player", "profile", "value"});
    LabelOffsetEntry parsed;
    parsed.player =
        static_cast<int>(as_int(require(entry, entry_path, "player"), entry_path + ".player"));
    if (parsed.player < 0 || parsed.player >= num_players)
      fail(entry_path + ".player", "must index a player");
    const json& profile = as_array(require(entry, entry_path, "profile"), entry_path + ".profile");
    if (static_cast<int>(profile.size()) != num_players)
      fail(entry_path + ".profile", "must list one label per player");
    for (std::size_t p = 0; p < profile.size(); ++p)
      parsed.profile.push_back(static_cast<int>(
          as_int(profile[p], entry_path + ".profile[" + std::to_string(p) + "]")));
    parsed.value = as_real(require(entry, entry_path, "value"), entry_path + ".value");
    out.push_back(std::move(parsed));
  }
  return out;
}

inline NormalFormConfig parse_normal_form(const json& j, const std::string& path) {
  const json& obj = as_object(j, path);
  check_keys(obj, path, {"action_counts", "payoffs", "epsilon", "labels"});

  NormalFormConfig config;
  const json& counts = as_array(require(obj, path, "action_counts"), path + ".action_counts");
  if (counts.empty()) fail(path + ".action_counts", "must name at least one player");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const long long n = as_int(counts[i], path + ".action_counts[" + std::to_string(i) + "]");
    if (n < 1) fail(path + ".action_counts[" + std::to_string(i) + "]", "must be positive");
    config.action_counts.push_back(static_cast<int>(n));
  }

  const json& payoffs = as_array(require(obj, path, "payoffs"), path + ".payoffs");
  if (payoffs.size() != counts.size())
    fail(path + ".payoffs", "must hold one table per player");
  for (std::size_t p = 0; p < payoffs.size(); ++p) {
    const std::string player_path = path + ".payoffs[" + std::to_string(p) + "]";
    const json& table = as_array(payoffs[p], player_path);
    std::vector<double> flat;
    flat.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i)
      flat.push_back(as_real(table[i], player_path + "[" + std::to_string(i) + "]"));
    config.payoffs.push_back(std::move(flat));
  }

  config.epsilon = real_field(obj, path, "epsilon", 0.0);
  if (config.epsilon < 0.0) fail(path + ".epsilon", "must be non-negative");

  if (const json* labels = find(obj, "labels")) {
    const std::string labels_path = path + ".labels";
    const json& labels_obj = as_object(*labels, labels_path);
    check_keys(labels_obj, labels_path, {"spaces", "offsets"});
    GameLabelsConfig parsed;
    const json& spaces = as_array(require(labels_obj, labels_path, "spaces"),
                                  labels_path + ".spaces");
    if (spaces.size() != counts.size())
      fail(labels_path + ".spaces", "must hold one label list per player");
    for (std::size_t p = 0; p < spaces.size(); ++p) {
      const std::string space_path = labels_path + ".spaces[" + std::to_string(p) + "]";
      const json& names = as_array(spaces[p], space_path);
      if (names.empty()) fail(space_path, "must hold at least one label");
      std::vector<std::string> list;
      for (std::size_t i = 0; i < names.size(); ++i)
        list.push_back(as_string(names[i], space_path + "[" + std::to_string(i) + "]"));
      parsed.spaces.push_back(std::move(list));
    }
    if (const json* offsets = find(labels_obj, "offsets"))
      parsed.offsets = parse_offsets(*offsets, labels_path + ".offsets",
                                     static_cast<int>(counts.size()));
    config.labels = std::move(parsed);
  }
  return config;
}

inline ZeroSumConfig parse_zero_sum(const json& j, const std::string& path) {
  const json& obj = as_object(j, path);
  check_keys(obj, path, {"matrix", "tolerance", "max_iterations"});
  ZeroSumConfig config;
  config.matrix = as_matrix(require(obj, path, "matrix"), path + ".matrix");
  config.tolerance = real_field(obj, path, "tolerance", config.tolerance);
  if (!(config.tolerance > 0.0)) fail(path + ".tolerance", "must be positive");
  config.max_iterations = int_field(obj, path, "max_iterations", config.max_iterations);
  if (config.max_iterations < 1 || config.max_iterations > 2147483647)
    fail(path + ".max_iterations", "must lie in [1, 2^31 - 1]");
  return config;
}

inline StackelbergConfig parse_stackelberg(const json& j, const std::string& path) {
  const json& obj = as_object(j, path);
  check_keys(obj, path, {"leader_payoffs", "follower_payoffs", "grid_resolution"});
  StackelbergConfig config;
  config.leader_payoffs =
      as_matrix(require(obj, path, "leader_payoffs"), path + ".leader_payoffs");
  config.follower_payoffs =
      as_matrix(require(obj, path, "follower_payoffs"), path + ".follower_payoffs");
  if (config.follower_payoffs.size() != config.leader_payoffs.size() ||
      config.follower_payoffs.front().size() != config.leader_payoffs.front().size())
    fail(path + ".follower_payoffs", "must match the leader table's shape");
  config.grid_resolution = real_field(obj, path, "grid_resolution", config.grid_resolution);
  if (!(config.grid_resolution > 0.0) || config.grid_resolution > 0.5)
    fail(path + ".grid_resolution", "must lie in (0, 0.5]");
  return config;
}

inline std::array<std::array<double, 3>, 2> parse_payoff_table(const json& j,
                                                               const std::string& path) {
  const auto matrix = as_matrix(j, path);
  if (matrix.size() != 2 || matrix.front().size() != 3)
    fail(path, "must be a 2x3 table: rows legitimate/adversarial, columns refuse/filter/allow");
  std::array<std::array<double, 3>, 2> table;
  for (int t = 0; t < 2; ++t)
    for (int a = 0; a < 3; ++a) table[t][a] = matrix[t][a];
  return table;
}

inline ModerationLabelsConfig parse_moderation_labels(const json& j, const std::string& path) {
  const json& obj = as_object(j, path);
  check_keys(obj, path,
             {"moderator_labels", "user_labels", "moderator_label_by_action",
              "user_label_by_type", "offsets"});
  ModerationLabelsConfig config;

  const auto read_names = [&](const char* key) {
    const json& names = as_array(require(obj, path, key), path + "." + key);
    if (names.empty()) fail(path + "." + key, "must hold at least one label");
    std::vector<std::string> list;
    for (std::size_t i = 0; i < names.size(); ++i)
      list.push_back(as_string(names[i], path + "." + key + "[" + std::to_string(i) + "]"));
    return list;
  };
  config.moderator_labels = read_names("moderator_labels");
  config.user_labels = read_names("user_labels");

  const json& by_action = as_array(require(obj, path, "moderator_label_by_action"),
                                   path + ".moderator_label_by_action");
  if (by_action.size() != 3)
    fail(path + ".moderator_label_by_action", "must list one label per action");
  for (int a = 0; a < 3; ++a)
    config.moderator_label_by_action[a] = static_cast<int>(
        as_int(by_action[a], path + ".moderator_label_by_action[" + std::to_string(a) + "]"));

  const json& by_type =
      as_array(require(obj, path, "user_label_by_type"), path + ".user_label_by_type");
  if (by_type.size() != 2) fail(path + ".user_label_by_type", "must list one label per type");
  for (int t = 0; t < 2; ++t)
    config.user_label_by_type[t] = static_cast<int>(
        as_int(by_type[t], path + ".user_label_by_type[" + std::to_string(t) + "]"));

  if (const json* offsets = find(obj, "offsets"))
    config.offsets = parse_offsets(*offsets, path + ".offsets", 2);
  return config;
}

inline ModerationConfig parse_moderation(const json& j, const std::string& path,
                                         bool allow_sweep) {
  const json& obj = as_object(j, path);
  check_keys(obj, path,
             {"arrival_p", "prior_beta", "q_adv", "q_leg", "signals_per_user", "rounds",
              "window", "explore_epsilon", "payoffs", "labels"});
  ModerationConfig config;

  if (const json* arrival = find(obj, "arrival_p")) {
    const std::string arrival_path = path + ".arrival_p";
    if (arrival->is_array()) {
      if (!allow_sweep) fail(arrival_path, "sweeps are only supported for kind \"moderation\"");
      if (arrival->empty()) fail(arrival_path, "sweep must hold at least one value");
      config.arrival_p.clear();
      config.arrival_is_sweep = true;
      for (std::size_t i = 0; i < arrival->size(); ++i) {
        const double p =
            as_real((*arrival)[i], arrival_path + "[" + std::to_string(i) + "]");
        check_unit(p, arrival_path + "[" + std::to_string(i) + "]");
        config.arrival_p.push_back(p);
      }
    } else {
      const double p = as_real(*arrival, arrival_path);
      check_unit(p, arrival_path);
      config.arrival_p = {p};
    }
  }

  config.prior_beta = real_field(obj, path, "prior_beta", config.prior_beta);
  check_unit(config.prior_beta, path + ".prior_beta");
  config.q_adv = real_field(obj, path, "q_adv", config.q_adv);
  check_unit(config.q_adv, path + ".q_adv");
  config.q_leg = real_field(obj, path, "q_leg", config.q_leg);
  check_unit(config.q_leg, path + ".q_leg");

  config.signals_per_user =
      static_cast<int>(int_field(obj, path, "signals_per_user", config.signals_per_user));
  if (config.signals_per_user < 0) fail(path + ".signals_per_user", "must be non-negative");
  config.rounds = int_field(obj, path, "rounds", config.rounds);
  if (config.rounds < 1) fail(path + ".rounds", "must be positive");
  config.window = int_field(obj, path, "window", config.window);
  if (config.window < 1 || config.window > config.rounds)
    fail(path + ".window", "must lie in [1, rounds]");
  config.explore_epsilon = real_field(obj, path, "explore_epsilon", config.explore_epsilon);
  check_unit(config.explore_epsilon, path + ".explore_epsilon");

  if (const json* payoffs = find(obj, "payoffs")) {
    const std::string payoffs_path = path + ".payoffs";
    const json& payoffs_obj = as_object(*payoffs, payoffs_path);
    check_keys(payoffs_obj, payoffs_path, {"moderator", "user"});
    config.moderator_payoffs =
        parse_payoff_table(require(payoffs_obj, payoffs_path, "moderator"),
                           payoffs_path + ".moderator");
    config.user_payoffs = parse_payoff_table(require(payoffs_obj, payoffs_path, "user"),
                                             payoffs_path + ".user");
  }

  if (const json* labels = find(obj, "labels"))
    config.labels = parse_moderation_labels(*labels, path + ".labels");
  return config;
}

inline std::vector<SubsetValueEntry> parse_subset_entries(const json& j, const std::string& path,
                                                          const char* value_key) {
  const json& entries = as_array(j, path);
  std::vector<SubsetValueEntry> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string entry_path = path + "[" + std::to_string(i) + "]";
    const json& entry = as_object(entries[i], entry_path);
    check_keys(entry, entry_path, {"members", value_key});
    SubsetValueEntry parsed;
    const json& members = as_array(require(entry, entry_path, "members"), entry_path + ".members");
    for (std::size_t m = 0; m < members.size(); ++m)
      parsed.members.push_back(static_cast<int>(
          as_int(members[m], entry_path + ".members[" + std::to_string(m) + "]")));
    parsed.value = as_real(require(entry, entry_path, value_key),
                           entry_path + "." + value_key);
    out.push_back(std::move(parsed));
  }
  return out;
}

inline CoalitionConfig parse_coalition(const json& j, const std::string& path) {
  const json& obj = as_object(j, path);
  check_keys(obj, path,
             {"n_agents", "pairwise_weight", "explicit_values", "malicious", "alpha",
              "explicit_costs", "trust", "test_allocation"});
  CoalitionConfig config;
  config.n_agents = static_cast<int>(as_int(require(obj, path, "n_agents"), path + ".n_agents"));
  if (config.n_agents < 1 || config.n_agents > kMaxCoalitionAgents)
    fail(path + ".n_agents", "must lie in [1, 20]");

  const json* pairwise = find(obj, "pairwise_weight");
  const json* explicit_values = find(obj, "explicit_values");
  if (!!pairwise == !!explicit_values)
    fail(path, "exactly one of pairwise_weight and explicit_values is required");
  if (pairwise) config.pairwise_weight = as_real(*pairwise, path + ".pairwise_weight");
  if (explicit_values)
    config.explicit_values =
        parse_subset_entries(*explicit_values, path + ".explicit_values", "value");

  if (const json* malicious = find(obj, "malicious")) {
    const json& agents = as_array(*malicious, path + ".malicious");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const long long agent =
          as_int(agents[i], path + ".malicious[" + std::to_string(i) + "]");
      if (agent < 1 || agent > config.n_agents)
        fail(path + ".malicious[" + std::to_string(i) + "]",
             "agents are numbered 1.." + std::to_string(config.n_agents));
      config.malicious.push_back(static_cast<int>(agent));
    }
  }

  const json* alpha = find(obj, "alpha");
  const json* explicit_costs = find(obj, "explicit_costs");
  const json* trust = find(obj, "trust");
  if ((alpha ? 1 : 0) + (explicit_costs ? 1 : 0) + (trust ? 1 : 0) > 1)
    fail(path, "alpha, explicit_costs, and trust are mutually exclusive");
  if (alpha) {
    config.alpha = as_real(*alpha, path + ".alpha");
    check_unit(*config.alpha, path + ".alpha");
  }
  if (explicit_costs) {
    config.explicit_costs =
        parse_subset_entries(*explicit_costs, path + ".explicit_costs", "cost");
    if (!config.malicious.empty())
      fail(path + ".malicious", "explicit_costs prices subsets directly; remove malicious");
  }
  if (trust) {
    const std::string trust_path = path + ".trust";
    const json& trust_obj = as_object(*trust, trust_path);
    check_keys(trust_obj, trust_path, {"alpha0", "rho", "alpha_min", "verified_rounds"});
    TrustConfig parsed;
    parsed.alpha0 = as_real(require(trust_obj, trust_path, "alpha0"), trust_path + ".alpha0");
    parsed.rho = as_real(require(trust_obj, trust_path, "rho"), trust_path + ".rho");
    parsed.alpha_min = real_field(trust_obj, trust_path, "alpha_min", 0.0);
    parsed.verified_rounds = static_cast<int>(
        as_int(require(trust_obj, trust_path, "verified_rounds"), trust_path + ".verified_rounds"));
    if (parsed.verified_rounds < 0) fail(trust_path + ".verified_rounds", "must be non-negative");
    config.trust = parsed;
  }
  if ((config.alpha || config.trust) && config.malicious.empty())
    fail(path + ".malicious", "fractional sabotage needs at least one malicious agent");

  if (const json* allocation = find(obj, "test_allocation")) {
    const json& values = as_array(*allocation, path + ".test_allocation");
    if (static_cast<int>(values.size()) != config.n_agents)
      fail(path + ".test_allocation", "must list one share per agent");
    std::vector<double> parsed;
    for (std::size_t i = 0; i < values.size(); ++i)
      parsed.push_back(as_real(values[i], path + ".test_allocation[" + std::to_string(i) + "]"));
    config.test_allocation = std::move(parsed);
  }
  return config;
}

inline QLearningConfig parse_qlearning(const json& j, const std::string& path,
                                       std::uint64_t seed) {
  const json& obj = as_object(j, path);
  check_keys(obj, path,
             {"env", "belief_buckets", "moderation", "matrix", "episodes", "learning_rate",
              "discount", "epsilon_initial", "epsilon_decay", "epsilon_floor", "max_steps"});
  QLearningConfig config;
  if (const json* env = find(obj, "env")) config.env = as_string(*env, path + ".env");
  if (config.env != "moderation" && config.env != "matrix")
    fail(path + ".env", "must be \"moderation\" or \"matrix\"");

  config.belief_buckets =
      static_cast<int>(int_field(obj, path, "belief_buckets", config.belief_buckets));
  if (config.belief_buckets < 2) fail(path + ".belief_buckets", "must be at least 2");

  const json* moderation = find(obj, "moderation");
  const json* matrix = find(obj, "matrix");
  if (config.env == "moderation") {
    if (matrix) fail(path + ".matrix", "only valid when env is \"matrix\"");
    config.moderation = moderation
                            ? parse_moderation(*moderation, path + ".moderation", false)
                            : ModerationConfig{};
  } else {
    if (moderation) fail(path + ".moderation", "only valid when env is \"moderation\"");
    if (!matrix) fail(path + ".matrix", "required when env is \"matrix\"");
    const std::string matrix_path = path + ".matrix";
    const json& matrix_obj = as_object(*matrix, matrix_path);
    check_keys(matrix_obj, matrix_path, {"action_counts", "payoffs"});
    NormalFormConfig game = parse_normal_form(
        json{{"action_counts", matrix_obj.at("action_counts")},
             {"payoffs", matrix_obj.at("payoffs")}},
        matrix_path);
    config.matrix = MatrixEnvConfig{std::move(game.action_counts), std::move(game.payoffs)};
  }

  config.learning.episodes =
      static_cast<int>(int_field(obj, path, "episodes", config.learning.episodes));
  config.learning.learning_rate =
      real_field(obj, path, "learning_rate", config.learning.learning_rate);
  config.learning.discount = real_field(obj, path, "discount", config.learning.discount);
  config.learning.epsilon_initial =
      real_field(obj, path, "epsilon_initial", config.learning.epsilon_initial);
  config.learning.epsilon_decay =
      real_field(obj, path, "epsilon_decay", config.learning.epsilon_decay);
  config.learning.epsilon_floor =
      real_field(obj, path, "epsilon_floor", config.learning.epsilon_floor);
  config.learning.max_steps =
      static_cast<int>(int_field(obj, path, "max_steps", config.learning.max_steps));
  config.learning.seed = seed;
  try {
    config.learning.validate();
  } catch (const std::invalid_argument& error) {
    fail(path, error.what());
  }
  return config;
}

}  // namespace detail

// Builds the runnable scenario pieces out of a parsed config. Kept beside
// the parser so the mapping from fields to module types stays in one place.
inline ModerationScenario build_moderation_scenario(const ModerationConfig& config,
                                                    double arrival_p, std::uint64_t seed) {
  ModerationScenario scenario;
  scenario.arrival_p = arrival_p;
  scenario.prior_beta = config.prior_beta;
  scenario.signal_model = {config.q_adv, config.q_leg};
  scenario.signals_per_user = config.signals_per_user;
  scenario.rounds = config.rounds;
  scenario.explore_epsilon = config.explore_epsilon;
  scenario.seed = seed;
  scenario.payoffs = ModerationPayoffs{config.moderator_payoffs, config.user_payoffs};
  if (config.labels) {
    const auto& l = *config.labels;
    LabelSpace space({l.moderator_labels, l.user_labels});
    LabelOffsetTable offsets(space);
    for (const auto& entry : l.offsets) offsets.set(entry.player, entry.profile, entry.value);
    ModerationLabels labels(std::move(space), std::move(offsets));
    labels.moderator_label_by_action = l.moderator_label_by_action;
    labels.user_label_by_type = l.user_label_by_type;
    scenario.labels = std::move(labels);
  }
  try {
    scenario.validate();
  } catch (const std::invalid_argument& error) {
    throw ConfigError(std::string("moderation: ") + error.what());
  }
  return scenario;
}

inline CoalitionMask members_to_mask(const std::vector<int>& members, int n_agents,
                                     const std::string& what) {
  CoalitionMask mask = 0;
  for (int agent : members) {
    if (agent < 1 || agent > n_agents)
      throw ConfigError(what + ": agents are numbered 1.." + std::to_string(n_agents));
    const CoalitionMask bit = 1u << (agent - 1);
    if (mask & bit) throw ConfigError(what + ": duplicate agent " + std::to_string(agent));
    mask |= bit;
  }
  return mask;
}

inline CharacteristicFunction build_characteristic_function(const CoalitionConfig& config) {
  try {
    if (config.pairwise_weight)
      return CharacteristicFunction::pairwise(config.n_agents, *config.pairwise_weight);
    std::map<CoalitionMask, double> table;
    for (const auto& entry : *config.explicit_values) {
      const CoalitionMask mask =
          members_to_mask(entry.members, config.n_agents, "coalition.explicit_values");
      if (table.count(mask))
        throw ConfigError("coalition.explicit_values: duplicate subset");
      table[mask] = entry.value;
    }
    return CharacteristicFunction::explicit_table(config.n_agents, std::move(table));
  } catch (const std::invalid_argument& error) {
    throw ConfigError(std::string("coalition: ") + error.what());
  }
}

inline std::optional<SabotageModel> build_sabotage_model(const CoalitionConfig& config) {
  try {
    const CoalitionMask malicious =
        members_to_mask(config.malicious, config.n_agents, "coalition.malicious");
    if (config.alpha) return SabotageModel::fractional(malicious, *config.alpha);
    if (config.trust) {
      const TrustSchedule schedule{config.trust->alpha0, config.trust->rho,
                                   config.trust->alpha_min};
      return SabotageModel::fractional(malicious,
                                       apply_trust(schedule, config.trust->verified_rounds));
    }
    if (config.explicit_costs) {
      std::map<CoalitionMask, double> costs;
      for (const auto& entry : *config.explicit_costs) {
        const CoalitionMask mask =
            members_to_mask(entry.members, config.n_agents, "coalition.explicit_costs");
        if (costs.count(mask)) throw ConfigError("coalition.explicit_costs: duplicate subset");
        costs[mask] = entry.value;
      }
      return SabotageModel::explicit_costs(std::move(costs));
    }
    return std::nullopt;
  } catch (const std::invalid_argument& error) {
    throw ConfigError(std::string("coalition: ") + error.what());
  }
}

inline NormalFormGame build_normal_form_game(const std::vector<int>& action_counts,
                                             const std::vector<std::vector<double>>& payoffs) {
  try {
    return NormalFormGame(action_counts, payoffs);
  } catch (const std::invalid_argument& error) {
    throw ConfigError(std::string("normal_form: ") + error.what());
  }
}

// The full game a normal-form config describes: the base tensor, expanded
// over (action, label) moves when labels are present.
inline NormalFormGame build_normal_form_game(const NormalFormConfig& config) {
  NormalFormGame game = build_normal_form_game(config.action_counts, config.payoffs);
  if (!config.labels) return game;
  try {
    LabelSpace space(config.labels->spaces);
    LabelOffsetTable table(space);
    for (const auto& entry : config.labels->offsets)
      table.set(entry.player, entry.profile, entry.value);
    return augment_game(game, space, table);
  } catch (const std::invalid_argument& error) {
    throw ConfigError(std::string("normal_form.labels: ") + error.what());
  } catch (const std::length_error& error) {
    throw ConfigError(std::string("normal_form.labels: ") + error.what());
  }
}

// Parses and validates one scenario document. Every field is checked for
// type and range, unknown fields are rejected with their full path, and
// kind payloads are cross-checked so a config cannot mix analyses.
inline ScenarioConfig parse_config(const nlohmann::json& document) {
  using detail::fail;
  const nlohmann::json& root = detail::as_object(document, "config");
  detail::check_keys(root, "config",
                     {"kind", "seed", "output", "normal_form", "zero_sum", "stackelberg",
                      "moderation", "coalition", "qlearning"});

  ScenarioConfig config;
  config.kind = detail::as_string(detail::require(root, "config", "kind"), "config.kind");
  const bool known_kind = config.kind == "normal_form" || config.kind == "zero_sum" ||
                          config.kind == "stackelberg" || config.kind == "moderation" ||
                          config.kind == "coalition" || config.kind == "qlearning";
  if (!known_kind) fail("config.kind", "unknown kind \"" + config.kind + "\"");

  const nlohmann::json& seed = detail::require(root, "config", "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    fail("config.seed", "seed required: a non-negative integer pins every random draw");
  config.seed = seed.get<std::uint64_t>();

  if (const nlohmann::json* output = detail::find(root, "output"))
    config.output = detail::as_string(*output, "config.output");
  else
    config.output = config.kind;
  if (config.output.empty()) fail("config.output", "must not be empty");

  for (const char* key :
       {"normal_form", "zero_sum", "stackelberg", "moderation", "coalition", "qlearning"})
    if (key != config.kind && detail::find(root, key))
      fail(std::string("config.") + key, "payload does not match kind \"" + config.kind + "\"");

  const nlohmann::json* payload = detail::find(root, config.kind.c_str());
  const std::string path = "config." + config.kind;
  if (config.kind == "normal_form") {
    if (!payload) fail(path, "required payload is missing");
    config.normal_form = detail::parse_normal_form(*payload, path);
    build_normal_form_game(*config.normal_form);
  } else if (config.kind == "zero_sum") {
    if (!payload) fail(path, "required payload is missing");
    config.zero_sum = detail::parse_zero_sum(*payload, path);
  } else if (config.kind == "stackelberg") {
    if (!payload) fail(path, "required payload is missing");
    config.stackelberg = detail::parse_stackelberg(*payload, path);
  } else if (config.kind == "moderation") {
    config.moderation = payload ? detail::parse_moderation(*payload, path, true)
                                : ModerationConfig{};
    for (double p : config.moderation->arrival_p)
      build_moderation_scenario(*config.moderation, p, config.seed);
  } else if (config.kind == "coalition") {
    if (!payload) fail(path, "required payload is missing");
    config.coalition = detail::parse_coalition(*payload, path);
    build_characteristic_function(*config.coalition);
    build_sabotage_model(*config.coalition);
  } else {
    config.qlearning = payload ? detail::parse_qlearning(*payload, path, config.seed)
                               : QLearningConfig{};
    config.qlearning->learning.seed = config.seed;
    if (config.qlearning->env == "moderation") {
      if (!config.qlearning->moderation) config.qlearning->moderation = ModerationConfig{};
      build_moderation_scenario(*config.qlearning->moderation,
                                config.qlearning->moderation->arrival_p.front(), config.seed);
    } else {
      build_normal_form_game(config.qlearning->matrix->action_counts,
                             config.qlearning->matrix->payoffs);
    }
  }
  return config;
}

inline ScenarioConfig parse_config_text(const std::string& text) {
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& error) {
    throw ConfigError(std::string("config: ") + error.what());
  }
  return parse_config(document);
}

inline ScenarioConfig load_config(const std::string& file_path) {
  std::ifstream file(file_path, std::ios::binary);
  if (!file) throw ConfigError("config: cannot read file: " + file_path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_config_text(buffer.str());
}

namespace detail {

inline json offsets_to_json(const std::vector<LabelOffsetEntry>& offsets) {
  json out = json::array();
  for (const auto& entry : offsets)
    out.push_back({{"player", entry.player}, {"profile", entry.profile}, {"value", entry.value}});
  return out;
}

inline json moderation_to_json(const ModerationConfig& config) {
  json payload;
  if (config.arrival_is_sweep)
    payload["arrival_p"] = config.arrival_p;
  else
    payload["arrival_p"] = config.arrival_p.front();
  payload["prior_beta"] = config.prior_beta;
  payload["q_adv"] = config.q_adv;
  payload["q_leg"] = config.q_leg;
  payload["signals_per_user"] = config.signals_per_user;
  payload["rounds"] = config.rounds;
  payload["window"] = config.window;
  payload["explore_epsilon"] = config.explore_epsilon;
  payload["payoffs"] = {{"moderator", config.moderator_payoffs},
                        {"user", config.user_payoffs}};
  if (config.labels) {
    const auto& l = *config.labels;
    payload["labels"] = {{"moderator_labels", l.moderator_labels},
                         {"user_labels", l.user_labels},
                         {"moderator_label_by_action", l.moderator_label_by_action},
                         {"user_label_by_type", l.user_label_by_type},
                         {"offsets", offsets_to_json(l.offsets)}};
  }
  return payload;
}

inline json subset_entries_to_json(const std::vector<SubsetValueEntry>& entries,
                                   const char* value_key) {
  json out = json::array();
  for (const auto& entry : entries)
    out.push_back({{"members", entry.members}, {value_key, entry.value}});
  return out;
}

}  // namespace detail

// Serializes a config with every default filled in. Loading the result
// reproduces the exact same resolved config, which is what makes the
// echoed file in a run directory a complete provenance record.
inline nlohmann::json resolved_json(const ScenarioConfig& config) {
  using detail::json;
  json root;
  root["kind"] = config.kind;
  root["seed"] = config.seed;
  root["output"] = config.output;

  if (config.normal_form) {
    const auto& nf = *config.normal_form;
    json payload;
    payload["action_counts"] = nf.action_counts;
    payload["payoffs"] = nf.payoffs;
    payload["epsilon"] = nf.epsilon;
    if (nf.labels)
      payload["labels"] = {{"spaces", nf.labels->spaces},
                           {"offsets", detail::offsets_to_json(nf.labels->offsets)}};
    root["normal_form"] = std::move(payload);
  }
  if (config.zero_sum) {
    root["zero_sum"] = {{"matrix", config.zero_sum->matrix},
                        {"tolerance", config.zero_sum->tolerance},
                        {"max_iterations", config.zero_sum->max_iterations}};
  }
  if (config.stackelberg) {
    root["stackelberg"] = {{"leader_payoffs", config.stackelberg->leader_payoffs},
                           {"follower_payoffs", config.stackelberg->follower_payoffs},
                           {"grid_resolution", config.stackelberg->grid_resolution}};
  }
  if (config.moderation) root["moderation"] = detail::moderation_to_json(*config.moderation);
  if (config.coalition) {
    const auto& c = *config.coalition;
    json payload;
    payload["n_agents"] = c.n_agents;
    if (c.pairwise_weight) payload["pairwise_weight"] = *c.pairwise_weight;
    if (c.explicit_values)
      payload["explicit_values"] = detail::subset_entries_to_json(*c.explicit_values, "value");
    payload["malicious"] = c.malicious;
    if (c.alpha) payload["alpha"] = *c.alpha;
    if (c.explicit_costs)
      payload["explicit_costs"] = detail::subset_entries_to_json(*c.explicit_costs, "cost");
    if (c.trust)
      payload["trust"] = {{"alpha0", c.trust->alpha0},
                          {"rho", c.trust->rho},
                          {"alpha_min", c.trust->alpha_min},
                          {"verified_rounds", c.trust->verified_rounds}};
    if (c.test_allocation) payload["test_allocation"] = *c.test_allocation;
    root["coalition"] = std::move(payload);
  }
  if (config.qlearning) {
    const auto& q = *config.qlearning;
    json payload;
    payload["env"] = q.env;
    payload["belief_buckets"] = q.belief_buckets;
    if (q.moderation) payload["moderation"] = detail::moderation_to_json(*q.moderation);
    if (q.matrix)
      payload["matrix"] = {{"action_counts", q.matrix->action_counts},
                           {"payoffs", q.matrix->payoffs}};
    payload["episodes"] = q.learning.episodes;
    payload["learning_rate"] = q.learning.learning_rate;
    payload["discount"] = q.learning.discount;
    payload["epsilon_initial"] = q.learning.epsilon_initial;
    payload["epsilon_decay"] = q.learning.epsilon_decay;
    payload["epsilon_floor"] = q.learning.epsilon_floor;
    payload["max_steps"] = q.learning.max_steps;
    root["qlearning"] = std::move(payload);
  }
  return root;
}

}  // namespace gtsim
