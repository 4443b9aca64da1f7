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
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gtsim/belief.hpp"
#include "gtsim/labels.hpp"
#include "gtsim/rng.hpp"

namespace gtsim {

// Deterministic labeling policy layered on the moderation loop: the
// moderator's label is a function of its action (say, an apology attached to
// every refusal) and the user's label is a function of the true type. The
// offset table then prices each (moderator label, user label) pair per
// player, with moderator first.
struct ModerationLabels {
  LabelSpace space;
  std::array<int, 3> moderator_label_by_action = {0, 0, 0};
  std::array<int, 2> user_label_by_type = {0, 0};
  LabelOffsetTable offsets;

  ModerationLabels(LabelSpace s, LabelOffsetTable t) : space(std::move(s)), offsets(std::move(t)) {}

  void validate() const {
    if (space.num_players() != 2 || offsets.num_players() != 2)
      throw std::invalid_argument("moderation labels: exactly two label roles required");
    for (int a : moderator_label_by_action)
      if (a < 0 || a >= space.count(0))
        throw std::invalid_argument("moderation labels: moderator label index out of range");
    for (int l : user_label_by_type)
      if (l < 0 || l >= space.count(1))
        throw std::invalid_argument("moderation labels: user label index out of range");
  }
};

// Repeated-interaction setup: every round an independent user arrives,
// adversarial with probability arrival_p, and the moderator starts from the
// same prior, folds signals_per_user noisy signals into its belief, then
// acts on the posterior.
struct ModerationScenario {
  ModerationPayoffs payoffs;
  double arrival_p = 0.15;
  double prior_beta = 0.2;
  SignalModel signal_model;
  int signals_per_user = 3;
  long long rounds = 10'000;
  // With probability explore_epsilon the round's action is drawn uniformly
  // instead of greedily, so learning runs can mirror the same scenario.
  double explore_epsilon = 0.0;
  std::uint64_t seed = 0;
  std::optional<ModerationLabels> labels;

  void validate() const {
    if (!(arrival_p >= 0.0) || !(arrival_p <= 1.0))
      throw std::invalid_argument("moderation: arrival_p must lie in [0, 1]");
    if (!(prior_beta >= 0.0) || !(prior_beta <= 1.0))
      throw std::invalid_argument("moderation: prior_beta must lie in [0, 1]");
    signal_model.validate();
    if (signals_per_user < 1)
      throw std::invalid_argument("moderation: signals_per_user must be positive");
    if (rounds < 1) throw std::invalid_argument("moderation: rounds must be positive");
    if (!(explore_epsilon >= 0.0) || !(explore_epsilon <= 1.0))
      throw std::invalid_argument("moderation: explore_epsilon must lie in [0, 1]");
    if (labels) labels->validate();
  }
};

struct ModerationRound {
  long long round = 0;  // 1-based
  UserType user_type = UserType::kLegitimate;
  int suspicious_count = 0;
  double belief_pre = 0.0;
  double belief_post = 0.0;
  ModAction action = ModAction::kRefuse;
  double moderator_payoff = 0.0;
  double user_payoff = 0.0;
};

struct SimulationTrace {
  std::vector<ModerationRound> rounds;
};

// Runs the scenario. Randomness is consumed in a fixed order per round (one
// type draw, one draw per signal, then the exploration draws only when
// explore_epsilon > 0), so a seed pins the whole trace.
inline SimulationTrace simulate_moderation(const ModerationScenario& scenario) {
  scenario.validate();
  Rng rng(scenario.seed);
  SimulationTrace trace;
  trace.rounds.reserve(static_cast<std::size_t>(scenario.rounds));
  for (long long t = 1; t <= scenario.rounds; ++t) {
    ModerationRound row;
    row.round = t;
    row.user_type =
        rng.next_bernoulli(scenario.arrival_p) ? UserType::kAdversarial : UserType::kLegitimate;
    BeliefState belief(scenario.prior_beta);
    row.belief_pre = belief.beta();
    const double q = row.user_type == UserType::kAdversarial ? scenario.signal_model.q_adv
                                                             : scenario.signal_model.q_leg;
    for (int s = 0; s < scenario.signals_per_user; ++s) {
      const bool suspicious = rng.next_bernoulli(q);
      if (suspicious) ++row.suspicious_count;
      belief = bayes_update(belief, suspicious, scenario.signal_model);
    }
    row.belief_post = belief.beta();
    if (scenario.explore_epsilon > 0.0 && rng.next_bernoulli(scenario.explore_epsilon)) {
      row.action = static_cast<ModAction>(rng.next_index(kNumModActions));
    } else {
      row.action = belief_best_response(belief.beta(), scenario.payoffs);
    }
    row.moderator_payoff = scenario.payoffs.moderator_payoff(row.user_type, row.action);
    row.user_payoff = scenario.payoffs.user_payoff(row.user_type, row.action);
    if (scenario.labels) {
      const auto& labels = *scenario.labels;
      const int mod_label = labels.moderator_label_by_action[static_cast<int>(row.action)];
      const int user_label = labels.user_label_by_type[static_cast<int>(row.user_type)];
      const std::array<int, 2> profile = {mod_label, user_label};
      row.moderator_payoff += labels.offsets.offset(0, profile);
      row.user_payoff += labels.offsets.offset(1, profile);
    }
    trace.rounds.push_back(row);
  }
  return trace;
}

struct FrequencyRow {
  long long round = 0;  // 1-based index of the bucket's last round
  double refuse = 0.0;
  double filter = 0.0;
  double allow = 0.0;
};

// Action frequencies over disjoint buckets of `window` rounds; a shorter
// tail bucket is normalized by its own size, so every row sums to one.
inline std::vector<FrequencyRow> action_frequencies(const SimulationTrace& trace,
                                                    long long window) {
  const long long total = static_cast<long long>(trace.rounds.size());
  if (window < 1) throw std::invalid_argument("action_frequencies: window must be positive");
  if (window > total)
    throw std::invalid_argument("action_frequencies: window exceeds the trace length");
  std::vector<FrequencyRow> rows;
  for (long long start = 0; start < total; start += window) {
    const long long end = std::min(start + window, total);
    std::array<long long, 3> counts = {0, 0, 0};
    for (long long i = start; i < end; ++i)
      ++counts[static_cast<int>(trace.rounds[static_cast<std::size_t>(i)].action)];
    FrequencyRow row;
    row.round = end;
    const double size = static_cast<double>(end - start);
    row.refuse = static_cast<double>(counts[0]) / size;
    row.filter = static_cast<double>(counts[1]) / size;
    row.allow = static_cast<double>(counts[2]) / size;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gtsim
