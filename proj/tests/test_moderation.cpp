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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gtsim/moderation.hpp"

using Catch::Matchers::WithinAbs;
using namespace gtsim;

namespace {

// Exact per-round action distribution for the defaults: the posterior after
// three signals depends only on the suspicious count k, and with prior odds
// 1/4, suspicious ratio 7/2 and clean ratio 3/8 the posterior crosses the 0.1
// threshold between k=0 (beta ~ 0.013) and k=1 (beta = 63/575 ~ 0.1096).
// Allow therefore fires exactly when all three signals are clean:
//   P(allow) = (1-p) * 0.8^3 + p * 0.3^3.
double expected_allow_probability(double arrival_p) {
  return (1.0 - arrival_p) * 0.512 + arrival_p * 0.027;
}

}  // namespace

TEST_CASE("an empty threat model allows every round", "[moderation][simulate]") {
  ModerationScenario scenario;
  scenario.arrival_p = 0.0;
  scenario.prior_beta = 0.0;
  scenario.signal_model = {0.0, 0.0};
  scenario.rounds = 200;
  scenario.seed = 9;
  auto trace = simulate_moderation(scenario);
  REQUIRE(trace.rounds.size() == 200);
  for (const auto& round : trace.rounds) {
    REQUIRE(round.user_type == UserType::kLegitimate);
    REQUIRE(round.action == ModAction::kAllow);
    REQUIRE_THAT(round.moderator_payoff, WithinAbs(3.0, 0.0));
    REQUIRE_THAT(round.user_payoff, WithinAbs(5.0, 0.0));
  }
}

TEST_CASE("perfect signals against constant attackers refuse every round",
          "[moderation][simulate]") {
  ModerationScenario scenario;
  scenario.arrival_p = 1.0;
  scenario.signal_model = {1.0, 0.0};
  scenario.signals_per_user = 1;
  scenario.rounds = 100;
  scenario.seed = 4;
  auto trace = simulate_moderation(scenario);
  for (const auto& round : trace.rounds) {
    REQUIRE(round.user_type == UserType::kAdversarial);
    REQUIRE(round.action == ModAction::kRefuse);
    REQUIRE_THAT(round.moderator_payoff, WithinAbs(3.0, 0.0));
    REQUIRE_THAT(round.user_payoff, WithinAbs(-2.0, 0.0));
    REQUIRE_THAT(round.belief_post, WithinAbs(1.0 - 1e-6, 1e-12));
  }
}

TEST_CASE("default scenario action rates match the exact distribution",
          "[moderation][simulate][oracle]") {
  ModerationScenario scenario;
  scenario.rounds = 40'000;
  scenario.seed = 1234;
  auto trace = simulate_moderation(scenario);
  long long allow = 0, filter = 0;
  for (const auto& round : trace.rounds) {
    if (round.action == ModAction::kAllow) ++allow;
    if (round.action == ModAction::kFilter) ++filter;
  }
  REQUIRE(filter == 0);  // strictly dominated under the default payoffs
  const double p_allow = expected_allow_probability(scenario.arrival_p);
  const double sigma = std::sqrt(p_allow * (1 - p_allow) / static_cast<double>(scenario.rounds));
  REQUIRE_THAT(static_cast<double>(allow) / static_cast<double>(scenario.rounds),
               WithinAbs(p_allow, 5 * sigma));
}

TEST_CASE("posterior in the trace matches the suspicious-count closed form",
          "[moderation][simulate][oracle]") {
  ModerationScenario scenario;
  scenario.rounds = 500;
  scenario.seed = 77;
  auto trace = simulate_moderation(scenario);
  for (const auto& round : trace.rounds) {
    const int k = round.suspicious_count;
    const double odds = 0.25 * std::pow(3.5, k) * std::pow(0.375, 3 - k);
    REQUIRE_THAT(round.belief_post, WithinAbs(odds / (1.0 + odds), 1e-9));
    REQUIRE_THAT(round.belief_pre, WithinAbs(0.2, 0.0));
    REQUIRE((round.action == ModAction::kAllow) == (k == 0));
  }
}

TEST_CASE("same seed reproduces the trace bit for bit, new seeds change it",
          "[moderation][simulate][determinism]") {
  ModerationScenario scenario;
  scenario.rounds = 2'000;
  scenario.seed = 42;
  auto a = simulate_moderation(scenario);
  auto b = simulate_moderation(scenario);
  REQUIRE(a.rounds.size() == b.rounds.size());
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    REQUIRE(a.rounds[i].user_type == b.rounds[i].user_type);
    REQUIRE(a.rounds[i].suspicious_count == b.rounds[i].suspicious_count);
    REQUIRE(a.rounds[i].belief_post == b.rounds[i].belief_post);
    REQUIRE(a.rounds[i].action == b.rounds[i].action);
  }
  scenario.seed = 43;
  auto c = simulate_moderation(scenario);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.rounds.size() && !any_difference; ++i)
    any_difference = a.rounds[i].user_type != c.rounds[i].user_type ||
                     a.rounds[i].suspicious_count != c.rounds[i].suspicious_count;
  REQUIRE(any_difference);
}

TEST_CASE("label offsets shift realized payoffs per round", "[moderation][labels]") {
  ModerationScenario scenario;
  scenario.arrival_p = 1.0;
  scenario.signal_model = {1.0, 0.0};
  scenario.signals_per_user = 1;
  scenario.rounds = 50;
  scenario.seed = 3;
  LabelSpace space({{"apology", "none"}, {"standard", "benign_claim"}});
  LabelOffsetTable offsets(space);
  // The user forgives a refusal that arrives with an apology...
  offsets.set(1, {0, 0}, 1.0);
  offsets.set(1, {0, 1}, 1.0);
  // ...while issuing apologies costs the moderator a little credibility.
  offsets.set(0, {0, 0}, -0.25);
  offsets.set(0, {0, 1}, -0.25);
  ModerationLabels labels(space, offsets);
  labels.moderator_label_by_action = {0, 1, 1};  // apologize only when refusing
  labels.user_label_by_type = {0, 1};
  scenario.labels = labels;
  auto trace = simulate_moderation(scenario);
  for (const auto& round : trace.rounds) {
    REQUIRE(round.action == ModAction::kRefuse);
    REQUIRE_THAT(round.user_payoff, WithinAbs(-1.0, 0.0));      // -2 + 1
    REQUIRE_THAT(round.moderator_payoff, WithinAbs(2.75, 0.0)); // 3 - 0.25
  }
}

TEST_CASE("exploration forces dominated actions into the trace", "[moderation][simulate]") {
  ModerationScenario scenario;
  scenario.rounds = 5'000;
  scenario.explore_epsilon = 0.5;
  scenario.seed = 8;
  auto trace = simulate_moderation(scenario);
  long long filter = 0;
  for (const auto& round : trace.rounds)
    if (round.action == ModAction::kFilter) ++filter;
  // Roughly rounds * 0.5 / 3 filters expected; anything positive proves the
  // exploration path runs, and the wide band guards against flakiness.
  REQUIRE(filter > 500);
  REQUIRE(filter < 1200);
}

TEST_CASE("frequencies bucket the trace and sum to one", "[moderation][frequencies]") {
  ModerationScenario scenario;
  scenario.rounds = 2'500;
  scenario.seed = 11;
  auto trace = simulate_moderation(scenario);
  auto rows = action_frequencies(trace, 1000);
  REQUIRE(rows.size() == 3);
  REQUIRE(rows[0].round == 1000);
  REQUIRE(rows[1].round == 2000);
  REQUIRE(rows[2].round == 2500);  // tail bucket of 500 rounds
  for (const auto& row : rows)
    REQUIRE_THAT(row.refuse + row.filter + row.allow, WithinAbs(1.0, 1e-12));
  // Recount the tail bucket by hand.
  long long allow_tail = 0;
  for (std::size_t i = 2000; i < 2500; ++i)
    if (trace.rounds[i].action == ModAction::kAllow) ++allow_tail;
  REQUIRE_THAT(rows[2].allow, WithinAbs(static_cast<double>(allow_tail) / 500.0, 1e-12));
}

TEST_CASE("refuse rate grows with the adversarial arrival rate",
          "[moderation][frequencies][property]") {
  double previous = -1.0;
  for (double p : {0.05, 0.15, 0.5}) {
    ModerationScenario scenario;
    scenario.arrival_p = p;
    scenario.rounds = 20'000;
    scenario.seed = 21;
    auto trace = simulate_moderation(scenario);
    auto rows = action_frequencies(trace, scenario.rounds);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].refuse > previous);
    previous = rows[0].refuse;
  }
}

TEST_CASE("invalid scenarios fail before any round runs", "[moderation][errors]") {
  ModerationScenario scenario;
  scenario.arrival_p = 1.5;
  REQUIRE_THROWS_AS(simulate_moderation(scenario), std::invalid_argument);
  scenario.arrival_p = 0.15;
  scenario.signals_per_user = 0;
  REQUIRE_THROWS_AS(simulate_moderation(scenario), std::invalid_argument);
  scenario.signals_per_user = 3;
  scenario.rounds = 0;
  REQUIRE_THROWS_AS(simulate_moderation(scenario), std::invalid_argument);
  scenario.rounds = 10;
  scenario.explore_epsilon = -0.1;
  REQUIRE_THROWS_AS(simulate_moderation(scenario), std::invalid_argument);
  scenario.explore_epsilon = 0.0;
  auto trace = simulate_moderation(scenario);
  REQUIRE_THROWS_AS(action_frequencies(trace, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(action_frequencies(trace, 11), std::invalid_argument);
}
