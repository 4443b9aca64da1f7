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

#include <algorithm>
#include <limits>
#include <vector>

#include "gtsim/game.hpp"
#include "gtsim/rng.hpp"
#include "gtsim/zero_sum.hpp"

using Catch::Matchers::WithinAbs;
using namespace gtsim;

namespace {

// Prisoner's dilemma with temptation 5, reward 3, punishment 1, sucker 0.
NormalFormGame prisoners_dilemma() {
  return NormalFormGame::bimatrix({{3, 0}, {5, 1}}, {{3, 5}, {0, 1}});
}

NormalFormGame matching_pennies() {
  return NormalFormGame::bimatrix({{1, -1}, {-1, 1}}, {{-1, 1}, {1, -1}});
}

// Row player's payoff [[2,-1],[-1,1]], column player gets the negation.
NormalFormGame skewed_zero_sum() {
  return NormalFormGame::bimatrix({{2, -1}, {-1, 1}}, {{-2, 1}, {1, -1}});
}

StrategyProfile pure_profile(const NormalFormGame& game, const std::vector<int>& actions) {
  StrategyProfile profile;
  for (int i = 0; i < game.num_players(); ++i)
    profile.push_back(MixedStrategy::pure(actions[i], game.action_count(i)));
  return profile;
}

// Reference expectation computed recursively, independent of the library's
// flat-index loop.
double expected_utility_oracle(const NormalFormGame& game, const StrategyProfile& profile,
                               int player, std::vector<int>& actions, int depth) {
  if (depth == game.num_players()) return game.payoff(player, actions);
  double total = 0.0;
  for (int a = 0; a < game.action_count(depth); ++a) {
    actions[depth] = a;
    total += profile[depth].probs[a] *
             expected_utility_oracle(game, profile, player, actions, depth + 1);
  }
  return total;
}

double expected_utility_oracle(const NormalFormGame& game, const StrategyProfile& profile,
                               int player) {
  std::vector<int> actions(game.num_players(), 0);
  return expected_utility_oracle(game, profile, player, actions, 0);
}

NormalFormGame random_game(Rng& rng, std::vector<int> action_counts, int payoff_range) {
  long long profiles = 1;
  for (int c : action_counts) profiles *= c;
  std::vector<std::vector<double>> payoffs;
  for (std::size_t i = 0; i < action_counts.size(); ++i) {
    std::vector<double> tensor(profiles);
    for (auto& v : tensor)
      v = static_cast<double>(rng.next_index(2 * payoff_range + 1) - payoff_range);
    payoffs.push_back(std::move(tensor));
  }
  return NormalFormGame(std::move(action_counts), std::move(payoffs));
}

StrategyProfile random_profile(Rng& rng, const NormalFormGame& game) {
  StrategyProfile profile;
  for (int i = 0; i < game.num_players(); ++i) {
    MixedStrategy s;
    double sum = 0.0;
    for (int a = 0; a < game.action_count(i); ++a) {
      s.probs.push_back(0.05 + rng.next_double());
      sum += s.probs.back();
    }
    for (double& p : s.probs) p /= sum;
    profile.push_back(std::move(s));
  }
  return profile;
}

}  // namespace

TEST_CASE("expected utility matches hand expansion", "[game][expected_utility]") {
  auto game = skewed_zero_sum();
  StrategyProfile profile = {MixedStrategy{{0.4, 0.6}}, MixedStrategy{{0.5, 0.5}}};
  // 0.4*0.5*2 + 0.4*0.5*(-1) + 0.6*0.5*(-1) + 0.6*0.5*1 = 0.2
  REQUIRE_THAT(expected_utility(game, profile, 0), WithinAbs(0.2, 1e-12));
  REQUIRE_THAT(expected_utility(game, profile, 1), WithinAbs(-0.2, 1e-12));
}

TEST_CASE("expected utility of pure profiles reads the tensor", "[game][expected_utility]") {
  auto pd = prisoners_dilemma();
  REQUIRE_THAT(expected_utility(pd, pure_profile(pd, {1, 1}), 0), WithinAbs(1.0, 0.0));
  REQUIRE_THAT(expected_utility(pd, pure_profile(pd, {0, 1}), 0), WithinAbs(0.0, 0.0));
  REQUIRE_THAT(expected_utility(pd, pure_profile(pd, {0, 1}), 1), WithinAbs(5.0, 0.0));
}

TEST_CASE("uniform matching pennies is worth zero", "[game][expected_utility]") {
  auto mp = matching_pennies();
  StrategyProfile uniform = {MixedStrategy::uniform(2), MixedStrategy::uniform(2)};
  REQUIRE_THAT(expected_utility(mp, uniform, 0), WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(expected_utility(mp, uniform, 1), WithinAbs(0.0, 1e-12));
}

TEST_CASE("expected utility agrees with recursive oracle on random games", "[game][property]") {
  Rng rng(20250814);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> counts;
    int players = 2 + rng.next_index(2);
    for (int i = 0; i < players; ++i) counts.push_back(2 + rng.next_index(2));
    auto game = random_game(rng, counts, 5);
    auto profile = random_profile(rng, game);
    for (int p = 0; p < players; ++p)
      REQUIRE_THAT(expected_utility(game, profile, p),
                   WithinAbs(expected_utility_oracle(game, profile, p), 1e-9));
  }
}

TEST_CASE("best response against cooperation is defection", "[game][best_response]") {
  auto pd = prisoners_dilemma();
  StrategyProfile vs_cooperate = pure_profile(pd, {0, 0});
  auto br = best_response(pd, vs_cooperate, 0);
  REQUIRE(br.action == 1);
  REQUIRE_THAT(br.value, WithinAbs(5.0, 0.0));
}

TEST_CASE("best response against a uniform column player", "[game][best_response]") {
  auto game = skewed_zero_sum();
  StrategyProfile profile = {MixedStrategy::pure(0, 2), MixedStrategy::uniform(2)};
  auto br = best_response(game, profile, 0);
  // Row 0 earns 0.5*2 + 0.5*(-1) = 0.5, row 1 earns 0.
  REQUIRE(br.action == 0);
  REQUIRE_THAT(br.value, WithinAbs(0.5, 1e-12));
}

TEST_CASE("best response ties break toward the lowest index", "[game][best_response]") {
  // Both rows earn identical payoffs against every column.
  auto game = NormalFormGame::bimatrix({{2, 4}, {2, 4}}, {{1, 1}, {1, 1}});
  StrategyProfile profile = {MixedStrategy::uniform(2), MixedStrategy::uniform(2)};
  REQUIRE(best_response(game, profile, 0).action == 0);
}

TEST_CASE("reordering equal-value actions moves the index, never the value",
          "[game][best_response][property]") {
  // Rows 0 and 2 are duplicates; row 1 is strictly worse.
  auto game = NormalFormGame::bimatrix({{3, 1}, {0, 0}, {3, 1}}, {{0, 0}, {0, 0}, {0, 0}});
  StrategyProfile profile = {MixedStrategy::uniform(3), MixedStrategy::uniform(2)};
  auto br = best_response(game, profile, 0);
  REQUIRE(br.action == 0);
  auto swapped = NormalFormGame::bimatrix({{0, 0}, {3, 1}, {3, 1}}, {{0, 0}, {0, 0}, {0, 0}});
  auto br_swapped = best_response(swapped, profile, 0);
  REQUIRE(br_swapped.action == 1);
  REQUIRE_THAT(br_swapped.value, WithinAbs(br.value, 0.0));
}

TEST_CASE("mutual defection is a strict equilibrium, mutual cooperation is not",
          "[game][nash]") {
  auto pd = prisoners_dilemma();
  REQUIRE(is_epsilon_nash(pd, pure_profile(pd, {1, 1}), 0.0));
  REQUIRE_FALSE(is_epsilon_nash(pd, pure_profile(pd, {0, 0}), 0.0));
  // Deviating from mutual cooperation gains 2, so epsilon 2 absorbs it.
  REQUIRE(is_epsilon_nash(pd, pure_profile(pd, {0, 0}), 2.0));
  REQUIRE_FALSE(is_epsilon_nash(pd, pure_profile(pd, {0, 0}), 1.999));
}

TEST_CASE("uniform matching pennies is an equilibrium", "[game][nash]") {
  auto mp = matching_pennies();
  StrategyProfile uniform = {MixedStrategy::uniform(2), MixedStrategy::uniform(2)};
  REQUIRE(is_epsilon_nash(mp, uniform, 1e-9));
  REQUIRE(is_epsilon_nash(mp, uniform, 0.0));
}

TEST_CASE("negative epsilon is rejected", "[game][nash][errors]") {
  auto mp = matching_pennies();
  StrategyProfile uniform = {MixedStrategy::uniform(2), MixedStrategy::uniform(2)};
  REQUIRE_THROWS_AS(is_epsilon_nash(mp, uniform, -1e-9), std::invalid_argument);
}

TEST_CASE("epsilon nash agrees with exhaustive deviation enumeration",
          "[game][nash][property]") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<int> counts;
    int players = 2 + rng.next_index(2);
    for (int i = 0; i < players; ++i) counts.push_back(2 + rng.next_index(2));
    auto game = random_game(rng, counts, 3);
    auto profile = trial % 2 == 0 ? random_profile(rng, game)
                                  : pure_profile(game, [&] {
                                      std::vector<int> a;
                                      for (int c : counts) a.push_back(rng.next_index(c));
                                      return a;
                                    }());
    // Oracle: a profile is an exact equilibrium iff every pure deviation of
    // every player gains nothing, and the total deviation gain is never
    // negative.
    bool oracle_nash = true;
    double total_gain = 0.0;
    for (int p = 0; p < players; ++p) {
      const double current = expected_utility_oracle(game, profile, p);
      double best = -1e300;
      for (int a = 0; a < game.action_count(p); ++a) {
        StrategyProfile deviated = profile;
        deviated[p] = MixedStrategy::pure(a, game.action_count(p));
        best = std::max(best, expected_utility_oracle(game, deviated, p));
      }
      total_gain += best - current;
      if (best > current) oracle_nash = false;
    }
    REQUIRE(total_gain >= -1e-9);
    REQUIRE(is_epsilon_nash(game, profile, 0.0) == oracle_nash);
  }
}

TEST_CASE("discounted sum matches hand expansion", "[game][discounting]") {
  const std::vector<double> stream = {3, -6, 2};
  // 3 - 0.9*6 + 0.81*2 = -0.78
  REQUIRE_THAT(discounted_sum(stream, 0.9), WithinAbs(-0.78, 1e-12));
  const std::vector<double> ones = {1, 1, 1};
  REQUIRE_THAT(discounted_sum(ones, 0.5), WithinAbs(1.75, 1e-12));
  REQUIRE_THAT(discounted_sum(ones, 1.0), WithinAbs(3.0, 0.0));
  REQUIRE_THAT(discounted_sum(std::vector<double>{}, 0.9), WithinAbs(0.0, 0.0));
}

TEST_CASE("discount factor outside (0,1] is rejected", "[game][discounting][errors]") {
  const std::vector<double> stream = {1.0};
  REQUIRE_THROWS_AS(discounted_sum(stream, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(discounted_sum(stream, 1.0 + 1e-9), std::invalid_argument);
  REQUIRE_THROWS_AS(discounted_sum(stream, -0.5), std::invalid_argument);
}

TEST_CASE("malformed games and profiles are rejected", "[game][errors]") {
  REQUIRE_THROWS_AS(NormalFormGame({2, 2}, {{1, 2, 3}, {1, 2, 3, 4}}), std::invalid_argument);
  REQUIRE_THROWS_AS(NormalFormGame({2, 0}, {{}, {}}), std::invalid_argument);
  REQUIRE_THROWS_AS(NormalFormGame({2}, {{1.0, std::numeric_limits<double>::infinity()}}),
                    std::invalid_argument);
  // 500^3 joint profiles exceeds the documented cap.
  REQUIRE_THROWS_AS(NormalFormGame({500, 500, 500}, {{}, {}, {}}), std::length_error);

  auto pd = prisoners_dilemma();
  StrategyProfile bad = {MixedStrategy{{0.5, 0.4}}, MixedStrategy::uniform(2)};
  REQUIRE_THROWS_AS(expected_utility(pd, bad, 0), std::invalid_argument);
  StrategyProfile negative = {MixedStrategy{{1.5, -0.5}}, MixedStrategy::uniform(2)};
  REQUIRE_THROWS_AS(expected_utility(pd, negative, 0), std::invalid_argument);
  StrategyProfile ok = {MixedStrategy::uniform(2), MixedStrategy::uniform(2)};
  REQUIRE_THROWS_AS(expected_utility(pd, ok, 2), std::invalid_argument);
}

TEST_CASE("zero-sum expansion keeps payoffs opposite at random profiles",
          "[game][zero_sum][property]") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> m(2 + rng.next_index(2),
                                       std::vector<double>(2 + rng.next_index(2)));
    for (auto& row : m)
      for (double& v : row) v = static_cast<double>(rng.next_index(11) - 5);
    ZeroSumGame zs{m};
    auto game = zs.to_normal_form();
    auto profile = random_profile(rng, game);
    REQUIRE_THAT(expected_utility(game, profile, 0) + expected_utility(game, profile, 1),
                 WithinAbs(0.0, 1e-12));
  }
}
