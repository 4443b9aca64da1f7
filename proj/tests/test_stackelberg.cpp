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

#include "gtsim/stackelberg.hpp"
#include "gtsim/zero_sum.hpp"

using Catch::Matchers::WithinAbs;
using namespace gtsim;

namespace {

// The follower wants to match the leader's most likely action; committing to
// the indifference point 0.5 and having the tie broken favorably earns the
// leader 2, strictly more than the mixed equilibrium payoff 1.5.
NormalFormGame commitment_game() {
  return NormalFormGame::bimatrix({{0, 3}, {2, 1}}, {{1, 0}, {0, 1}});
}

// Exhaustive reference search written independently of the solver: walks the
// same leader grid, recomputes follower replies, keeps the best pair.
StackelbergSolution grid_oracle(const std::vector<std::vector<double>>& u_leader,
                                const std::vector<std::vector<double>>& u_follower, int steps) {
  const int rows = static_cast<int>(u_leader.size());
  const int cols = static_cast<int>(u_leader[0].size());
  REQUIRE(rows == 2);
  StackelbergSolution best;
  bool found = false;
  for (int k = 0; k <= steps; ++k) {
    const double p = static_cast<double>(k) / steps;
    const std::vector<double> mix = {p, 1.0 - p};
    std::vector<double> fv(cols, 0.0);
    for (int f = 0; f < cols; ++f) fv[f] = mix[0] * u_follower[0][f] + mix[1] * u_follower[1][f];
    double fbest = *std::max_element(fv.begin(), fv.end());
    for (int f = 0; f < cols; ++f) {
      if (fv[f] < fbest - 1e-9) continue;
      double lv = mix[0] * u_leader[0][f] + mix[1] * u_leader[1][f];
      if (!found || lv > best.leader_value) {
        found = true;
        best.leader.probs = mix;
        best.follower_action = f;
        best.leader_value = lv;
        best.follower_value = fv[f];
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("commitment at the indifference point beats the simultaneous game",
          "[stackelberg]") {
  auto sol = solve_stackelberg(commitment_game(), 1e-3);
  REQUIRE_THAT(sol.leader_value, WithinAbs(2.0, 1e-9));
  REQUIRE(sol.follower_action == 1);
  REQUIRE_THAT(sol.leader.probs[0], WithinAbs(0.5, 1e-9));
  REQUIRE_THAT(sol.follower_value, WithinAbs(0.5, 1e-9));
}

TEST_CASE("solver agrees with an exhaustive grid oracle", "[stackelberg][oracle]") {
  const std::vector<std::vector<double>> u_leader = {{0, 3}, {2, 1}};
  const std::vector<std::vector<double>> u_follower = {{1, 0}, {0, 1}};
  auto oracle = grid_oracle(u_leader, u_follower, 1000);
  auto sol = solve_stackelberg(commitment_game(), 1e-3);
  REQUIRE_THAT(sol.leader_value, WithinAbs(oracle.leader_value, 1e-12));
  REQUIRE(sol.follower_action == oracle.follower_action);
  REQUIRE_THAT(sol.leader.probs[0], WithinAbs(oracle.leader.probs[0], 1e-12));
}

TEST_CASE("fixed follower preferences reduce commitment to a pure maximum",
          "[stackelberg]") {
  // The follower strictly prefers its first action whatever the leader does,
  // so the leader simply maximizes its own column-0 payoff.
  auto game = NormalFormGame::bimatrix({{4, 0}, {1, 7}}, {{1, 0}, {1, 0}});
  auto sol = solve_stackelberg(game, 1e-3);
  REQUIRE(sol.follower_action == 0);
  REQUIRE_THAT(sol.leader_value, WithinAbs(4.0, 1e-9));
  REQUIRE_THAT(sol.leader.probs[0], WithinAbs(1.0, 1e-9));
}

TEST_CASE("commitment value of a zero-sum game matches its minimax value",
          "[stackelberg][zero_sum]") {
  const ZeroSumGame zs{{{2, -1}, {-1, 1}}};
  auto stackelberg = solve_stackelberg(zs.to_normal_form(), 1e-3);
  auto minimax = solve_zero_sum(zs, 1e-4, 2'000'000);
  REQUIRE(minimax.converged);
  // Grid quantization can cost at most 2 * resolution * max |payoff|.
  const double slack = 2 * 1e-3 * 2.0 + 1e-4;
  REQUIRE_THAT(stackelberg.leader_value, WithinAbs(minimax.value, slack));
}

TEST_CASE("commitment never pays less than any pure equilibrium", "[stackelberg][property]") {
  using Matrix = std::vector<std::vector<double>>;
  const std::vector<Matrix> leaders = {{{3, 0}, {5, 1}}, {{0, 3}, {2, 1}}, {{2, 2}, {1, 4}}};
  const std::vector<Matrix> followers = {{{3, 5}, {0, 1}}, {{1, 0}, {0, 1}}, {{1, 3}, {2, 0}}};
  for (std::size_t g = 0; g < leaders.size(); ++g) {
    const Matrix& lu = leaders[g];
    const Matrix& fu = followers[g];
    auto game = NormalFormGame::bimatrix(lu, fu);
    auto sol = solve_stackelberg(game, 1e-3);
    double max_payoff = 0.0;
    for (const auto& row : lu)
      for (double v : row) max_payoff = std::max(max_payoff, std::abs(v));
    for (const auto& row : fu)
      for (double v : row) max_payoff = std::max(max_payoff, std::abs(v));
    const double slack = 2 * 1e-3 * max_payoff;
    for (int a = 0; a < 2; ++a)
      for (int f = 0; f < 2; ++f) {
        StrategyProfile pure = {MixedStrategy::pure(a, 2), MixedStrategy::pure(f, 2)};
        if (!is_epsilon_nash(game, pure, 0.0)) continue;
        REQUIRE(sol.leader_value >= expected_utility(game, pure, 0) - slack);
      }
  }
}

TEST_CASE("resolution bounds and player counts are enforced", "[stackelberg][errors]") {
  auto game = commitment_game();
  REQUIRE_THROWS_AS(solve_stackelberg(game, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(solve_stackelberg(game, 0.6), std::invalid_argument);
  REQUIRE_THROWS_AS(solve_stackelberg(game, -0.1), std::invalid_argument);
  auto three = NormalFormGame({2, 2, 2}, {std::vector<double>(8, 0), std::vector<double>(8, 0),
                                          std::vector<double>(8, 0)});
  REQUIRE_THROWS_AS(solve_stackelberg(three, 0.1), std::invalid_argument);
}

TEST_CASE("coarse grids still cover the pure strategies", "[stackelberg]") {
  auto sol = solve_stackelberg(commitment_game(), 0.5);
  // Grid {0, 0.5, 1} still contains the optimum at 0.5.
  REQUIRE_THAT(sol.leader_value, WithinAbs(2.0, 1e-9));
}
