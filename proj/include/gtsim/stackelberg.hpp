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

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gtsim/game.hpp"

namespace gtsim {

struct StackelbergSolution {
  MixedStrategy leader;      // committed mixture for player 0
  int follower_action = 0;   // pure best response chosen for player 1
  double leader_value = 0.0;
  double follower_value = 0.0;
};

namespace detail {

// Enumerates all mixtures (k_0/n, ..., k_{m-1}/n) with sum k_i = n.
inline void enumerate_simplex_grid(int actions, int steps,
                                   std::vector<int>& counts, int position, int remaining,
                                   const std::function<void(const std::vector<int>&)>& visit) {
  if (position == actions - 1) {
    counts[position] = remaining;
    visit(counts);
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    counts[position] = k;
    enumerate_simplex_grid(actions, steps, counts, position + 1, remaining - k, visit);
  }
}

}  // namespace detail

// Commitment solver for two-player games: player 0 (the leader) commits to
// a mixture, player 1 (the follower) observes it and plays a pure best
// response, breaking indifference in the leader's favor. The leader simplex
// is searched on a grid of step 1/n with n = ceil(1/resolution), which
// always contains the pure strategies. An action counts as a follower best
// response when it comes within 1e-9 of the follower's optimum, so at
// indifference points every tied action is considered and the leader keeps
// the most favorable one.
inline StackelbergSolution solve_stackelberg(const NormalFormGame& game, double grid_resolution) {
  if (game.num_players() != 2)
    throw std::invalid_argument("solve_stackelberg: exactly two players required");
  if (!(grid_resolution > 0.0) || grid_resolution > 0.5)
    throw std::invalid_argument("solve_stackelberg: grid resolution must lie in (0, 0.5]");
  const int leader_actions = game.action_count(0);
  const int follower_actions = game.action_count(1);
  const int steps = static_cast<int>(std::ceil(1.0 / grid_resolution - 1e-12));

  // Payoffs as matrices for direct expectation sums.
  std::vector<std::vector<double>> u_leader(leader_actions, std::vector<double>(follower_actions));
  std::vector<std::vector<double>> u_follower(leader_actions, std::vector<double>(follower_actions));
  for (int a = 0; a < leader_actions; ++a)
    for (int f = 0; f < follower_actions; ++f) {
      const std::vector<int> profile = {a, f};
      u_leader[a][f] = game.payoff(0, profile);
      u_follower[a][f] = game.payoff(1, profile);
    }

  constexpr double kTieTolerance = 1e-9;
  bool found = false;
  StackelbergSolution best;
  std::vector<int> counts(leader_actions, 0);
  std::vector<double> mixture(leader_actions, 0.0);

  auto consider = [&](const std::vector<int>& grid_counts) {
    for (int a = 0; a < leader_actions; ++a)
      mixture[a] = static_cast<double>(grid_counts[a]) / steps;
    std::vector<double> follower_values(follower_actions, 0.0);
    for (int f = 0; f < follower_actions; ++f)
      for (int a = 0; a < leader_actions; ++a)
        follower_values[f] += mixture[a] * u_follower[a][f];
    double follower_best = follower_values[0];
    for (int f = 1; f < follower_actions; ++f)
      if (follower_values[f] > follower_best) follower_best = follower_values[f];
    for (int f = 0; f < follower_actions; ++f) {
      if (follower_values[f] < follower_best - kTieTolerance) continue;
      double leader_value = 0.0;
      for (int a = 0; a < leader_actions; ++a) leader_value += mixture[a] * u_leader[a][f];
      if (!found || leader_value > best.leader_value) {
        found = true;
        best.leader.probs = mixture;
        best.follower_action = f;
        best.leader_value = leader_value;
        best.follower_value = follower_values[f];
      }
    }
  };

  detail::enumerate_simplex_grid(leader_actions, steps, counts, 0, steps, consider);
  if (!found)
    throw std::runtime_error("solve_stackelberg: no feasible commitment at this resolution");
  return best;
}

}  // namespace gtsim
