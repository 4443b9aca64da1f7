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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gtsim {

// Finite normal-form game over N players with a dense payoff tensor.
// Joint pure profiles are indexed row-major with player 0 varying slowest:
//   index(a_0, ..., a_{N-1}) = ((a_0 * |A_1| + a_1) * |A_2| + a_2) ...
// All functions here are pure; a const game is safe to share across threads.
class NormalFormGame {
 public:
  // Hard cap on the number of joint pure profiles. Everything in this
  // module enumerates the full tensor, so the cap keeps construction and
  // queries tractable and makes the failure mode explicit.
  static constexpr long long kMaxProfiles = 10'000'000;

  // payoffs[i] is player i's flattened tensor, one entry per joint profile.
  NormalFormGame(std::vector<int> action_counts,
                 std::vector<std::vector<double>> payoffs)
      : action_counts_(std::move(action_counts)), payoffs_(std::move(payoffs)) {
    if (action_counts_.empty())
      throw std::invalid_argument("game: at least one player required");
    num_profiles_ = 1;
    for (int c : action_counts_) {
      if (c < 1) throw std::invalid_argument("game: every player needs at least one action");
      if (num_profiles_ > kMaxProfiles / c)
        throw std::length_error("game: joint action space exceeds the size cap");
      num_profiles_ *= c;
    }
    if (static_cast<long long>(payoffs_.size()) != num_players())
      throw std::invalid_argument("game: one payoff tensor per player required");
    for (const auto& tensor : payoffs_) {
      if (static_cast<long long>(tensor.size()) != num_profiles_)
        throw std::invalid_argument("game: payoff tensor size does not match the joint action space");
      for (double v : tensor)
        if (!std::isfinite(v))
          throw std::invalid_argument("game: payoffs must be finite");
    }
  }

  // Convenience for two-player games given as row/column matrices.
  static NormalFormGame bimatrix(const std::vector<std::vector<double>>& row,
                                 const std::vector<std::vector<double>>& col) {
    if (row.empty() || row[0].empty())
      throw std::invalid_argument("bimatrix: empty payoff matrix");
    const int r = static_cast<int>(row.size());
    const int c = static_cast<int>(row[0].size());
    if (static_cast<int>(col.size()) != r)
      throw std::invalid_argument("bimatrix: matrices must have equal shape");
    std::vector<double> u0, u1;
    u0.reserve(static_cast<std::size_t>(r) * c);
    u1.reserve(static_cast<std::size_t>(r) * c);
    for (int i = 0; i < r; ++i) {
      if (static_cast<int>(row[i].size()) != c || static_cast<int>(col[i].size()) != c)
        throw std::invalid_argument("bimatrix: ragged payoff matrix");
      for (int j = 0; j < c; ++j) {
        u0.push_back(row[i][j]);
        u1.push_back(col[i][j]);
      }
    }
    return NormalFormGame({r, c}, {std::move(u0), std::move(u1)});
  }

  int num_players() const { return static_cast<int>(action_counts_.size()); }
  int action_count(int player) const { return action_counts_.at(player); }
  const std::vector<int>& action_counts() const { return action_counts_; }
  long long num_profiles() const { return num_profiles_; }

  long long profile_index(std::span<const int> profile) const {
    if (static_cast<int>(profile.size()) != num_players())
      throw std::invalid_argument("game: profile length does not match player count");
    long long idx = 0;
    for (int i = 0; i < num_players(); ++i) {
      if (profile[i] < 0 || profile[i] >= action_counts_[i])
        throw std::invalid_argument("game: action index out of range for player " + std::to_string(i));
      idx = idx * action_counts_[i] + profile[i];
    }
    return idx;
  }

  double payoff(int player, std::span<const int> profile) const {
    return payoffs_.at(player)[profile_index(profile)];
  }

  double payoff_at(int player, long long flat_index) const {
    return payoffs_.at(player).at(flat_index);
  }

  // Decodes a flat profile index into per-player actions.
  std::vector<int> profile_at(long long flat_index) const {
    std::vector<int> profile(num_players());
    for (int i = num_players() - 1; i >= 0; --i) {
      profile[i] = static_cast<int>(flat_index % action_counts_[i]);
      flat_index /= action_counts_[i];
    }
    return profile;
  }

 private:
  std::vector<int> action_counts_;
  std::vector<std::vector<double>> payoffs_;
  long long num_profiles_ = 0;
};

// Probability distribution over one player's actions.
struct MixedStrategy {
  std::vector<double> probs;

  static MixedStrategy pure(int action, int action_count) {
    MixedStrategy s;
    s.probs.assign(action_count, 0.0);
    s.probs.at(action) = 1.0;
    return s;
  }

  static MixedStrategy uniform(int action_count) {
    MixedStrategy s;
    s.probs.assign(action_count, 1.0 / action_count);
    return s;
  }
};

using StrategyProfile = std::vector<MixedStrategy>;

inline void validate_strategy(const MixedStrategy& s, int action_count) {
  if (static_cast<int>(s.probs.size()) != action_count)
    throw std::invalid_argument("strategy: probability vector length does not match action count");
  double sum = 0.0;
  for (double p : s.probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument("strategy: probabilities must be finite and non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("strategy: probabilities must sum to 1 within 1e-9");
}

inline void validate_profile(const NormalFormGame& game, const StrategyProfile& profile) {
  if (static_cast<int>(profile.size()) != game.num_players())
    throw std::invalid_argument("profile: one strategy per player required");
  for (int i = 0; i < game.num_players(); ++i) validate_strategy(profile[i], game.action_count(i));
}

// Exact expectation of player's payoff under independent mixing: the sum
// over all joint pure profiles of the probability product times the payoff.
inline double expected_utility(const NormalFormGame& game, const StrategyProfile& profile,
                               int player) {
  validate_profile(game, profile);
  if (player < 0 || player >= game.num_players())
    throw std::invalid_argument("expected_utility: player index out of range");
  const int n = game.num_players();
  std::vector<int> joint(n, 0);
  double total = 0.0;
  for (long long idx = 0; idx < game.num_profiles(); ++idx) {
    double prob = 1.0;
    for (int i = 0; i < n; ++i) prob *= profile[i].probs[joint[i]];
    if (prob != 0.0) total += prob * game.payoff_at(player, idx);
    for (int i = n - 1; i >= 0; --i) {
      if (++joint[i] < game.action_count(i)) break;
      joint[i] = 0;
    }
  }
  return total;
}

struct BestResponse {
  int action = 0;
  double value = 0.0;
};

// Expected payoff of each pure action against the others' mixtures; returns
// the maximizing action, ties broken toward the lowest index.
inline BestResponse best_response(const NormalFormGame& game, const StrategyProfile& profile,
                                  int player) {
  validate_profile(game, profile);
  if (player < 0 || player >= game.num_players())
    throw std::invalid_argument("best_response: player index out of range");
  const int n = game.num_players();
  std::vector<double> action_values(game.action_count(player), 0.0);
  std::vector<int> joint(n, 0);
  for (long long idx = 0; idx < game.num_profiles(); ++idx) {
    double prob_others = 1.0;
    for (int i = 0; i < n; ++i)
      if (i != player) prob_others *= profile[i].probs[joint[i]];
    if (prob_others != 0.0) action_values[joint[player]] += prob_others * game.payoff_at(player, idx);
    for (int i = n - 1; i >= 0; --i) {
      if (++joint[i] < game.action_count(i)) break;
      joint[i] = 0;
    }
  }
  BestResponse br;
  br.action = 0;
  br.value = action_values[0];
  for (int a = 1; a < static_cast<int>(action_values.size()); ++a) {
    if (action_values[a] > br.value) {
      br.value = action_values[a];
      br.action = a;
    }
  }
  return br;
}

// A profile is an epsilon-equilibrium when no player can gain more than
// epsilon by a unilateral deviation. Pure deviations suffice: any mixed
// deviation's value is a convex combination of pure ones.
inline bool is_epsilon_nash(const NormalFormGame& game, const StrategyProfile& profile,
                            double epsilon) {
  if (!(epsilon >= 0.0))
    throw std::invalid_argument("is_epsilon_nash: epsilon must be non-negative");
  for (int i = 0; i < game.num_players(); ++i) {
    const double current = expected_utility(game, profile, i);
    const double best = best_response(game, profile, i).value;
    if (best > current + epsilon) return false;
  }
  return true;
}

// Finite-horizon discounted sum: sum_t delta^{t-1} * payoffs[t-1].
inline double discounted_sum(std::span<const double> payoffs, double delta) {
  if (!(delta > 0.0) || delta > 1.0)
    throw std::invalid_argument("discounted_sum: delta must lie in (0, 1]");
  double total = 0.0;
  double weight = 1.0;
  for (double p : payoffs) {
    total += weight * p;
    weight *= delta;
  }
  return total;
}

}  // namespace gtsim
