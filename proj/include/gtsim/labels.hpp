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

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gtsim/game.hpp"

namespace gtsim {

// Finite set of natural-language labels each player can attach to a move.
// Labels are addressed by index internally and by identifier at the API
// boundary; an unknown identifier is an input error, not a silent zero.
class LabelSpace {
 public:
  explicit LabelSpace(std::vector<std::vector<std::string>> labels)
      : labels_(std::move(labels)) {
    for (const auto& per_player : labels_) {
      if (per_player.empty())
        throw std::invalid_argument("labels: every player needs at least one label");
      for (std::size_t i = 0; i < per_player.size(); ++i)
        for (std::size_t j = i + 1; j < per_player.size(); ++j)
          if (per_player[i] == per_player[j])
            throw std::invalid_argument("labels: duplicate label '" + per_player[i] + "'");
    }
  }

  int num_players() const { return static_cast<int>(labels_.size()); }
  int count(int player) const { return static_cast<int>(labels_.at(player).size()); }
  const std::string& name(int player, int label) const { return labels_.at(player).at(label); }

  int index_of(int player, const std::string& name) const {
    const auto& per_player = labels_.at(player);
    for (std::size_t i = 0; i < per_player.size(); ++i)
      if (per_player[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("labels: unknown label '" + name + "' for player " +
                                std::to_string(player));
  }

 private:
  std::vector<std::vector<std::string>> labels_;
};

// Additive utility offsets keyed by (player, full label profile). Entries
// default to zero, so a payoff-neutral label needs no row. Offsets depend on
// labels only, never on the underlying actions.
class LabelOffsetTable {
 public:
  explicit LabelOffsetTable(const LabelSpace& space) : counts_(space.num_players()) {
    for (int i = 0; i < space.num_players(); ++i) counts_[i] = space.count(i);
    offsets_.resize(counts_.size());
  }

  int num_players() const { return static_cast<int>(counts_.size()); }
  int label_count(int player) const { return counts_.at(player); }

  void set(int player, std::vector<int> label_profile, double offset) {
    validate_player(player);
    validate_labels(label_profile);
    offsets_[player][std::move(label_profile)] = offset;
  }

  double offset(int player, std::span<const int> label_profile) const {
    validate_player(player);
    validate_labels(label_profile);
    const auto& table = offsets_[player];
    auto it = table.find(std::vector<int>(label_profile.begin(), label_profile.end()));
    return it == table.end() ? 0.0 : it->second;
  }

  // Sorted, deterministic view of the non-zero entries for one player.
  const std::map<std::vector<int>, double>& entries(int player) const {
    validate_player(player);
    return offsets_[player];
  }

 private:
  void validate_player(int player) const {
    if (player < 0 || player >= num_players())
      throw std::invalid_argument("label offsets: player index out of range");
  }
  void validate_labels(std::span<const int> profile) const {
    if (profile.size() != counts_.size())
      throw std::invalid_argument("label offsets: label profile length does not match player count");
    for (std::size_t i = 0; i < counts_.size(); ++i)
      if (profile[i] < 0 || profile[i] >= counts_[i])
        throw std::invalid_argument("label offsets: label index out of range for player " +
                                    std::to_string(i));
  }

  std::vector<int> counts_;
  std::vector<std::map<std::vector<int>, double>> offsets_;
};

// Utility of an (action profile, label profile) pair: the base game payoff
// plus the player's label offset.
inline double total_payoff(const NormalFormGame& game, const LabelOffsetTable& table,
                           std::span<const int> actions, std::span<const int> labels,
                           int player) {
  if (table.num_players() != game.num_players())
    throw std::invalid_argument("total_payoff: label table and game disagree on player count");
  if (player < 0 || player >= game.num_players())
    throw std::invalid_argument("total_payoff: player index out of range");
  return game.payoff(player, actions) + table.offset(player, labels);
}

// Expands a labeled game into an ordinary normal-form game over the product
// moves (action, label). Player i's move index a * L_i + l decodes back as
// action a = move / L_i and label l = move % L_i. Every payoff entry equals
// total_payoff at the decoded profile, so equilibrium analysis of labeled
// games reduces to the plain game tools.
inline NormalFormGame augment_game(const NormalFormGame& game, const LabelSpace& space,
                                   const LabelOffsetTable& table) {
  if (space.num_players() != game.num_players() || table.num_players() != game.num_players())
    throw std::invalid_argument("augment_game: label space and game disagree on player count");
  const int n = game.num_players();
  std::vector<int> counts(n);
  long long profiles = 1;
  for (int i = 0; i < n; ++i) {
    const long long c = static_cast<long long>(game.action_count(i)) * space.count(i);
    if (c > NormalFormGame::kMaxProfiles || profiles > NormalFormGame::kMaxProfiles / c)
      throw std::length_error("augment_game: product action space exceeds the size cap");
    counts[i] = static_cast<int>(c);
    profiles *= c;
  }

  std::vector<std::vector<double>> payoffs(n, std::vector<double>(profiles));
  std::vector<int> joint(n, 0), actions(n), labels(n);
  for (long long idx = 0; idx < profiles; ++idx) {
    for (int i = 0; i < n; ++i) {
      actions[i] = joint[i] / space.count(i);
      labels[i] = joint[i] % space.count(i);
    }
    for (int p = 0; p < n; ++p) payoffs[p][idx] = total_payoff(game, table, actions, labels, p);
    for (int i = n - 1; i >= 0; --i) {
      if (++joint[i] < counts[i]) break;
      joint[i] = 0;
    }
  }
  return NormalFormGame(std::move(counts), std::move(payoffs));
}

}  // namespace gtsim
