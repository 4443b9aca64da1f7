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

#include <array>
#include <stdexcept>

namespace gtsim {

enum class UserType { kLegitimate = 0, kAdversarial = 1 };

enum class ModAction { kRefuse = 0, kFilter = 1, kAllow = 2 };
constexpr int kNumModActions = 3;

inline const char* to_string(UserType t) {
  return t == UserType::kLegitimate ? "legitimate" : "adversarial";
}
inline const char* to_string(ModAction a) {
  switch (a) {
    case ModAction::kRefuse: return "refuse";
    case ModAction::kFilter: return "filter";
    default: return "allow";
  }
}

// Probability the moderator assigns to facing an adversarial user. Kept off
// the {0, 1} endpoints so Bayes updates can always move it: the clamp floor
// stands in for "almost certainly legitimate" and the ceiling for "almost
// certainly adversarial".
class BeliefState {
 public:
  static constexpr double kFloor = 1e-6;
  static constexpr double kCeiling = 1.0 - 1e-6;

  explicit BeliefState(double beta) : beta_(clamp(beta)) {
    if (!(beta >= 0.0) || !(beta <= 1.0))
      throw std::invalid_argument("belief: prior must lie in [0, 1]");
  }

  double beta() const { return beta_; }

  static double clamp(double b) {
    if (b < kFloor) return kFloor;
    if (b > kCeiling) return kCeiling;
    return b;
  }

 private:
  double beta_;
};

// Per-round signal channel: an adversarial user trips the suspicious-label
// detector with probability q_adv, a legitimate one with probability q_leg.
struct SignalModel {
  double q_adv = 0.7;
  double q_leg = 0.2;

  void validate() const {
    if (!(q_adv >= 0.0) || !(q_adv <= 1.0) || !(q_leg >= 0.0) || !(q_leg <= 1.0))
      throw std::invalid_argument("signal model: probabilities must lie in [0, 1]");
  }
};

// One Bayes step on the adversarial-user belief:
//   beta' = beta * L_adv / (beta * L_adv + (1 - beta) * L_leg)
// where L_* is the likelihood of the observed signal under each type. Both
// likelihoods zero means the model assigns the observation no probability at
// all, which is a modeling error rather than data.
inline BeliefState bayes_update(BeliefState belief, bool suspicious, const SignalModel& model) {
  model.validate();
  const double l_adv = suspicious ? model.q_adv : 1.0 - model.q_adv;
  const double l_leg = suspicious ? model.q_leg : 1.0 - model.q_leg;
  if (l_adv == 0.0 && l_leg == 0.0)
    throw std::domain_error("bayes_update: observed signal has zero likelihood under both types");
  const double numerator = belief.beta() * l_adv;
  const double denominator = numerator + (1.0 - belief.beta()) * l_leg;
  return BeliefState(numerator / denominator);
}

// Stage payoffs for the moderation interaction, indexed by the user's true
// type and the moderator's action. The defaults encode a moderator that
// values letting legitimate traffic through (3) over refusing it (2), pays
// dearly for letting an adversary through (-6), and a user who gains most
// from being allowed (5 when legitimate, 6 when adversarial).
struct ModerationPayoffs {
  // [type][action], types ordered legitimate then adversarial, actions
  // ordered refuse, filter, allow.
  std::array<std::array<double, 3>, 2> moderator = {{{2, 1, 3}, {3, -1, -6}}};
  std::array<std::array<double, 3>, 2> user = {{{0, 2, 5}, {-2, 1, 6}}};

  double moderator_payoff(UserType t, ModAction a) const {
    return moderator[static_cast<int>(t)][static_cast<int>(a)];
  }
  double user_payoff(UserType t, ModAction a) const {
    return user[static_cast<int>(t)][static_cast<int>(a)];
  }
};

// Moderator's expected payoff per action under belief beta, written as
// legit + beta * (adv - legit) so each value costs one multiply and one add.
// With the default payoffs: refuse 2+b, filter 1-2b, allow 3-9b.
inline std::array<double, 3> expected_action_values(double beta, const ModerationPayoffs& p) {
  if (!(beta >= 0.0) || !(beta <= 1.0))
    throw std::invalid_argument("expected_action_values: belief must lie in [0, 1]");
  std::array<double, 3> values;
  for (int a = 0; a < kNumModActions; ++a) {
    const double legit = p.moderator[0][a];
    const double adv = p.moderator[1][a];
    values[a] = legit + beta * (adv - legit);
  }
  return values;
}

// Maximizing action under the current belief, ties toward the lowest index
// (refuse before filter before allow). With the default payoffs refuse beats
// filter at every belief, and allow wins exactly when beta < 0.1.
inline ModAction belief_best_response(double beta, const ModerationPayoffs& p) {
  const auto values = expected_action_values(beta, p);
  int best = 0;
  for (int a = 1; a < kNumModActions; ++a)
    if (values[a] > values[best]) best = a;
  return static_cast<ModAction>(best);
}

}  // namespace gtsim
