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
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gtsim/belief.hpp"
#include "gtsim/game.hpp"
#include "gtsim/moderation.hpp"
#include "gtsim/rng.hpp"

namespace gtsim {

struct LearningConfig {
  int episodes = 10000;
  double learning_rate = 0.1;
  double discount = 0.95;
  double epsilon_initial = 1.0;
  double epsilon_decay = 0.995;
  double epsilon_floor = 0.05;
  int max_steps = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (episodes < 1) throw std::invalid_argument("learning: episodes must be positive");
    if (!(learning_rate > 0.0) || !(learning_rate <= 1.0))
      throw std::invalid_argument("learning: learning_rate must lie in (0, 1]");
    if (!(discount >= 0.0) || !(discount < 1.0))
      throw std::invalid_argument("learning: discount must lie in [0, 1)");
    if (!(epsilon_initial >= 0.0) || !(epsilon_initial <= 1.0))
      throw std::invalid_argument("learning: epsilon_initial must lie in [0, 1]");
    if (!(epsilon_decay >= 0.0) || !(epsilon_decay <= 1.0))
      throw std::invalid_argument("learning: epsilon_decay must lie in [0, 1]");
    if (!(epsilon_floor >= 0.0) || !(epsilon_floor <= 1.0))
      throw std::invalid_argument("learning: epsilon_floor must lie in [0, 1]");
    if (max_steps < 1) throw std::invalid_argument("learning: max_steps must be positive");
  }
};

// Dense per-agent action-value table over (state, action), zero-initialized.
class QTable {
 public:
  QTable(int state_count, int action_count)
      : states_(state_count), actions_(action_count) {
    if (state_count < 1 || action_count < 1)
      throw std::invalid_argument("qtable: state and action counts must be positive");
    values_.assign(static_cast<std::size_t>(state_count) * action_count, 0.0);
  }

  int state_count() const { return states_; }
  int action_count() const { return actions_; }

  double at(int state, int action) const { return values_[offset(state, action)]; }
  double& at(int state, int action) { return values_[offset(state, action)]; }

  std::vector<double> row(int state) const {
    const std::size_t base = offset(state, 0);
    return std::vector<double>(values_.begin() + base, values_.begin() + base + actions_);
  }

  double row_max(int state) const {
    const std::size_t base = offset(state, 0);
    return *std::max_element(values_.begin() + base, values_.begin() + base + actions_);
  }

  const std::vector<double>& data() const { return values_; }

 private:
  std::size_t offset(int state, int action) const {
    if (state < 0 || state >= states_ || action < 0 || action >= actions_)
      throw std::invalid_argument("qtable: state or action index out of range");
    return static_cast<std::size_t>(state) * actions_ + action;
  }

  int states_;
  int actions_;
  std::vector<double> values_;
};

struct StepResult {
  int next_state = 0;
  std::vector<double> payoffs;
  bool terminal = false;
};

// Environment contract for the tabular learner: a single global discrete
// state observed by every agent, simultaneous joint actions, and per-agent
// payoffs. Implementations own all transition randomness but must draw it
// exclusively from the Rng handed in, so a run is pinned by one seed.
class TabularEnvironment {
 public:
  virtual ~TabularEnvironment() = default;
  virtual int num_agents() const = 0;
  virtual int state_count() const = 0;
  virtual int action_count(int agent) const = 0;
  virtual int reset(Rng& rng) = 0;
  virtual StepResult step(int state, const std::vector<int>& actions, Rng& rng) = 0;
};

// One temporal-difference update. Terminal transitions suppress the
// bootstrap term so the entry chases the plain reward. Exactly one table
// entry changes; the new value is returned.
inline double q_update(QTable& q, int state, int action, double reward, int next_state,
                       bool terminal, const LearningConfig& config) {
  const double bootstrap = terminal ? 0.0 : config.discount * q.row_max(next_state);
  double& entry = q.at(state, action);
  entry += config.learning_rate * (reward + bootstrap - entry);
  return entry;
}

// Epsilon-greedy selection: explore uniformly with probability epsilon,
// otherwise take the lowest-index maximizer. A purely greedy call
// (epsilon = 0) consumes no randomness at all, so greedy runs stay
// reproducible no matter how the exploration schedule is configured.
inline int select_action(const std::vector<double>& q_row, double epsilon, Rng& rng) {
  if (q_row.empty()) throw std::invalid_argument("select_action: the Q-row must not be empty");
  if (!(epsilon >= 0.0) || !(epsilon <= 1.0))
    throw std::invalid_argument("select_action: epsilon must lie in [0, 1]");
  if (epsilon > 0.0 && rng.next_bernoulli(epsilon))
    return rng.next_index(static_cast<int>(q_row.size()));
  int best = 0;
  for (int a = 1; a < static_cast<int>(q_row.size()); ++a)
    if (q_row[a] > q_row[best]) best = a;
  return best;
}

inline std::vector<int> greedy_policy(const QTable& q) {
  std::vector<int> policy(q.state_count());
  Rng unused(0);
  for (int s = 0; s < q.state_count(); ++s) policy[s] = select_action(q.row(s), 0.0, unused);
  return policy;
}

struct TrainResult {
  std::vector<QTable> tables;
  std::vector<double> episode_rewards;
  std::vector<double> episode_epsilons;
  // Episodes cut off at max_steps before reaching a terminal state; their
  // last update still bootstraps because the episode did not actually end.
  int truncated_episodes = 0;
};

namespace detail {

inline void check_step_result(const StepResult& result, int num_agents, int state_count) {
  if (result.next_state < 0 || result.next_state >= state_count)
    throw std::runtime_error("train: environment returned an out-of-range state");
  if (static_cast<int>(result.payoffs.size()) != num_agents)
    throw std::runtime_error("train: environment returned the wrong number of payoffs");
  for (double p : result.payoffs)
    if (!std::isfinite(p)) throw std::runtime_error("train: environment returned a non-finite payoff");
}

}  // namespace detail

// Independent Q-learning: every agent keeps its own table over the shared
// state and updates it from its own payoff, treating the others as part of
// the environment. Randomness per step is consumed in a fixed order (each
// agent's selection draws in agent order, then the environment's own
// draws), so one seed pins the whole run.
inline TrainResult train(TabularEnvironment& env, const LearningConfig& config) {
  config.validate();
  const int num_agents = env.num_agents();
  const int state_count = env.state_count();
  if (num_agents < 1) throw std::invalid_argument("train: environment must have agents");
  if (state_count < 1) throw std::invalid_argument("train: environment must have states");

  TrainResult result;
  result.tables.reserve(num_agents);
  for (int i = 0; i < num_agents; ++i) result.tables.emplace_back(state_count, env.action_count(i));
  result.episode_rewards.reserve(config.episodes);
  result.episode_epsilons.reserve(config.episodes);

  Rng rng(config.seed);
  double epsilon = config.epsilon_initial;
  std::vector<int> actions(num_agents);

  for (int episode = 0; episode < config.episodes; ++episode) {
    int state = env.reset(rng);
    if (state < 0 || state >= state_count)
      throw std::runtime_error("train: environment reset to an out-of-range state");

    double reward_sum = 0.0;
    bool terminal = false;
    for (int step = 0; step < config.max_steps && !terminal; ++step) {
      for (int i = 0; i < num_agents; ++i)
        actions[i] = select_action(result.tables[i].row(state), epsilon, rng);
      const StepResult outcome = env.step(state, actions, rng);
      detail::check_step_result(outcome, num_agents, state_count);
      for (int i = 0; i < num_agents; ++i) {
        q_update(result.tables[i], state, actions[i], outcome.payoffs[i], outcome.next_state,
                 outcome.terminal, config);
        reward_sum += outcome.payoffs[i];
      }
      state = outcome.next_state;
      terminal = outcome.terminal;
    }

    if (!terminal) ++result.truncated_episodes;
    result.episode_rewards.push_back(reward_sum);
    result.episode_epsilons.push_back(epsilon);
    epsilon = std::max(config.epsilon_floor, epsilon * config.epsilon_decay);
  }
  return result;
}

// A one-shot normal-form game as an environment: single state, one joint
// action per episode, payoffs straight from the tensor. Repeated play
// emerges across episodes, which is how matrix games are usually learned.
class MatrixGameEnv : public TabularEnvironment {
 public:
  explicit MatrixGameEnv(NormalFormGame game) : game_(std::move(game)) {}

  int num_agents() const override { return game_.num_players(); }
  int state_count() const override { return 1; }
  int action_count(int agent) const override { return game_.action_count(agent); }

  int reset(Rng&) override { return 0; }

  StepResult step(int, const std::vector<int>& actions, Rng&) override {
    StepResult result;
    result.next_state = 0;
    result.terminal = true;
    result.payoffs.reserve(game_.num_players());
    for (int i = 0; i < game_.num_players(); ++i) result.payoffs.push_back(game_.payoff(i, actions));
    return result;
  }

  const NormalFormGame& game() const { return game_; }

 private:
  NormalFormGame game_;
};

// The moderation scenario as a single-agent environment. Each episode is
// one arriving user: reset draws the type and the whole signal sequence
// (the same draw order as simulate_moderation), the state is the posterior
// belief discretized into equal-width buckets, and the single step realizes
// the moderator payoff for the chosen action, label offsets included.
class ModerationEnv : public TabularEnvironment {
 public:
  ModerationEnv(ModerationScenario scenario, int belief_buckets)
      : scenario_(std::move(scenario)), buckets_(belief_buckets) {
    scenario_.validate();
    if (belief_buckets < 2)
      throw std::invalid_argument("moderation_env: belief_buckets must be at least 2");
  }

  int num_agents() const override { return 1; }
  int state_count() const override { return buckets_; }
  int action_count(int) const override { return kNumModActions; }

  int reset(Rng& rng) override {
    user_type_ = rng.next_bernoulli(scenario_.arrival_p) ? UserType::kAdversarial
                                                         : UserType::kLegitimate;
    BeliefState belief(scenario_.prior_beta);
    const double q = user_type_ == UserType::kAdversarial ? scenario_.signal_model.q_adv
                                                          : scenario_.signal_model.q_leg;
    for (int s = 0; s < scenario_.signals_per_user; ++s)
      belief = bayes_update(belief, rng.next_bernoulli(q), scenario_.signal_model);
    belief_ = belief.beta();
    return bucket_of(belief_);
  }

  StepResult step(int, const std::vector<int>& actions, Rng&) override {
    const auto action = static_cast<ModAction>(actions.at(0));
    double payoff = scenario_.payoffs.moderator_payoff(user_type_, action);
    if (scenario_.labels) {
      const auto& labels = *scenario_.labels;
      const std::array<int, 2> profile = {
          labels.moderator_label_by_action[static_cast<int>(action)],
          labels.user_label_by_type[static_cast<int>(user_type_)]};
      payoff += labels.offsets.offset(0, profile);
    }
    return {0, {payoff}, true};
  }

  int bucket_of(double belief) const {
    const int raw = static_cast<int>(belief * buckets_);
    return std::min(raw, buckets_ - 1);
  }

  double last_belief() const { return belief_; }

 private:
  ModerationScenario scenario_;
  int buckets_;
  UserType user_type_ = UserType::kLegitimate;
  double belief_ = 0.0;
};

inline std::unique_ptr<TabularEnvironment> make_moderation_env(const ModerationScenario& scenario,
                                                               int belief_buckets = 20) {
  return std::make_unique<ModerationEnv>(scenario, belief_buckets);
}

}  // namespace gtsim
