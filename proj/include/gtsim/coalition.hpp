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

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gtsim {

// Coalitions are bitmasks over agents 0..n-1 (agent i is bit 1<<i), which
// keeps subset enumeration a plain counting loop. n is capped at 20 so the
// 2^n tables stay addressable.
using CoalitionMask = std::uint32_t;

constexpr int kMaxCoalitionAgents = 20;

inline CoalitionMask full_coalition(int n) {
  return static_cast<CoalitionMask>((1u << n) - 1u);
}

inline std::vector<int> coalition_members(CoalitionMask mask) {
  std::vector<int> members;
  for (int i = 0; mask != 0; ++i, mask >>= 1)
    if (mask & 1u) members.push_back(i);
  return members;
}

// Transferable-utility characteristic function. Either an explicit table
// (absent subsets are worth zero) or the pairwise-synergy family
//   v(S) = weight * |S| * (|S| - 1) / 2,
// one unit of weight per unordered pair of cooperating agents.
class CharacteristicFunction {
 public:
  static CharacteristicFunction pairwise(int num_agents, double weight) {
    CharacteristicFunction f(num_agents);
    f.pairwise_weight_ = weight;
    return f;
  }

  static CharacteristicFunction explicit_table(int num_agents,
                                               std::map<CoalitionMask, double> values) {
    CharacteristicFunction f(num_agents);
    for (const auto& [mask, value] : values) {
      if (mask > full_coalition(num_agents))
        throw std::invalid_argument("coalition: subset mask references agents beyond n");
      if (mask == 0 && value != 0.0)
        throw std::invalid_argument("coalition: the empty coalition must be worth zero");
      if (!std::isfinite(value))
        throw std::invalid_argument("coalition: values must be finite");
    }
    f.table_ = std::move(values);
    return f;
  }

  int num_agents() const { return num_agents_; }

  double value(CoalitionMask mask) const {
    if (mask > full_coalition(num_agents_))
      throw std::invalid_argument("coalition: subset mask references agents beyond n");
    if (table_) {
      auto it = table_->find(mask);
      return it == table_->end() ? 0.0 : it->second;
    }
    const long long size = std::popcount(mask);
    return pairwise_weight_ * static_cast<double>(size * (size - 1) / 2);
  }

 private:
  explicit CharacteristicFunction(int num_agents) : num_agents_(num_agents) {
    if (num_agents < 1 || num_agents > kMaxCoalitionAgents)
      throw std::invalid_argument(
          "coalition: agent count must lie in [1, 20]; exact subset enumeration "
          "does not scale past that and sampling approximations are not provided");
  }

  int num_agents_;
  double pairwise_weight_ = 0.0;
  std::optional<std::map<CoalitionMask, double>> table_;
};

// Sabotage cost c(S) subtracted from v(S). Fractional mode charges
// alpha * v(S) to any coalition containing at least one flagged agent,
// once, regardless of how many are inside; explicit mode prices subsets
// directly (absent subsets cost nothing).
class SabotageModel {
 public:
  static SabotageModel fractional(CoalitionMask malicious, double alpha) {
    if (!(alpha >= 0.0) || !(alpha <= 1.0))
      throw std::invalid_argument("sabotage: alpha must lie in [0, 1]");
    SabotageModel m;
    m.malicious_ = malicious;
    m.alpha_ = alpha;
    return m;
  }

  static SabotageModel explicit_costs(std::map<CoalitionMask, double> costs) {
    for (const auto& [mask, cost] : costs) {
      if (!(cost >= 0.0) || !std::isfinite(cost))
        throw std::invalid_argument("sabotage: costs must be finite and non-negative");
      if (mask == 0 && cost != 0.0)
        throw std::invalid_argument("sabotage: the empty coalition cannot incur a cost");
    }
    SabotageModel m;
    m.costs_ = std::move(costs);
    return m;
  }

  double cost(const CharacteristicFunction& f, CoalitionMask mask) const {
    if (costs_) {
      auto it = costs_->find(mask);
      return it == costs_->end() ? 0.0 : it->second;
    }
    return (mask & malicious_) != 0 ? alpha_ * f.value(mask) : 0.0;
  }

  CoalitionMask malicious() const { return malicious_; }

 private:
  SabotageModel() = default;
  CoalitionMask malicious_ = 0;
  double alpha_ = 0.0;
  std::optional<std::map<CoalitionMask, double>> costs_;
};

// Effective worth of a coalition under an optional sabotage model.
inline double coalition_value(const CharacteristicFunction& f, const SabotageModel* sabotage,
                              CoalitionMask mask) {
  const double base = f.value(mask);
  return sabotage ? base - sabotage->cost(f, mask) : base;
}

// Geometric trust decay with a floor: after k clean verification rounds the
// sabotage fraction shrinks to max(alpha_min, alpha0 * rho^k).
struct TrustSchedule {
  double alpha0 = 0.5;
  double rho = 0.8;
  double alpha_min = 0.0;

  void validate() const {
    if (!(alpha0 >= 0.0) || !(alpha0 <= 1.0))
      throw std::invalid_argument("trust: alpha0 must lie in [0, 1]");
    if (!(rho >= 0.0) || !(rho <= 1.0))
      throw std::invalid_argument("trust: rho must lie in [0, 1]");
    if (!(alpha_min >= 0.0) || !std::isfinite(alpha_min))
      throw std::invalid_argument("trust: alpha_min must be finite and non-negative");
  }
};

// Repeated multiplication rather than pow keeps the sequence exactly
// non-increasing: multiplying a non-negative double by rho <= 1 can never
// round upward past the previous value. The loop stops early once the
// floor is reached or rho = 1 makes further rounds a no-op.
inline double apply_trust(const TrustSchedule& schedule, int verified_rounds) {
  schedule.validate();
  if (verified_rounds < 0)
    throw std::invalid_argument("apply_trust: verified_rounds must be non-negative");
  double alpha = schedule.alpha0;
  if (schedule.rho < 1.0)
    for (int k = 0; k < verified_rounds && alpha > schedule.alpha_min; ++k) alpha *= schedule.rho;
  return std::max(schedule.alpha_min, alpha);
}

// Exact Shapley value of the (possibly sabotaged) game by direct subset
// enumeration:
//   phi_i = sum over S not containing i of
//           |S|! (n - |S| - 1)! / n! * (v(S + i) - v(S)).
// The weight is 1 / (n * binom(n-1, |S|)), accumulated per subset size to
// dodge factorial overflow. O(n * 2^n), exact and deterministic.
inline std::vector<double> shapley(const CharacteristicFunction& f,
                                   const SabotageModel* sabotage = nullptr) {
  const int n = f.num_agents();
  const CoalitionMask full = full_coalition(n);

  std::vector<double> weight(n, 0.0);  // weight[s] for |S| = s
  for (int s = 0; s < n; ++s) {
    long long binom = 1;  // binom(n-1, s), exact for n <= 20
    for (int j = 1; j <= s; ++j) binom = binom * (n - j) / j;
    weight[s] = 1.0 / (static_cast<double>(n) * static_cast<double>(binom));
  }

  std::vector<double> values(static_cast<std::size_t>(full) + 1);
  for (CoalitionMask mask = 0; mask <= full; ++mask)
    values[mask] = coalition_value(f, sabotage, mask);

  std::vector<double> phi(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const CoalitionMask bit = 1u << i;
    for (CoalitionMask mask = 0; mask <= full; ++mask) {
      if (mask & bit) continue;
      phi[i] += weight[std::popcount(mask)] * (values[mask | bit] - values[mask]);
    }
  }
  return phi;
}

struct CoreCheck {
  bool in_core = false;
  // Blocking subset with the largest shortfall v~(S) - x(S); ties prefer
  // fewer members, then the numerically smallest mask. Empty when the
  // allocation fails on efficiency alone.
  std::optional<CoalitionMask> blocking_subset;
};

// An allocation sits in the core when it distributes exactly the grand
// coalition's worth and no subset could do better on its own. Comparisons
// use a 1e-9 slack so adjacent floating point noise does not flip answers.
inline CoreCheck core_contains(const CharacteristicFunction& f, const SabotageModel* sabotage,
                               const std::vector<double>& allocation) {
  const int n = f.num_agents();
  if (static_cast<int>(allocation.size()) != n)
    throw std::invalid_argument("core_contains: one allocation entry per agent required");
  constexpr double kTolerance = 1e-9;
  const CoalitionMask full = full_coalition(n);

  double total = 0.0;
  for (double x : allocation) {
    if (!std::isfinite(x)) throw std::invalid_argument("core_contains: allocation must be finite");
    total += x;
  }
  CoreCheck result;
  if (std::abs(total - coalition_value(f, sabotage, full)) > kTolerance) return result;

  // The reported witness is the subset with the largest shortfall
  // v~(S) - x(S); among equally bad subsets the one with fewer members
  // wins, and the increasing mask scan settles any remaining tie on the
  // smallest mask.
  double worst_deficit = kTolerance;
  for (CoalitionMask mask = 1; mask <= full; ++mask) {
    double allocated = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) allocated += allocation[i];
    const double deficit = coalition_value(f, sabotage, mask) - allocated;
    if (deficit <= kTolerance) continue;
    const bool better =
        !result.blocking_subset || deficit > worst_deficit ||
        (deficit == worst_deficit &&
         std::popcount(mask) < std::popcount(*result.blocking_subset));
    if (better) {
      worst_deficit = deficit;
      result.blocking_subset = mask;
    }
  }
  if (result.blocking_subset) return result;
  result.in_core = true;
  return result;
}

struct BestCoalition {
  CoalitionMask mask = 0;
  double value = 0.0;
};

// Exhaustive argmax of the effective worth over all 2^n subsets, the empty
// one included. Ties prefer fewer members, then the smallest mask, so the
// answer is unique and stable.
inline BestCoalition best_coalition(const CharacteristicFunction& f,
                                    const SabotageModel* sabotage = nullptr) {
  const CoalitionMask full = full_coalition(f.num_agents());
  BestCoalition best{0, coalition_value(f, sabotage, 0)};
  for (CoalitionMask mask = 1; mask <= full; ++mask) {
    const double value = coalition_value(f, sabotage, mask);
    if (value > best.value ||
        (value == best.value && std::popcount(mask) < std::popcount(best.mask))) {
      best = {mask, value};
    }
  }
  return best;
}

}  // namespace gtsim
