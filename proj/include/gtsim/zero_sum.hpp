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
#include <limits>
#include <stdexcept>
#include <vector>

#include "gtsim/game.hpp"

namespace gtsim {

// Two-player zero-sum game in matrix form. Entry payoff[r][c] is the row
// player's payoff; the column player receives its negation.
struct ZeroSumGame {
  std::vector<std::vector<double>> payoff;

  int rows() const { return static_cast<int>(payoff.size()); }
  int cols() const { return payoff.empty() ? 0 : static_cast<int>(payoff[0].size()); }

  void validate() const {
    if (payoff.empty() || payoff[0].empty())
      throw std::invalid_argument("zero_sum: payoff matrix must be non-empty");
    for (const auto& row : payoff) {
      if (static_cast<int>(row.size()) != cols())
        throw std::invalid_argument("zero_sum: payoff matrix must be rectangular");
      for (double v : row)
        if (!std::isfinite(v)) throw std::invalid_argument("zero_sum: payoffs must be finite");
    }
  }

  NormalFormGame to_normal_form() const {
    validate();
    std::vector<std::vector<double>> col_payoff(payoff);
    for (auto& row : col_payoff)
      for (double& v : row) v = -v;
    return NormalFormGame::bimatrix(payoff, col_payoff);
  }
};

struct ZeroSumSolution {
  double value = 0.0;       // midpoint of the final bound interval
  double lower = 0.0;       // best guarantee found for the row player
  double upper = 0.0;       // best cap found by the column player
  MixedStrategy row;        // empirical mixture achieving `lower`
  MixedStrategy col;        // empirical mixture achieving `upper`
  int iterations = 0;
  bool converged = false;   // gap below tolerance before max_iterations
};

// Per-iteration value bounds, recorded when a trace sink is supplied.
struct FictitiousPlayTrace {
  std::vector<double> lower, upper;
};

// Fictitious play: each iteration both players best-respond to the
// opponent's empirical action frequencies, ties toward the lowest index.
// With x the row empirical mixture and y the column one,
//   min_c (x'A)_c  <=  game value  <=  max_r (A y)_r
// at every iteration, and the bounds close in on the value. The returned
// mixtures are the ones that achieved the best bound on each side, so the
// row strategy guarantees at least `lower` and the column strategy caps the
// row player at `upper`. A run that never closes the gap reports
// converged=false and still carries the bounds it reached.
inline ZeroSumSolution solve_zero_sum(const ZeroSumGame& game, double tolerance,
                                      int max_iterations,
                                      FictitiousPlayTrace* trace = nullptr) {
  game.validate();
  if (!(tolerance > 0.0)) throw std::invalid_argument("solve_zero_sum: tolerance must be positive");
  if (max_iterations < 1)
    throw std::invalid_argument("solve_zero_sum: max_iterations must be positive");

  const int rows = game.rows();
  const int cols = game.cols();
  std::vector<double> cum_row(rows, 0.0);  // cum_row[r] = sum over column plays of A[r][c]
  std::vector<double> cum_col(cols, 0.0);  // cum_col[c] = sum over row plays of A[r][c]
  std::vector<int> row_counts(rows, 0), col_counts(cols, 0);

  ZeroSumSolution best;
  best.lower = -std::numeric_limits<double>::infinity();
  best.upper = std::numeric_limits<double>::infinity();

  auto argmax = [](const std::vector<double>& v) {
    int best_i = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
      if (v[i] > v[best_i]) best_i = i;
    return best_i;
  };
  auto argmin = [](const std::vector<double>& v) {
    int best_i = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
      if (v[i] < v[best_i]) best_i = i;
    return best_i;
  };

  for (int t = 1; t <= max_iterations; ++t) {
    const int r = argmax(cum_row);
    const int c = argmin(cum_col);
    ++row_counts[r];
    ++col_counts[c];
    for (int i = 0; i < rows; ++i) cum_row[i] += game.payoff[i][c];
    for (int j = 0; j < cols; ++j) cum_col[j] += game.payoff[r][j];

    double lower_t = cum_col[0];
    for (int j = 1; j < cols; ++j) lower_t = std::min(lower_t, cum_col[j]);
    lower_t /= t;
    double upper_t = cum_row[0];
    for (int i = 1; i < rows; ++i) upper_t = std::max(upper_t, cum_row[i]);
    upper_t /= t;
    if (trace) {
      trace->lower.push_back(lower_t);
      trace->upper.push_back(upper_t);
    }

    if (lower_t > best.lower) {
      best.lower = lower_t;
      best.row.probs.assign(rows, 0.0);
      for (int i = 0; i < rows; ++i) best.row.probs[i] = static_cast<double>(row_counts[i]) / t;
    }
    if (upper_t < best.upper) {
      best.upper = upper_t;
      best.col.probs.assign(cols, 0.0);
      for (int j = 0; j < cols; ++j) best.col.probs[j] = static_cast<double>(col_counts[j]) / t;
    }
    best.iterations = t;
    if (best.upper - best.lower < tolerance) {
      best.converged = true;
      break;
    }
  }
  best.value = 0.5 * (best.lower + best.upper);
  return best;
}

}  // namespace gtsim
