// Copyright 2026 The privexp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small dense two-phase simplex solver.
//
//   minimize    c' x
//   subject to  a_i' x  (<=, =, >=)  b_i
//               x >= 0
//
// Bland's rule is used for both the entering and leaving variable, which
// rules out cycling on the degenerate vertices that are common in the
// stochastic-matrix polytopes this library works with. Intended for
// problems with at most a few hundred columns.

#ifndef PRIVEXP_LP_HPP_
#define PRIVEXP_LP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "privexp/error.hpp"

namespace privexp::lp {

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Constraint {
  std::vector<double> coeffs;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

struct Problem {
  std::vector<double> objective;
  std::vector<Constraint> constraints;

  std::size_t num_vars() const { return objective.size(); }

  void Add(std::vector<double> coeffs, Sense sense, double rhs) {
    constraints.push_back({std::move(coeffs), sense, rhs});
  }
};

struct Solution {
  Status status = Status::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  int pivots = 0;
};

namespace internal {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * (cols_ + 1) + c];
  }
  // Row `rows_` holds reduced costs; column `cols_` holds right-hand sides.
  double& cost(std::size_t c) { return at(rows_, c); }
  double& rhs(std::size_t r) { return at(r, cols_); }

  void Pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double factor = at(r, pc);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= factor * at(pr, c);
      at(r, pc) = 0.0;
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

inline constexpr double kPivotEps = 1e-11;

// Runs simplex iterations on the current cost row. Returns false if the
// problem is unbounded.
inline bool RunSimplex(Tableau& t, std::vector<std::size_t>& basis,
                       const std::vector<bool>& may_enter, int& pivots) {
  const std::size_t m = t.rows();
  const std::size_t n = t.cols();
  for (;;) {
    std::size_t enter = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (may_enter[j] && t.cost(j) < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter == n) return true;
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = t.at(i, enter);
      if (a <= kPivotEps) continue;
      const double ratio = t.rhs(i) / a;
      if (ratio < best_ratio - 1e-15 ||
          (ratio <= best_ratio + 1e-15 && leave < m && basis[i] < basis[leave])) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave == m) return false;
    t.Pivot(leave, enter);
    basis[leave] = enter;
    ++pivots;
  }
}

}  // namespace internal

inline Solution Solve(const Problem& problem) {
  const std::size_t n = problem.num_vars();
  const std::size_t m = problem.constraints.size();
  for (const auto& con : problem.constraints) {
    privexp::internal::Require(con.coeffs.size() == n,
                               "LP constraint width does not match objective");
  }

  // Normalize to nonnegative right-hand sides.
  std::vector<Constraint> rows = problem.constraints;
  for (auto& con : rows) {
    if (con.rhs < 0.0) {
      for (double& a : con.coeffs) a = -a;
      con.rhs = -con.rhs;
      if (con.sense == Sense::kLessEqual) {
        con.sense = Sense::kGreaterEqual;
      } else if (con.sense == Sense::kGreaterEqual) {
        con.sense = Sense::kLessEqual;
      }
    }
  }

  std::size_t num_slack = 0;
  std::size_t num_artificial = 0;
  for (const auto& con : rows) {
    if (con.sense != Sense::kEqual) ++num_slack;
    if (con.sense != Sense::kLessEqual) ++num_artificial;
  }
  const std::size_t total = n + num_slack + num_artificial;
  internal::Tableau t(m, total);
  std::vector<std::size_t> basis(m);
  std::vector<bool> is_artificial(total, false);

  std::size_t next_slack = n;
  std::size_t next_art = n + num_slack;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = rows[i].coeffs[j];
    t.rhs(i) = rows[i].rhs;
    switch (rows[i].sense) {
      case Sense::kLessEqual:
        t.at(i, next_slack) = 1.0;
        basis[i] = next_slack++;
        break;
      case Sense::kGreaterEqual:
        t.at(i, next_slack++) = -1.0;
        t.at(i, next_art) = 1.0;
        is_artificial[next_art] = true;
        basis[i] = next_art++;
        break;
      case Sense::kEqual:
        t.at(i, next_art) = 1.0;
        is_artificial[next_art] = true;
        basis[i] = next_art++;
        break;
    }
  }

  Solution sol;
  std::vector<bool> may_enter(total, true);

  // Phase 1: minimize the sum of artificials.
  if (num_artificial > 0) {
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_artificial[basis[i]]) continue;
      for (std::size_t j = 0; j <= total; ++j) {
        if (j == total || !is_artificial[j]) t.cost(j) -= t.at(i, j);
      }
    }
    internal::RunSimplex(t, basis, may_enter, sol.pivots);
    double scale = 1.0;
    for (const auto& con : rows) scale = std::max(scale, std::abs(con.rhs));
    if (-t.cost(total) > 1e-9 * scale) {
      sol.status = Status::kInfeasible;
      return sol;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_artificial[basis[i]]) continue;
      for (std::size_t j = 0; j < total; ++j) {
        if (!is_artificial[j] && std::abs(t.at(i, j)) > internal::kPivotEps) {
          t.Pivot(i, j);
          basis[i] = j;
          ++sol.pivots;
          break;
        }
      }
    }
    for (std::size_t j = 0; j < total; ++j) {
      if (is_artificial[j]) may_enter[j] = false;
    }
  }

  // Phase 2 cost row: c_j - c_B B^-1 A_j.
  for (std::size_t j = 0; j <= total; ++j) t.cost(j) = 0.0;
  for (std::size_t j = 0; j < n; ++j) t.cost(j) = problem.objective[j];
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t b = basis[i];
    if (b >= n) continue;
    const double cb = problem.objective[b];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= total; ++j) t.cost(j) -= cb * t.at(i, j);
  }
  if (!internal::RunSimplex(t, basis, may_enter, sol.pivots)) {
    sol.status = Status::kUnbounded;
    return sol;
  }

  sol.status = Status::kOptimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) sol.x[basis[i]] = std::max(t.rhs(i), 0.0);
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += problem.objective[j] * sol.x[j];
  return sol;
}

}  // namespace privexp::lp

#endif  // PRIVEXP_LP_HPP_
