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

#ifndef PRIVEXP_DISTORTION_HPP_
#define PRIVEXP_DISTORTION_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "privexp/distributions.hpp"
#include "privexp/error.hpp"
#include "privexp/lp.hpp"

namespace privexp {

// Additive per-slot distortion d(x, y) >= 0 with a mask of forbidden pairs.
class DistortionSpec {
 public:
  DistortionSpec() = default;
  DistortionSpec(Alphabet x_alphabet, Alphabet y_alphabet,
                 std::vector<double> d_row_major, Mask mask)
      : x_(std::move(x_alphabet)),
        y_(std::move(y_alphabet)),
        d_(std::move(d_row_major)),
        mask_(std::move(mask)) {
    internal::Require(d_.size() == x_.size() * y_.size(),
                      "distortion matrix has wrong number of entries");
    internal::Require(mask_.rows() == x_.size() && mask_.cols() == y_.size(),
                      "mask shape does not match alphabets");
    d_max_ = 0.0;
    for (std::size_t x = 0; x < x_.size(); ++x) {
      bool any_allowed = false;
      for (std::size_t y = 0; y < y_.size(); ++y) {
        const double v = d(x, y);
        internal::Require(std::isfinite(v) && v >= 0.0,
                          "distortion must be finite and nonnegative");
        if (mask_.allowed(x, y)) {
          any_allowed = true;
          d_max_ = std::max(d_max_, v);
        }
      }
      internal::Require(any_allowed, "every x needs at least one allowed y");
    }
  }

  // Unmasked distortion matrix.
  static DistortionSpec Unmasked(Alphabet x_alphabet, Alphabet y_alphabet,
                                 std::vector<double> d_row_major) {
    Mask mask(x_alphabet.size(), y_alphabet.size());
    return DistortionSpec(std::move(x_alphabet), std::move(y_alphabet),
                          std::move(d_row_major), std::move(mask));
  }

  // Energy-management cost: d(x, y) = x - y with supply above demand
  // forbidden.
  static DistortionSpec SupplyBelowDemand(const Alphabet& demand,
                                          const Alphabet& supply) {
    const std::size_t nx = demand.size();
    const std::size_t ny = supply.size();
    std::vector<double> d(nx * ny, 0.0);
    Mask mask(nx, ny);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        if (supply[y] > demand[x]) {
          mask.set_forbidden(x, y);
        } else {
          d[x * ny + y] = demand[x] - supply[y];
        }
      }
    }
    return DistortionSpec(demand, supply, std::move(d), std::move(mask));
  }

  const Alphabet& x_alphabet() const { return x_; }
  const Alphabet& y_alphabet() const { return y_; }
  const Mask& mask() const { return mask_; }
  double d(std::size_t x, std::size_t y) const { return d_[x * y_.size() + y]; }
  std::span<const double> matrix() const { return d_; }
  double d_max() const { return d_max_; }

  std::size_t AllowedPairs() const {
    std::size_t n = 0;
    for (std::size_t x = 0; x < x_.size(); ++x) {
      for (std::size_t y = 0; y < y_.size(); ++y) n += mask_.allowed(x, y);
    }
    return n;
  }

  // E[d(X, Y)] when X ~ p and Y | X ~ cond.
  double Expected(const Pmf& p, const ConditionalPmf& cond) const {
    internal::Require(p.alphabet() == x_ && cond.x_alphabet() == x_ &&
                          cond.y_alphabet() == y_,
                      "alphabets do not match the distortion spec");
    double e = 0.0;
    for (std::size_t x = 0; x < x_.size(); ++x) {
      for (std::size_t y = 0; y < y_.size(); ++y) {
        e += p[x] * cond.at(x, y) * d(x, y);
      }
    }
    return e;
  }

  // Smallest achievable E[d] under p: each x goes to its cheapest allowed y.
  double MinExpected(const Pmf& p) const {
    double e = 0.0;
    for (std::size_t x = 0; x < x_.size(); ++x) {
      double best = kInf;
      for (std::size_t y = 0; y < y_.size(); ++y) {
        if (mask_.allowed(x, y)) best = std::min(best, d(x, y));
      }
      e += p[x] * best;
    }
    return e;
  }

 private:
  Alphabet x_;
  Alphabet y_;
  std::vector<double> d_;
  Mask mask_;
  double d_max_ = 0.0;
};

// The policy polytope: per-hypothesis single-slot budgets on E[d].
class ConstraintSet {
 public:
  ConstraintSet() = default;
  ConstraintSet(DistortionSpec distortion, double s_bar, double s_tilde)
      : distortion_(std::move(distortion)), budget_{s_bar, s_tilde} {
    internal::Require(std::isfinite(s_bar) && s_bar > 0.0,
                      "h0 budget must be positive");
    internal::Require(std::isfinite(s_tilde) && s_tilde > 0.0,
                      "h1 budget must be positive");
  }

  const DistortionSpec& distortion() const { return distortion_; }
  double s_bar() const { return budget_[0]; }
  double s_tilde() const { return budget_[1]; }
  double budget(Hypothesis h) const { return budget_[Index(h)]; }

 private:
  DistortionSpec distortion_;
  std::array<double, 2> budget_{0.0, 0.0};
};

inline constexpr double kFeasibilityTolerance = 1e-10;

struct FeasibilityReport {
  bool feasible = false;
  // Optimal value of min max_j (E[d | h_j] - s_j)^+.
  double max_violation = 0.0;
};

// Solves   min t  s.t.  E[d|h_j] - s_j <= t (j = 0, 1),  t >= 0,
// rows of both conditionals stochastic and zero on masked pairs.
inline FeasibilityReport ProbeFeasibility(const SourceModel& source,
                                          const ConstraintSet& cons) {
  const DistortionSpec& dist = cons.distortion();
  internal::Require(source.x_alphabet() == dist.x_alphabet(),
                    "source alphabet does not match the distortion spec");
  const std::size_t nx = dist.x_alphabet().size();
  const std::size_t ny = dist.y_alphabet().size();
  // Variables: only allowed (x, y) entries per hypothesis, then t.
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      if (dist.mask().allowed(x, y)) cells.emplace_back(x, y);
    }
  }
  const std::size_t k = cells.size();
  const std::size_t num_vars = 2 * k + 1;
  lp::Problem prob;
  prob.objective.assign(num_vars, 0.0);
  prob.objective[2 * k] = 1.0;
  for (int h = 0; h < 2; ++h) {
    for (std::size_t x = 0; x < nx; ++x) {
      std::vector<double> row(num_vars, 0.0);
      for (std::size_t c = 0; c < k; ++c) {
        if (cells[c].first == x) row[h * k + c] = 1.0;
      }
      prob.Add(std::move(row), lp::Sense::kEqual, 1.0);
    }
    const Pmf& p = source[static_cast<Hypothesis>(h)];
    std::vector<double> budget_row(num_vars, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      budget_row[h * k + c] = p[cells[c].first] * dist.d(cells[c].first, cells[c].second);
    }
    budget_row[2 * k] = -1.0;
    prob.Add(std::move(budget_row), lp::Sense::kLessEqual,
             cons.budget(static_cast<Hypothesis>(h)));
  }
  const lp::Solution sol = lp::Solve(prob);
  FeasibilityReport report;
  if (sol.status != lp::Status::kOptimal) {
    report.feasible = false;
    report.max_violation = kInf;
    return report;
  }
  report.max_violation = sol.objective;
  report.feasible = sol.objective <= kFeasibilityTolerance;
  return report;
}

}  // namespace privexp

#endif  // PRIVEXP_DISTORTION_HPP_
