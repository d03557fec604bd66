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

// Shared helpers for the test suites. Reference computations here are
// written from first principles and never call into the library's
// information measures.

#ifndef PRIVEXP_TESTS_TEST_UTIL_HPP_
#define PRIVEXP_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "privexp/privexp.hpp"

namespace privexp::testing {

inline Alphabet Range(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
  return Alphabet(std::move(v));
}

// Two-point pmf on {lo, hi} with P(lo) = p_lo.
inline Pmf TwoPoint(double p_lo, double lo = 0.0, double hi = 1.0) {
  return Pmf(Alphabet({lo, hi}), {p_lo, 1.0 - p_lo});
}

// Random pmf with every entry at least `floor` before normalization.
inline std::vector<double> RandomSimplex(std::mt19937_64& rng, std::size_t n,
                                         double floor = 1e-3) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double sum = 0.0;
  for (auto& x : v) {
    x = e(rng) + floor;
    sum += x;
  }
  for (auto& x : v) x /= sum;
  return v;
}

inline Pmf RandomPmf(std::mt19937_64& rng, const Alphabet& a, double floor = 1e-3) {
  return Pmf(a, RandomSimplex(rng, a.size(), floor), Normalization::kRenormalize);
}

// Reference measures, straight from the definitions.
inline double RefKl(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return INFINITY;
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

inline double RefCtau(const std::vector<double>& p, const std::vector<double>& q, double tau) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && q[i] > 0.0) s += std::pow(p[i], tau) * std::pow(q[i], 1.0 - tau);
  }
  return -std::log(s);
}

// Chernoff information by a uniform tau grid followed by local refinement
// on successively finer grids.
inline double RefChernoff(const std::vector<double>& p, const std::vector<double>& q,
                          int coarse = 1000) {
  double best_tau = 0.0;
  double best = -INFINITY;
  for (int i = 0; i <= coarse; ++i) {
    const double t = static_cast<double>(i) / coarse;
    const double v = RefCtau(p, q, t);
    if (v > best) {
      best = v;
      best_tau = t;
    }
  }
  double width = 1.0 / coarse;
  for (int round = 0; round < 6; ++round) {
    const double lo = std::max(0.0, best_tau - width);
    const double hi = std::min(1.0, best_tau + width);
    for (int i = 0; i <= 100; ++i) {
      const double t = lo + (hi - lo) * i / 100.0;
      const double v = RefCtau(p, q, t);
      if (v > best) {
        best = v;
        best_tau = t;
      }
    }
    width /= 50.0;
  }
  return best;
}

inline std::vector<double> Vec(std::span<const double> s) { return {s.begin(), s.end()}; }

// Exhaustive policy-grid oracle for two-level demand {0, 2} with supply
// never above demand. Demand 0 must be served by supply 0; under each
// hypothesis the single free parameter is a_h = P(supply 0 | demand 2),
// limited by the budget 2 P_h(demand 2) a_h <= s. Each a_h runs over a
// uniform grid of the given step plus its upper endpoint.
class BinaryGridOracle {
 public:
  BinaryGridOracle(double p_bar, double p_tilde, double s, double step = 1e-3) {
    const std::array<double, 2> p_zero{p_bar, p_tilde};
    for (int h = 0; h < 2; ++h) {
      const double p_two = 1.0 - p_zero[h];
      const double a_max = p_two > 0.0 ? std::min(1.0, s / (2.0 * p_two)) : 1.0;
      for (int i = 0; i * step < a_max; ++i) y0_[h].push_back(p_zero[h] + p_two * i * step);
      y0_[h].push_back(p_zero[h] + p_two * a_max);
    }
  }

  // min over the grid of D(P_Y|h0 || P_Y|h1).
  double Phi() const {
    double best = INFINITY;
    for (double u : y0_[0]) {
      for (double v : y0_[1]) best = std::min(best, Kl2(u, v));
    }
    return best;
  }

  // min over the grid of C_tau.
  double NuTau(double tau) const {
    // A factor whose probability is zero kills its term at every order.
    auto power = [](double p, double e) { return p > 0.0 ? std::pow(p, e) : 0.0; };
    std::vector<double> a0(y0_[0].size()), a1(y0_[0].size());
    std::vector<double> b0(y0_[1].size()), b1(y0_[1].size());
    for (std::size_t i = 0; i < a0.size(); ++i) {
      a0[i] = power(y0_[0][i], tau);
      a1[i] = power(1.0 - y0_[0][i], tau);
    }
    for (std::size_t j = 0; j < b0.size(); ++j) {
      b0[j] = power(y0_[1][j], 1.0 - tau);
      b1[j] = power(1.0 - y0_[1][j], 1.0 - tau);
    }
    double best_sum = 0.0;
    for (std::size_t i = 0; i < a0.size(); ++i) {
      for (std::size_t j = 0; j < b0.size(); ++j) {
        best_sum = std::max(best_sum, a0[i] * b0[j] + a1[i] * b1[j]);
      }
    }
    return -std::log(best_sum);
  }

  // max over tau of NuTau: a 0.01 tau grid, then local refinement. The
  // inner minimum over policies is concave in tau, so refinement around
  // the best grid point is sound.
  double Nu() const {
    double best_tau = 0.0;
    double best = -INFINITY;
    for (int i = 0; i <= 100; ++i) {
      const double v = NuTau(i / 100.0);
      if (v > best) {
        best = v;
        best_tau = i / 100.0;
      }
    }
    double width = 0.01;
    for (int round = 0; round < 3; ++round) {
      const double lo = std::max(0.0, best_tau - width), hi = std::min(1.0, best_tau + width);
      for (int i = 0; i <= 20; ++i) {
        const double t = lo + (hi - lo) * i / 20.0;
        const double v = NuTau(t);
        if (v > best) {
          best = v;
          best_tau = t;
        }
      }
      width /= 10.0;
    }
    return best;
  }

 private:
  static double Kl2(double u, double v) {
    double d = 0.0;
    if (u > 0.0) d += v > 0.0 ? u * std::log(u / v) : INFINITY;
    if (u < 1.0) d += v < 1.0 ? (1.0 - u) * std::log((1.0 - u) / (1.0 - v)) : INFINITY;
    return d;
  }

  std::array<std::vector<double>, 2> y0_;
};

inline SourceModel BinarySource(double p_bar, double p_tilde) {
  return SourceModel(TwoPoint(p_bar, 0.0, 2.0), TwoPoint(p_tilde, 0.0, 2.0));
}

inline ConstraintSet EnergyConstraint(const Alphabet& demand, double s) {
  return ConstraintSet(DistortionSpec::SupplyBelowDemand(demand, demand), s, s);
}

// Checks an ExponentResult's policy against the constraint set: exact mask
// zeros and budgets within 1e-8.
inline bool PolicyRespects(const ExponentResult& r, const SourceModel& src,
                           const ConstraintSet& cons) {
  const DistortionSpec& d = cons.distortion();
  for (int h = 0; h < 2; ++h) {
    const auto hyp = static_cast<Hypothesis>(h);
    const ConditionalPmf& c = r.policy[hyp];
    for (std::size_t x = 0; x < d.x_alphabet().size(); ++x) {
      for (std::size_t y = 0; y < d.y_alphabet().size(); ++y) {
        if (d.mask().forbidden(x, y) && c.at(x, y) != 0.0) return false;
      }
    }
    if (d.Expected(src[hyp], c) > cons.budget(hyp) + 1e-8) return false;
  }
  return true;
}

}  // namespace privexp::testing

#endif  // PRIVEXP_TESTS_TEST_UTIL_HPP_
