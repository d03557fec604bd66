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

// Away-step Frank-Wolfe over the product of two distortion-constrained
// policy polytopes.
//
// A policy pair is stored flat as z = [W0 | W1], each block an |X| x |Y|
// row-major stochastic matrix. Objectives depend on z only through the two
// output marginals a = p0' W0 and b = p1' W1, so an objective supplies its
// value and gradient with respect to (a, b) and the engine applies the
// chain rule.
//
// For a fixed hypothesis the feasible set is a product of row simplices cut
// by one budget half-space. Minimizing a linear function over it is the LP
// relaxation of a multiple-choice knapsack, which the greedy frontier walk
// in LinearMinimizer solves exactly; every returned point is a vertex with
// at most one split row.

#ifndef PRIVEXP_FRANK_WOLFE_HPP_
#define PRIVEXP_FRANK_WOLFE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "privexp/distortion.hpp"
#include "privexp/distributions.hpp"
#include "privexp/lp.hpp"
#include "privexp/scalar_search.hpp"

namespace privexp::fw {

class PolicyPolytope {
 public:
  PolicyPolytope(const SourceModel& source, const ConstraintSet& cons)
      : nx_(cons.distortion().x_alphabet().size()),
        ny_(cons.distortion().y_alphabet().size()),
        d_(cons.distortion().matrix().begin(), cons.distortion().matrix().end()),
        budget_{cons.s_bar(), cons.s_tilde()} {
    internal::Require(source.x_alphabet() == cons.distortion().x_alphabet(),
                      "source alphabet does not match the distortion spec");
    for (int h = 0; h < 2; ++h) {
      const auto probs = source[static_cast<Hypothesis>(h)].probs();
      px_[h].assign(probs.begin(), probs.end());
      mask_[h] = cons.distortion().mask();
    }
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t block() const { return nx_ * ny_; }
  std::size_t dim() const { return 2 * nx_ * ny_; }
  double p(int h, std::size_t x) const { return px_[h][x]; }
  double d(std::size_t x, std::size_t y) const { return d_[x * ny_ + y]; }
  double budget(int h) const { return budget_[h]; }
  const Mask& mask(int h) const { return mask_[h]; }
  bool allowed(int h, std::size_t x, std::size_t y) const {
    return mask_[h].allowed(x, y);
  }

  // Additionally forbids, for hypothesis h, every y outside `keep`. Rows
  // that would lose all options and carry no probability keep their
  // original mask. Returns false if a row with positive probability loses
  // all options.
  bool RestrictOutputs(int h, const std::vector<bool>& keep) {
    Mask restricted = mask_[h];
    for (std::size_t x = 0; x < nx_; ++x) {
      bool any = false;
      for (std::size_t y = 0; y < ny_; ++y) {
        if (!keep[y]) restricted.set_forbidden(x, y);
        any = any || restricted.allowed(x, y);
      }
      if (!any) {
        if (px_[h][x] > 0.0) return false;
        for (std::size_t y = 0; y < ny_; ++y) {
          restricted.set_forbidden(x, y, mask_[h].forbidden(x, y));
        }
      }
    }
    mask_[h] = std::move(restricted);
    return true;
  }

  std::span<const double> Block(std::span<const double> z, int h) const {
    return z.subspan(h * block(), block());
  }

  void Marginal(std::span<const double> z, int h, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const auto w = Block(z, h);
    for (std::size_t x = 0; x < nx_; ++x) {
      const double px = px_[h][x];
      if (px == 0.0) continue;
      for (std::size_t y = 0; y < ny_; ++y) out[y] += px * w[x * ny_ + y];
    }
  }

  double Expected(std::span<const double> z, int h) const {
    const auto w = Block(z, h);
    double e = 0.0;
    for (std::size_t x = 0; x < nx_; ++x) {
      for (std::size_t y = 0; y < ny_; ++y) {
        e += px_[h][x] * w[x * ny_ + y] * d(x, y);
      }
    }
    return e;
  }

 private:
  std::size_t nx_;
  std::size_t ny_;
  std::array<std::vector<double>, 2> px_;
  std::vector<double> d_;
  std::array<Mask, 2> mask_;
  std::array<double, 2> budget_;
};

// f(a, b) with gradient in the marginals.
template <class T>
concept MarginalObjective = requires(const T& f, std::span<const double> a,
                                     std::span<const double> b,
                                     std::span<double> ga, std::span<double> gb) {
  { f.Value(a, b) } -> std::convertible_to<double>;
  f.Gradient(a, b, ga, gb);
  // Where a[y] = b[y] = 0 the objective is not differentiable. FaceGradient
  // returns the member of its subdifferential in that coordinate indexed by
  // the log-ratio u; every such member gives a valid linear lower model.
  { f.FaceGradient(a, b, 0.0) } -> std::convertible_to<std::pair<double, double>>;
};

// D(a || b).
struct KlObjective {
  double Value(std::span<const double> a, std::span<const double> b) const {
    return info::Kl(a, b);
  }
  void Gradient(std::span<const double> a, std::span<const double> b,
                std::span<double> ga, std::span<double> gb) const {
    for (std::size_t y = 0; y < a.size(); ++y) {
      if (a[y] > 0.0 && b[y] > 0.0) {
        const double r = a[y] / b[y];
        ga[y] = std::log(r) + 1.0;
        gb[y] = -r;
      } else if (a[y] == 0.0 && b[y] == 0.0) {
        // Not differentiable here; use the derivative along equal growth.
        ga[y] = 1.0;
        gb[y] = -1.0;
      } else {
        // Only reachable on coordinates the feasible set cannot move.
        ga[y] = 0.0;
        gb[y] = 0.0;
      }
    }
  }
  // Gradient of a log(a/b) at a/b = e^u.
  std::pair<double, double> FaceGradient(std::span<const double>,
                                         std::span<const double>, double u) const {
    return {1.0 + u, -std::exp(u)};
  }
};

// -log sum a^tau b^(1-tau) for tau strictly inside (0, 1).
struct ChernoffTauObjective {
  double tau;

  double Value(std::span<const double> a, std::span<const double> b) const {
    return info::ChernoffCoeff(a, b, tau);
  }
  void Gradient(std::span<const double> a, std::span<const double> b,
                std::span<double> ga, std::span<double> gb) const {
    const double s = info::BhattacharyyaSum(a, b, tau);
    for (std::size_t y = 0; y < a.size(); ++y) {
      if (a[y] > 0.0 && b[y] > 0.0) {
        const double r = b[y] / a[y];
        ga[y] = -tau * std::pow(r, 1.0 - tau) / s;
        gb[y] = -(1.0 - tau) * std::pow(r, -tau) / s;
      } else if (a[y] == 0.0 && b[y] == 0.0) {
        ga[y] = -tau / s;
        gb[y] = -(1.0 - tau) / s;
      } else {
        ga[y] = 0.0;
        gb[y] = 0.0;
      }
    }
  }
  // Gradient of -a^tau b^(1-tau) / S at b/a = e^u.
  std::pair<double, double> FaceGradient(std::span<const double> a,
                                         std::span<const double> b, double u) const {
    const double s = info::BhattacharyyaSum(a, b, tau);
    return {-tau * std::exp((1.0 - tau) * u) / s,
            -(1.0 - tau) * std::exp(-tau * u) / s};
  }
};

static_assert(MarginalObjective<KlObjective>);
static_assert(MarginalObjective<ChernoffTauObjective>);

template <MarginalObjective Objective>
double Evaluate(const PolicyPolytope& poly, const Objective& f,
                std::span<const double> z) {
  std::vector<double> a(poly.ny()), b(poly.ny());
  poly.Marginal(z, 0, a);
  poly.Marginal(z, 1, b);
  return f.Value(a, b);
}

// Gradient of f(p0' W0, p1' W1) with respect to z. Entries on masked pairs
// are zero.
// Chain rule from marginal gradients to the policy pair.
inline void PullBackGradient(const PolicyPolytope& poly, std::span<const double> ga,
                             std::span<const double> gb, std::span<double> g) {
  const std::size_t ny = poly.ny();
  for (int h = 0; h < 2; ++h) {
    const auto& gm = h == 0 ? ga : gb;
    for (std::size_t x = 0; x < poly.nx(); ++x) {
      const double px = poly.p(h, x);
      for (std::size_t y = 0; y < ny; ++y) {
        const std::size_t i = h * poly.block() + x * ny + y;
        g[i] = (px > 0.0 && poly.allowed(h, x, y)) ? px * gm[y] : 0.0;
      }
    }
  }
}

template <MarginalObjective Objective>
void PolicyGradient(const PolicyPolytope& poly, const Objective& f,
                    std::span<const double> z, std::span<double> g) {
  const std::size_t ny = poly.ny();
  std::vector<double> a(ny), b(ny), ga(ny), gb(ny);
  poly.Marginal(z, 0, a);
  poly.Marginal(z, 1, b);
  f.Gradient(a, b, ga, gb);
  PullBackGradient(poly, ga, gb, g);
}

// Exact minimizer of <g, W> over the hypothesis-h block of the polytope.
// Writes a vertex into `out` and returns false if the block is infeasible.
inline bool LinearMinimizer(const PolicyPolytope& poly, int h,
                            std::span<const double> g, std::span<double> out) {
  struct Item {
    std::size_t y;
    double cost;
    double grad;
    double dist;
  };
  struct Segment {
    std::size_t x;
    std::size_t k;
    double slope;
    double dcost;
  };
  const std::size_t nx = poly.nx();
  const std::size_t ny = poly.ny();
  std::vector<std::vector<Item>> hulls(nx);
  std::vector<Segment> segments;
  double spent = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    std::vector<Item> items;
    for (std::size_t y = 0; y < ny; ++y) {
      if (!poly.allowed(h, x, y)) continue;
      items.push_back({y, poly.p(h, x) * poly.d(x, y), g[x * ny + y], poly.d(x, y)});
    }
    std::sort(items.begin(), items.end(), [](const Item& l, const Item& r) {
      if (l.cost != r.cost) return l.cost < r.cost;
      if (l.grad != r.grad) return l.grad < r.grad;
      if (l.dist != r.dist) return l.dist < r.dist;
      return l.y < r.y;
    });
    // Efficient frontier: strictly decreasing gradient as cost grows, then
    // its lower convex hull.
    auto& hull = hulls[x];
    for (const Item& it : items) {
      if (!hull.empty() && it.grad >= hull.back().grad) continue;
      while (hull.size() >= 2) {
        const Item& p1 = hull[hull.size() - 2];
        const Item& p2 = hull.back();
        const double s12 = (p2.grad - p1.grad) / (p2.cost - p1.cost);
        const double s23 = (it.grad - p2.grad) / (it.cost - p2.cost);
        if (s12 < s23) break;
        hull.pop_back();
      }
      hull.push_back(it);
    }
    spent += hull.front().cost;
    for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
      const double dc = hull[k + 1].cost - hull[k].cost;
      segments.push_back({x, k, (hull[k + 1].grad - hull[k].grad) / dc, dc});
    }
  }
  const double budget = poly.budget(h);
  double remaining = budget - spent;
  if (remaining < -1e-12 * std::max(1.0, budget)) return false;
  remaining = std::max(remaining, 0.0);
  std::stable_sort(segments.begin(), segments.end(),
                   [](const Segment& l, const Segment& r) {
                     if (l.slope != r.slope) return l.slope < r.slope;
                     if (l.x != r.x) return l.x < r.x;
                     return l.k < r.k;
                   });
  std::vector<std::size_t> pos(nx, 0);
  std::optional<std::size_t> split_row;
  double split_frac = 0.0;
  for (const Segment& seg : segments) {
    if (seg.k != pos[seg.x]) continue;
    if (seg.dcost <= remaining) {
      remaining -= seg.dcost;
      pos[seg.x] = seg.k + 1;
    } else {
      split_row = seg.x;
      split_frac = remaining / seg.dcost;
      break;
    }
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    const auto& hull = hulls[x];
    if (split_row && *split_row == x && split_frac > 0.0) {
      out[x * ny + hull[pos[x]].y] = 1.0 - split_frac;
      out[x * ny + hull[pos[x] + 1].y] = split_frac;
    } else {
      out[x * ny + hull[pos[x]].y] = 1.0;
    }
  }
  return true;
}

// The same subproblem through the general simplex solver. Used as an
// independent check of LinearMinimizer and for auxiliary LPs.
inline lp::Problem BlockProblem(const PolicyPolytope& poly, int h,
                                std::span<const double> objective) {
  const std::size_t nx = poly.nx();
  const std::size_t ny = poly.ny();
  lp::Problem prob;
  prob.objective.assign(objective.begin(), objective.end());
  for (std::size_t x = 0; x < nx; ++x) {
    std::vector<double> row(nx * ny, 0.0);
    for (std::size_t y = 0; y < ny; ++y) {
      if (poly.allowed(h, x, y)) row[x * ny + y] = 1.0;
    }
    prob.Add(std::move(row), lp::Sense::kEqual, 1.0);
  }
  std::vector<double> cost(nx * ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      cost[x * ny + y] = poly.p(h, x) * poly.d(x, y);
    }
  }
  prob.Add(std::move(cost), lp::Sense::kLessEqual, poly.budget(h));
  // Masked entries are pinned to zero.
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      if (poly.allowed(h, x, y)) continue;
      std::vector<double> pin(nx * ny, 0.0);
      pin[x * ny + y] = 1.0;
      prob.Add(std::move(pin), lp::Sense::kEqual, 0.0);
    }
  }
  return prob;
}

inline std::optional<std::vector<double>> LinearMinimizerLp(
    const PolicyPolytope& poly, int h, std::span<const double> g) {
  const lp::Solution sol = lp::Solve(BlockProblem(poly, h, g));
  if (sol.status != lp::Status::kOptimal) return std::nullopt;
  return sol.x;
}

// Strictly positive (on allowed pairs) budget-feasible starting block:
// the uniform policy pulled toward the cheapest vertex just far enough to
// meet the budget.
inline std::optional<std::vector<double>> InteriorBlock(const PolicyPolytope& poly,
                                                        int h) {
  const std::size_t nx = poly.nx();
  const std::size_t ny = poly.ny();
  std::vector<double> uniform(poly.block(), 0.0);
  std::vector<double> cheapest(poly.block(), 0.0);
  double cost_u = 0.0;
  double cost_v = 0.0;
  for (std::size_t x = 0; x < nx; ++x) {
    std::size_t count = 0;
    std::size_t best = ny;
    for (std::size_t y = 0; y < ny; ++y) {
      if (!poly.allowed(h, x, y)) continue;
      ++count;
      if (best == ny || poly.d(x, y) < poly.d(x, best)) best = y;
    }
    if (count == 0) return std::nullopt;
    for (std::size_t y = 0; y < ny; ++y) {
      if (!poly.allowed(h, x, y)) continue;
      uniform[x * ny + y] = 1.0 / static_cast<double>(count);
      cost_u += poly.p(h, x) * poly.d(x, y) / static_cast<double>(count);
    }
    cheapest[x * ny + best] = 1.0;
    cost_v += poly.p(h, x) * poly.d(x, best);
  }
  const double s = poly.budget(h);
  if (cost_u <= s) return uniform;
  if (cost_v > s + 1e-12 * std::max(1.0, s)) return std::nullopt;
  const double lambda = std::min(1.0, (cost_u - s) / (cost_u - cost_v));
  std::vector<double> out(poly.block());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - lambda) * uniform[i] + lambda * cheapest[i];
  }
  return out;
}

struct Options {
  double gap_tolerance = 1e-8;
  int max_iterations = 50000;
};

struct Result {
  std::vector<double> z;
  double value = kInf;
  double gap = kInf;
  int iterations = 0;
  bool converged = false;
};

namespace internal {

// Exact minimizer of the convex function t -> f(m + t dm) on [0, t_max],
// located by bisection on the sign of the directional derivative.
template <MarginalObjective Objective>
double LineSearch(const Objective& f, std::span<const double> a,
                  std::span<const double> b, std::span<const double> da,
                  std::span<const double> db, double t_max) {
  const std::size_t ny = a.size();
  std::vector<double> at(ny), bt(ny), ga(ny), gb(ny);
  auto move = [&](double t) {
    for (std::size_t y = 0; y < ny; ++y) {
      at[y] = std::max(a[y] + t * da[y], 0.0);
      bt[y] = std::max(b[y] + t * db[y], 0.0);
    }
  };
  // +1: increasing or infinite, -1: decreasing, 0: flat.
  auto slope_sign = [&](double t) {
    move(t);
    const double v = f.Value(at, bt);
    if (!std::isfinite(v)) return 1;
    f.Gradient(at, bt, ga, gb);
    double s = 0.0;
    for (std::size_t y = 0; y < ny; ++y) s += ga[y] * da[y] + gb[y] * db[y];
    if (std::isnan(s)) return 1;
    return s > 0.0 ? 1 : (s < 0.0 ? -1 : 0);
  };
  if (slope_sign(t_max) <= 0) return t_max;
  double lo = 0.0;
  double hi = t_max;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * t_max; ++it) {
    const double mid = 0.5 * (lo + hi);
    const int sign = slope_sign(mid);
    if (sign == 0) return mid;
    if (sign > 0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

inline constexpr double kFaceBackoff = 1e-6;

// True if moving to m + t dm drives a positive marginal coordinate to zero.
inline bool ZeroesMarginal(std::span<const double> a, std::span<const double> b,
                           std::span<const double> da, std::span<const double> db,
                           double t) {
  for (std::size_t y = 0; y < a.size(); ++y) {
    if (a[y] > 0.0 && a[y] + t * da[y] <= 1e-9 * a[y]) return true;
    if (b[y] > 0.0 && b[y] + t * db[y] <= 1e-9 * b[y]) return true;
  }
  return false;
}

}  // namespace internal

// Minimizes f over the polytope starting from the feasible point `start`.
// `start` may be given as a convex combination of several feasible points,
// which then seed the active set.
template <MarginalObjective Objective>
Result MinimizeAwayStep(const PolicyPolytope& poly, const Objective& f,
                        std::vector<std::vector<double>> atoms,
                        std::vector<double> weights, const Options& opts) {
  const std::size_t dim = poly.dim();
  const std::size_t ny = poly.ny();
  std::vector<double> z(dim, 0.0);
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    for (std::size_t i = 0; i < dim; ++i) z[i] += weights[k] * atoms[k][i];
  }
  std::vector<double> g(dim), v(dim), dir(dim);
  std::vector<double> a(ny), b(ny), da(ny), db(ny);

  Result res;
  res.z = z;
  res.value = Evaluate(poly, f, z);
  if (!std::isfinite(res.value)) return res;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    PolicyGradient(poly, f, z, g);
    for (int h = 0; h < 2; ++h) {
      std::span<double> vb(v.data() + h * poly.block(), poly.block());
      LinearMinimizer(poly, h, std::span<const double>(g).subspan(h * poly.block(), poly.block()), vb);
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < dim; ++i) gap += g[i] * (z[i] - v[i]);
    res.iterations = iter;
    res.gap = gap;
    if (gap <= opts.gap_tolerance) {
      res.converged = true;
      break;
    }

    std::size_t away = 0;
    double away_score = -kInf;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) s += g[i] * atoms[k][i];
      if (s > away_score) {
        away_score = s;
        away = k;
      }
    }
    double gz = 0.0;
    for (std::size_t i = 0; i < dim; ++i) gz += g[i] * z[i];
    const double away_gap = away_score - gz;

    const bool fw_step = gap >= away_gap || atoms.size() == 1;
    double t_max = 1.0;
    if (fw_step) {
      for (std::size_t i = 0; i < dim; ++i) dir[i] = v[i] - z[i];
    } else {
      for (std::size_t i = 0; i < dim; ++i) dir[i] = z[i] - atoms[away][i];
      t_max = weights[away] / (1.0 - weights[away]);
    }
    poly.Marginal(z, 0, a);
    poly.Marginal(z, 1, b);
    poly.Marginal(dir, 0, da);
    poly.Marginal(dir, 1, db);
    // The objective is not differentiable where a marginal coordinate
    // vanishes, so a step that would empty one stops just short of it.
    // Faces are handled separately by MinimizeFaceAware.
    const bool hits_face = internal::ZeroesMarginal(a, b, da, db, t_max);
    const double t_cap = hits_face ? t_max * (1.0 - internal::kFaceBackoff) : t_max;
    const double t = internal::LineSearch(f, a, b, da, db, t_cap);
    const bool full_step = !hits_face && t >= t_max;
    if (t <= 0.0) {
      // No progress possible along the chosen direction in floating point.
      res.iterations = iter + 1;
      break;
    }

    if (fw_step) {
      if (full_step) {
        atoms.assign(1, v);
        weights.assign(1, 1.0);
      } else {
        for (double& w : weights) w *= (1.0 - t);
        auto it = std::find(atoms.begin(), atoms.end(), v);
        if (it == atoms.end()) {
          atoms.push_back(v);
          weights.push_back(t);
        } else {
          weights[static_cast<std::size_t>(it - atoms.begin())] += t;
        }
      }
    } else {
      for (double& w : weights) w *= (1.0 + t);
      weights[away] -= t;
      if (full_step || weights[away] <= 0.0) {
        atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(away));
        weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(away));
        double total = 0.0;
        for (double w : weights) total += w;
        for (double& w : weights) w /= total;
      }
    }
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      for (std::size_t i = 0; i < dim; ++i) z[i] += weights[k] * atoms[k][i];
    }
    res.iterations = iter + 1;
  }
  res.z = z;
  res.value = Evaluate(poly, f, z);
  return res;
}

template <MarginalObjective Objective>
Result MinimizeAwayStep(const PolicyPolytope& poly, const Objective& f,
                        std::vector<double> start, const Options& opts) {
  return MinimizeAwayStep(poly, f, {std::move(start)}, {1.0}, opts);
}

// Frank-Wolfe gap at z for the marginal gradient (ga, gb).
inline double GapFor(const PolicyPolytope& poly, std::span<const double> z,
                     std::span<const double> ga, std::span<const double> gb) {
  std::vector<double> g(poly.dim()), v(poly.dim());
  PullBackGradient(poly, ga, gb, g);
  for (int h = 0; h < 2; ++h) {
    std::span<double> vb(v.data() + h * poly.block(), poly.block());
    if (!LinearMinimizer(poly, h,
                         std::span<const double>(g).subspan(h * poly.block(), poly.block()),
                         vb)) {
      return kInf;
    }
  }
  double gap = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) gap += g[i] * (z[i] - v[i]);
  return gap;
}

// Upper bound on f(z) - min f for a point z whose marginals vanish together
// on some outputs. On those outputs any subgradient may replace the missing
// gradient, and the gap is convex in each log-ratio, so the tightest bound
// is found by cyclic golden-section search.
template <MarginalObjective Objective>
double FaceCertificate(const PolicyPolytope& poly, const Objective& f,
                       std::span<const double> z) {
  const std::size_t ny = poly.ny();
  std::vector<double> a(ny), b(ny), ga(ny), gb(ny);
  poly.Marginal(z, 0, a);
  poly.Marginal(z, 1, b);
  if (!std::isfinite(f.Value(a, b))) return kInf;
  f.Gradient(a, b, ga, gb);
  std::vector<std::size_t> face;
  for (std::size_t y = 0; y < ny; ++y) {
    if (a[y] == 0.0 && b[y] == 0.0) face.push_back(y);
  }
  double best = GapFor(poly, z, ga, gb);
  if (face.empty()) return best;
  std::vector<double> u(face.size(), 0.0);
  auto set = [&](std::size_t k, double uk) {
    const auto [fa, fb] = f.FaceGradient(a, b, uk);
    ga[face[k]] = fa;
    gb[face[k]] = fb;
  };
  for (int sweep = 0; sweep < 20; ++sweep) {
    const double before = best;
    for (std::size_t k = 0; k < face.size(); ++k) {
      auto gap_at = [&](double uk) {
        set(k, uk);
        return -GapFor(poly, z, ga, gb);
      };
      const ScalarMax m = GoldenSectionMaximize(gap_at, -40.0, 40.0, 1e-10);
      if (-m.value < best) {
        best = -m.value;
        u[k] = m.argmax;
      }
      set(k, u[k]);
    }
    if (best <= 0.0 || before - best <= 1e-15) break;
  }
  return best;
}

// Away-step Frank-Wolfe that also handles optima on faces where marginal
// coordinates vanish together. When the plain iteration stalls, outputs
// whose marginal mass has collapsed are removed, the restricted problem is
// solved, and its solution is accepted if FaceCertificate on the full
// polytope meets the tolerance.
template <MarginalObjective Objective>
Result MinimizeFaceAware(const PolicyPolytope& poly, const Objective& f,
                         std::vector<std::vector<double>> atoms,
                         std::vector<double> weights, const Options& opts) {
  constexpr double kCollapsed = 1e-3;
  const std::size_t ny = poly.ny();
  int used = 0;
  int chunk = 500;
  Result last;
  while (used < opts.max_iterations) {
    Options run = opts;
    run.max_iterations = std::min(chunk, opts.max_iterations - used);
    last = MinimizeAwayStep(poly, f, std::move(atoms), std::move(weights), run);
    used += last.iterations;
    if (last.converged || !std::isfinite(last.value)) break;

    std::vector<double> a(ny), b(ny);
    poly.Marginal(last.z, 0, a);
    poly.Marginal(last.z, 1, b);
    std::vector<std::size_t> order;
    for (std::size_t y = 0; y < ny; ++y) {
      const double m = std::max(a[y], b[y]);
      if (m > 0.0 && m <= kCollapsed) order.push_back(y);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
      return std::max(a[l], b[l]) < std::max(a[r], b[r]);
    });
    std::vector<bool> keep(ny, true);
    for (std::size_t y : order) {
      keep[y] = false;
      PolicyPolytope restricted = poly;
      if (!restricted.RestrictOutputs(0, keep) || !restricted.RestrictOutputs(1, keep)) {
        break;
      }
      std::vector<double> start(poly.dim());
      bool ok = true;
      for (int h = 0; h < 2 && ok; ++h) {
        auto block = InteriorBlock(restricted, h);
        ok = block.has_value();
        if (ok) std::copy(block->begin(), block->end(), start.begin() + h * poly.block());
      }
      if (!ok || !std::isfinite(Evaluate(restricted, f, start))) break;
      Options sub_opts = opts;
      sub_opts.max_iterations = opts.max_iterations - used;
      if (sub_opts.max_iterations <= 0) break;
      Result sub = MinimizeFaceAware(restricted, f, {std::move(start)}, {1.0}, sub_opts);
      used += sub.iterations;
      if (!sub.converged || sub.value > last.value + opts.gap_tolerance) continue;
      const double cert = FaceCertificate(poly, f, sub.z);
      if (cert <= opts.gap_tolerance) {
        sub.gap = cert;
        sub.iterations = used;
        return sub;
      }
    }
    if (last.iterations == 0) break;
    atoms = {last.z};
    weights = {1.0};
    chunk *= 2;
  }
  last.iterations = used;
  return last;
}

}  // namespace privexp::fw

#endif  // PRIVEXP_FRANK_WOLFE_HPP_
