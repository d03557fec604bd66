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

// Single-letter privacy exponents over the distortion-constrained policy
// polytope:
//
//   phi(s0, s1)    = min  D(p_Y|h0 || p_Y|h1)
//   nu_tau(s0, s1) = min  C_tau(p_Y|h0, p_Y|h1)
//   nu(s0, s1)     = min  C(p_Y|h0, p_Y|h1) = max_tau nu_tau(s0, s1)
//
// where the minimum runs over memoryless policy pairs whose expected
// distortion under h_j is at most s_j.

#ifndef PRIVEXP_EXPONENTS_HPP_
#define PRIVEXP_EXPONENTS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "privexp/distortion.hpp"
#include "privexp/distributions.hpp"
#include "privexp/error.hpp"
#include "privexp/frank_wolfe.hpp"
#include "privexp/lp.hpp"
#include "privexp/scalar_search.hpp"

namespace privexp {

// Objective values above this are reported as effectively infinite.
inline constexpr double kEffectivelyInfinite = 1e3;

struct SolverOptions {
  double gap_tolerance = 1e-8;
  int max_iterations = 50000;
  // Golden-section resolution for the outer search over tau.
  double tau_tolerance = 1e-9;
  // Inner tolerance once the tau bracket is narrower than
  // tighten_below_bracket.
  double near_max_gap_tolerance = 1e-9;
  double tighten_below_bracket = 1e-2;
  std::optional<PolicyPair> warm_start;
};

struct ExponentResult {
  double value = kInf;
  PolicyPair policy;
  std::optional<double> tau_star;
  std::array<double, 2> distortions{0.0, 0.0};
  Pmf marginal_h0;
  Pmf marginal_h1;
  int iterations = 0;
  double duality_gap = 0.0;
  bool converged = false;
  bool effectively_infinite = false;
  // Full Chernoff information re-evaluated at the returned policy (nu only).
  std::optional<double> chernoff_at_policy;
};

namespace internal {

inline ConditionalPmf BlockToConditional(const fw::PolicyPolytope& poly,
                                         const DistortionSpec& dist,
                                         std::span<const double> z, int h) {
  const auto w = poly.Block(z, h);
  const std::size_t ny = poly.ny();
  std::vector<double> rows(w.begin(), w.end());
  for (std::size_t x = 0; x < poly.nx(); ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < ny; ++y) {
      if (!dist.mask().allowed(x, y)) rows[x * ny + y] = 0.0;
      rows[x * ny + y] = std::max(rows[x * ny + y], 0.0);
      sum += rows[x * ny + y];
    }
    for (std::size_t y = 0; y < ny; ++y) rows[x * ny + y] /= sum;
  }
  return ConditionalPmf(dist.x_alphabet(), dist.y_alphabet(), std::move(rows),
                        dist.mask());
}

inline std::vector<double> PolicyToFlat(const fw::PolicyPolytope& poly,
                                        const PolicyPair& policy) {
  std::vector<double> z(poly.dim());
  for (int h = 0; h < 2; ++h) {
    const auto e = policy[static_cast<Hypothesis>(h)].entries();
    std::copy(e.begin(), e.end(), z.begin() + h * poly.block());
  }
  return z;
}

inline bool BlockRespectsPolytope(const fw::PolicyPolytope& poly,
                                  std::span<const double> z, int h) {
  const auto w = poly.Block(z, h);
  for (std::size_t x = 0; x < poly.nx(); ++x) {
    for (std::size_t y = 0; y < poly.ny(); ++y) {
      if (!poly.allowed(h, x, y) && w[x * poly.ny() + y] != 0.0) return false;
    }
  }
  return poly.Expected(z, h) <= poly.budget(h) * (1.0 + 1e-12) + 1e-12;
}

inline void ValidateProblem(const SourceModel& source, const ConstraintSet& cons) {
  Require(source.x_alphabet() == cons.distortion().x_alphabet(),
          "source alphabet does not match the distortion spec");
  const FeasibilityReport probe = ProbeFeasibility(source, cons);
  if (!probe.feasible) {
    throw Infeasible("no policy pair meets the distortion budgets (violation " +
                     std::to_string(probe.max_violation) + ")");
  }
}

inline ExponentResult Finish(const SourceModel& source, const ConstraintSet& cons,
                             const fw::PolicyPolytope& poly,
                             std::span<const double> z) {
  const DistortionSpec& dist = cons.distortion();
  ExponentResult r;
  r.policy = PolicyPair(BlockToConditional(poly, dist, z, 0),
                        BlockToConditional(poly, dist, z, 1));
  r.marginal_h0 = Marginal(source.p_x_h0(), r.policy.h0());
  r.marginal_h1 = Marginal(source.p_x_h1(), r.policy.h1());
  r.distortions = {dist.Expected(source.p_x_h0(), r.policy.h0()),
                   dist.Expected(source.p_x_h1(), r.policy.h1())};
  return r;
}

// Weight kept on the interior point when a warm start is supplied. Warm
// starts often sit on a face where the objective is not differentiable;
// blending in the interior point restores well-defined gradients.
inline constexpr double kWarmStartInteriorWeight = 1e-6;

struct Start {
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;
};

// Builds the starting active set: the interior point, blended with the
// caller's warm start if that is feasible for this polytope and has a finite
// objective.
template <fw::MarginalObjective Objective>
std::optional<Start> StartingPoint(const fw::PolicyPolytope& poly,
                                   const Objective& f, const SolverOptions& opts) {
  std::vector<double> interior(poly.dim());
  for (int h = 0; h < 2; ++h) {
    auto block = fw::InteriorBlock(poly, h);
    if (!block) return std::nullopt;
    std::copy(block->begin(), block->end(), interior.begin() + h * poly.block());
  }
  if (!std::isfinite(fw::Evaluate(poly, f, interior))) return std::nullopt;
  if (opts.warm_start && opts.warm_start->x_alphabet().size() == poly.nx() &&
      opts.warm_start->y_alphabet().size() == poly.ny()) {
    std::vector<double> z = PolicyToFlat(poly, *opts.warm_start);
    if (BlockRespectsPolytope(poly, z, 0) && BlockRespectsPolytope(poly, z, 1) &&
        std::isfinite(fw::Evaluate(poly, f, z))) {
      return Start{{std::move(z), std::move(interior)},
                   {1.0 - kWarmStartInteriorWeight, kWarmStartInteriorWeight}};
    }
  }
  return Start{{std::move(interior)}, {1.0}};
}

// A finite divergence needs supp(p_Y|h0) inside supp(p_Y|h1). The interior
// h1 block has the largest support any feasible h1 policy can reach, so h0
// is restricted to that support.
inline bool RestrictForKl(fw::PolicyPolytope& poly) {
  auto block1 = fw::InteriorBlock(poly, 1);
  if (!block1) return false;
  std::vector<double> z(poly.dim(), 0.0);
  std::copy(block1->begin(), block1->end(), z.begin() + poly.block());
  std::vector<double> b(poly.ny());
  poly.Marginal(z, 1, b);
  std::vector<bool> keep(poly.ny());
  for (std::size_t y = 0; y < poly.ny(); ++y) keep[y] = b[y] > 0.0;
  return poly.RestrictOutputs(0, keep) && fw::InteriorBlock(poly, 0).has_value();
}

// Every feasible policy pair has an infinite objective. Reports the
// unrestricted interior point.
inline ExponentResult InfiniteResult(const SourceModel& source,
                                     const ConstraintSet& cons) {
  fw::PolicyPolytope plain(source, cons);
  std::vector<double> z(plain.dim());
  for (int h = 0; h < 2; ++h) {
    auto block = fw::InteriorBlock(plain, h);
    std::copy(block->begin(), block->end(), z.begin() + h * plain.block());
  }
  ExponentResult r = Finish(source, cons, plain, z);
  r.value = kInf;
  r.effectively_infinite = true;
  r.converged = true;
  return r;
}

template <fw::MarginalObjective Objective>
ExponentResult SolveConvex(const SourceModel& source, const ConstraintSet& cons,
                           fw::PolicyPolytope& poly, const Objective& f,
                           const SolverOptions& opts) {
  auto start = StartingPoint(poly, f, opts);
  if (!start) return InfiniteResult(source, cons);
  fw::Options fo;
  fo.gap_tolerance = opts.gap_tolerance;
  fo.max_iterations = opts.max_iterations;
  const fw::Result fr = fw::MinimizeFaceAware(poly, f, std::move(start->atoms),
                                             std::move(start->weights), fo);
  ExponentResult r = Finish(source, cons, poly, fr.z);
  r.iterations = fr.iterations;
  r.duality_gap = fr.gap;
  r.converged = fr.converged;
  return r;
}

// Largest-support feasible block for hypothesis h: the average of the LP
// maximizers of each output probability.
inline std::vector<double> MaxSupportBlock(const fw::PolicyPolytope& poly, int h) {
  const std::size_t nx = poly.nx();
  const std::size_t ny = poly.ny();
  std::vector<double> avg(poly.block(), 0.0);
  int count = 0;
  for (std::size_t y = 0; y < ny; ++y) {
    std::vector<double> c(poly.block(), 0.0);
    bool reachable = false;
    for (std::size_t x = 0; x < nx; ++x) {
      if (poly.allowed(h, x, y) && poly.p(h, x) > 0.0) {
        c[x * ny + y] = -poly.p(h, x);
        reachable = true;
      }
    }
    if (!reachable) continue;
    const lp::Solution sol = lp::Solve(fw::BlockProblem(poly, h, c));
    if (sol.status != lp::Status::kOptimal) continue;
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += sol.x[i];
    ++count;
  }
  if (count == 0) return *fw::InteriorBlock(poly, h);
  for (double& w : avg) w /= count;
  return avg;
}

// nu_0 = min -log p_Y|h1(supp p_Y|h0) and nu_1 = min -log p_Y|h0(supp
// p_Y|h1). The support side is made as large as possible; the other side
// maximizes its mass on that support by LP.
inline ExponentResult SolveChernoffEndpoint(const SourceModel& source,
                                            const ConstraintSet& cons,
                                            double tau) {
  fw::PolicyPolytope poly(source, cons);
  const int support_side = tau == 0.0 ? 0 : 1;
  const int mass_side = 1 - support_side;
  std::vector<double> z(poly.dim(), 0.0);
  const std::vector<double> wide = MaxSupportBlock(poly, support_side);
  std::copy(wide.begin(), wide.end(), z.begin() + support_side * poly.block());
  std::vector<double> m(poly.ny());
  poly.Marginal(z, support_side, m);
  std::vector<double> c(poly.block(), 0.0);
  for (std::size_t x = 0; x < poly.nx(); ++x) {
    for (std::size_t y = 0; y < poly.ny(); ++y) {
      if (m[y] > 0.0) c[x * poly.ny() + y] = -poly.p(mass_side, x);
    }
  }
  const lp::Solution sol = lp::Solve(fw::BlockProblem(poly, mass_side, c));
  Require(sol.status == lp::Status::kOptimal, "endpoint LP failed");
  std::copy(sol.x.begin(), sol.x.end(), z.begin() + mass_side * poly.block());
  ExponentResult r = Finish(source, cons, poly, z);
  r.value = ChernoffCoeff(r.marginal_h0, r.marginal_h1, tau);
  r.effectively_infinite = r.value > kEffectivelyInfinite;
  r.converged = true;
  r.tau_star = tau;
  return r;
}

inline ExponentResult SolveNuTauUnchecked(const SourceModel& source,
                                          const ConstraintSet& cons, double tau,
                                          const SolverOptions& opts) {
  if (tau == 0.0 || tau == 1.0) return SolveChernoffEndpoint(source, cons, tau);
  fw::PolicyPolytope poly(source, cons);
  const fw::ChernoffTauObjective f{tau};
  ExponentResult r = SolveConvex(source, cons, poly, f, opts);
  if (!r.effectively_infinite) {
    r.value = ChernoffCoeff(r.marginal_h0, r.marginal_h1, tau);
    r.effectively_infinite = r.value > kEffectivelyInfinite;
  }
  r.tau_star = tau;
  return r;
}

// A policy pair sending every input to one common output symbol makes the
// two output laws identical, so every exponent is exactly zero. Returns the
// cheapest such pair when it meets both budgets.
inline std::optional<ExponentResult> ConstantOutputSolution(const SourceModel& source,
                                                            const ConstraintSet& cons) {
  const DistortionSpec& dist = cons.distortion();
  const std::size_t nx = dist.x_alphabet().size();
  const std::size_t ny = dist.y_alphabet().size();
  std::optional<std::size_t> best;
  double best_cost = kInf;
  for (std::size_t y = 0; y < ny; ++y) {
    bool ok = true;
    std::array<double, 2> cost{0.0, 0.0};
    for (std::size_t x = 0; x < nx && ok; ++x) {
      ok = dist.mask().allowed(x, y);
      cost[0] += source.p_x_h0()[x] * dist.d(x, y);
      cost[1] += source.p_x_h1()[x] * dist.d(x, y);
    }
    if (!ok || cost[0] > cons.s_bar() || cost[1] > cons.s_tilde()) continue;
    if (cost[0] + cost[1] < best_cost) {
      best = y;
      best_cost = cost[0] + cost[1];
    }
  }
  if (!best) return std::nullopt;
  std::vector<double> rows(nx * ny, 0.0);
  for (std::size_t x = 0; x < nx; ++x) rows[x * ny + *best] = 1.0;
  const ConditionalPmf c(dist.x_alphabet(), dist.y_alphabet(), rows, dist.mask());
  ExponentResult r;
  r.value = 0.0;
  r.policy = PolicyPair(c, c);
  r.marginal_h0 = Marginal(source.p_x_h0(), c);
  r.marginal_h1 = Marginal(source.p_x_h1(), c);
  r.distortions = {dist.Expected(source.p_x_h0(), c), dist.Expected(source.p_x_h1(), c)};
  r.converged = true;
  return r;
}

}  // namespace internal

// phi(s_bar, s_tilde): minimal output divergence D(p_Y|h0 || p_Y|h1).
inline ExponentResult SolvePhi(const SourceModel& source, const ConstraintSet& cons,
                               const SolverOptions& opts = {}) {
  internal::ValidateProblem(source, cons);
  if (auto zero = internal::ConstantOutputSolution(source, cons)) return *zero;
  fw::PolicyPolytope poly(source, cons);
  if (!internal::RestrictForKl(poly)) return internal::InfiniteResult(source, cons);
  ExponentResult r = internal::SolveConvex(source, cons, poly, fw::KlObjective{}, opts);
  if (!r.effectively_infinite) {
    r.value = Kl(r.marginal_h0, r.marginal_h1);
    r.effectively_infinite = r.value > kEffectivelyInfinite;
  }
  return r;
}

// nu_tau(s_bar, s_tilde): minimal Chernoff coefficient of order tau.
inline ExponentResult SolveNuTau(const SourceModel& source, const ConstraintSet& cons,
                                 double tau, const SolverOptions& opts = {}) {
  internal::Require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0,1]");
  internal::ValidateProblem(source, cons);
  if (auto zero = internal::ConstantOutputSolution(source, cons)) {
    zero->tau_star = tau;
    return *zero;
  }
  return internal::SolveNuTauUnchecked(source, cons, tau, opts);
}

// nu(s_bar, s_tilde) computed as max_tau nu_tau (equal to the min-max by
// the saddle-point property). nu_tau is concave in tau as a pointwise
// minimum of concave functions, so golden-section search applies.
inline ExponentResult SolveNu(const SourceModel& source, const ConstraintSet& cons,
                              const SolverOptions& opts = {}) {
  internal::ValidateProblem(source, cons);
  if (auto zero = internal::ConstantOutputSolution(source, cons)) {
    zero->tau_star = 0.5;
    zero->chernoff_at_policy = 0.0;
    return *zero;
  }
  std::vector<std::pair<double, ExponentResult>> evaluated;
  std::optional<PolicyPair> last_interior = opts.warm_start;
  int total_iterations = 0;
  bool all_converged = true;
  auto nu_tau = [&](double tau, double bracket) {
    SolverOptions inner = opts;
    inner.warm_start = last_interior;
    if (bracket < opts.tighten_below_bracket) {
      inner.gap_tolerance = std::min(opts.gap_tolerance, opts.near_max_gap_tolerance);
    }
    ExponentResult r = internal::SolveNuTauUnchecked(source, cons, tau, inner);
    total_iterations += r.iterations;
    all_converged = all_converged && r.converged;
    if (tau > 0.0 && tau < 1.0 && !r.effectively_infinite) {
      last_interior = r.policy;
    }
    const double v = r.value;
    evaluated.emplace_back(tau, std::move(r));
    return v;
  };
  const ScalarMax best =
      GoldenSectionMaximize(nu_tau, 0.0, 1.0, opts.tau_tolerance);
  auto it = std::find_if(evaluated.begin(), evaluated.end(),
                         [&](const auto& e) { return e.first == best.argmax; });
  ExponentResult r = std::move(it->second);
  r.tau_star = best.argmax;
  r.iterations = total_iterations;
  r.converged = all_converged;
  r.chernoff_at_policy = Chernoff(r.marginal_h0, r.marginal_h1).value;
  return r;
}

// Maps each supply symbol y to the smallest target symbol >= y and merges
// the probability mass. Symbols below target.min() map to target.min().
inline ConditionalPmf QuantizeConditional(const ConditionalPmf& cond,
                                          const Alphabet& target) {
  const Alphabet& ys = cond.y_alphabet();
  const std::size_t nx = cond.x_alphabet().size();
  const std::size_t nt = target.size();
  std::vector<std::optional<std::size_t>> bucket(ys.size());
  for (std::size_t y = 0; y < ys.size(); ++y) {
    const auto syms = target.symbols();
    auto it = std::lower_bound(syms.begin(), syms.end(), ys[y]);
    if (it != syms.end()) bucket[y] = static_cast<std::size_t>(it - syms.begin());
  }
  std::vector<double> rows(nx * nt, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ys.size(); ++y) {
      const double w = cond.at(x, y);
      if (w == 0.0) continue;
      if (!bucket[y]) {
        throw InvalidInput("supply symbol above the largest target symbol carries "
                           "probability; the policy violates supply <= demand");
      }
      rows[x * nt + *bucket[y]] += w;
    }
  }
  return ConditionalPmf(cond.x_alphabet(), target, std::move(rows));
}

inline PolicyPair QuantizeToDemandAlphabet(const PolicyPair& policy,
                                           const Alphabet& target) {
  internal::Require(policy.x_alphabet() == target,
                    "quantization target must equal the demand alphabet");
  return PolicyPair(QuantizeConditional(policy.h0(), target),
                    QuantizeConditional(policy.h1(), target));
}

enum class ExponentKind { kPhi, kNu };

struct SweepRow {
  double s = 0.0;
  double value = kInf;
  std::optional<double> tau_star;
  double dist_h0 = 0.0;
  double dist_h1 = 0.0;
  bool converged = false;
  bool effectively_infinite = false;
  std::optional<std::string> error;
  std::optional<PolicyPair> policy;
};

struct SweepTable {
  ExponentKind kind = ExponentKind::kPhi;
  std::vector<SweepRow> rows;
  bool monotone_non_increasing = true;
  bool midpoint_convex = true;
};

struct SweepOptions {
  SolverOptions solver;
  bool warm_start = true;
  // Used only when warm_start is false; rows are then independent.
  int threads = 1;
  // Slack for the monotonicity and convexity audits.
  double audit_tolerance = 2e-8;
};

// Non-increasing and midpoint-convex checks over the finite rows.
inline void AuditSweep(SweepTable& table, double tol) {
  std::vector<const SweepRow*> ok;
  for (const auto& row : table.rows) {
    if (!row.error && std::isfinite(row.value)) ok.push_back(&row);
  }
  table.monotone_non_increasing = true;
  table.midpoint_convex = true;
  for (std::size_t i = 1; i < ok.size(); ++i) {
    if (ok[i]->value > ok[i - 1]->value + tol) table.monotone_non_increasing = false;
  }
  for (std::size_t i = 1; i + 1 < ok.size(); ++i) {
    const double s0 = ok[i - 1]->s, s1 = ok[i]->s, s2 = ok[i + 1]->s;
    const double w = (s2 - s1) / (s2 - s0);
    const double chord = w * ok[i - 1]->value + (1.0 - w) * ok[i + 1]->value;
    if (ok[i]->value > chord + tol) table.midpoint_convex = false;
  }
}

inline SweepTable SweepExponent(const SourceModel& source,
                                const DistortionSpec& distortion,
                                const std::vector<double>& s_values,
                                ExponentKind kind, const SweepOptions& opts = {}) {
  for (std::size_t i = 0; i < s_values.size(); ++i) {
    internal::Require(s_values[i] > 0.0, "sweep budgets must be positive");
    if (i > 0) {
      internal::Require(s_values[i] > s_values[i - 1],
                        "sweep budgets must be strictly increasing");
    }
  }
  SweepTable table;
  table.kind = kind;
  table.rows.resize(s_values.size());
  auto solve_row = [&](std::size_t i, const std::optional<PolicyPair>& warm) {
    SweepRow& row = table.rows[i];
    row.s = s_values[i];
    try {
      const ConstraintSet cons(distortion, row.s, row.s);
      SolverOptions so = opts.solver;
      so.warm_start = warm;
      const ExponentResult r = kind == ExponentKind::kPhi
                                   ? SolvePhi(source, cons, so)
                                   : SolveNu(source, cons, so);
      row.value = r.value;
      row.tau_star = r.tau_star;
      row.dist_h0 = r.distortions[0];
      row.dist_h1 = r.distortions[1];
      row.converged = r.converged;
      row.effectively_infinite = r.effectively_infinite;
      row.policy = r.policy;
    } catch (const Error& e) {
      row.error = e.what();
      row.converged = false;
    }
  };
  if (opts.warm_start || opts.threads <= 1) {
    std::optional<PolicyPair> warm;
    for (std::size_t i = 0; i < s_values.size(); ++i) {
      solve_row(i, opts.warm_start ? warm : std::nullopt);
      if (table.rows[i].policy && !table.rows[i].effectively_infinite) {
        warm = table.rows[i].policy;
      }
    }
  } else {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(opts.threads), s_values.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < s_values.size(); i += workers) {
          solve_row(i, std::nullopt);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  AuditSweep(table, opts.audit_tolerance);
  return table;
}

}  // namespace privexp

#endif  // PRIVEXP_EXPONENTS_HPP_
