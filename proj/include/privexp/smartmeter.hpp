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

// Smart-meter specialization. Demand x is served by grid supply y <= x and
// the renewable source covers x - y; the renewable source cannot be
// charged from the grid. The long-run renewable rate s bounds E[x - y]
// under each hypothesis.

#ifndef PRIVEXP_SMARTMETER_HPP_
#define PRIVEXP_SMARTMETER_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "privexp/distortion.hpp"
#include "privexp/distributions.hpp"
#include "privexp/error.hpp"
#include "privexp/exponents.hpp"
#include "privexp/policies.hpp"

namespace privexp {

class DemandModel {
 public:
  DemandModel() = default;
  DemandModel(std::string name, Pmf demand_h0, Pmf demand_h1,
              std::string label_h0 = "h0", std::string label_h1 = "h1")
      : name_(std::move(name)),
        labels_{std::move(label_h0), std::move(label_h1)},
        source_(std::move(demand_h0), std::move(demand_h1)) {
    for (double w : source_.x_alphabet().symbols()) {
      internal::Require(w >= 0.0, "demand values must be nonnegative watts");
    }
  }

  const std::string& name() const { return name_; }
  const std::string& label(Hypothesis h) const { return labels_[Index(h)]; }
  const Alphabet& alphabet() const { return source_.x_alphabet(); }
  const SourceModel& source() const { return source_; }

 private:
  std::string name_;
  std::array<std::string, 2> labels_;
  SourceModel source_;
};

// Dishwasher operating modes under two appliance types (watts).
inline DemandModel DishwasherModel() {
  const Alphabet watts({0.0, 200.0, 500.0, 1200.0});
  return DemandModel("dishwasher", Pmf(watts, {0.2528, 0.3676, 0.0, 0.3796}),
                     Pmf(watts, {0.1599, 0.0579, 0.2318, 0.5504}), "type A", "type B");
}

// Two-level demand {0, 2} with P(X = 0) = p_bar under h0 and p_tilde under h1.
inline DemandModel BinaryDemandModel(double p_bar, double p_tilde) {
  const Alphabet levels({0.0, 2.0});
  return DemandModel("binary", Pmf(levels, {p_bar, 1.0 - p_bar}),
                     Pmf(levels, {p_tilde, 1.0 - p_tilde}));
}

// Supply alphabet equal to the demand alphabet, d(x, y) = x - y, y > x
// forbidden, and renewable budget s under both hypotheses.
inline ConstraintSet BuildEnergyConstraint(const DemandModel& model, double s) {
  internal::Require(std::isfinite(s) && s > 0.0, "renewable rate must be positive");
  return ConstraintSet(DistortionSpec::SupplyBelowDemand(model.alphabet(), model.alphabet()), s,
                       s);
}

struct SmartMeterSweeps {
  SweepTable phi;
  SweepTable nu;
};

inline SmartMeterSweeps SmartMeterExponents(const DemandModel& model,
                                            const std::vector<double>& s_grid,
                                            const SweepOptions& opts = {}) {
  const DistortionSpec dist = DistortionSpec::SupplyBelowDemand(model.alphabet(), model.alphabet());
  return {SweepExponent(model.source(), dist, s_grid, ExponentKind::kPhi, opts),
          SweepExponent(model.source(), dist, s_grid, ExponentKind::kNu, opts)};
}

struct SupplyTrace {
  std::vector<double> demand;
  std::vector<double> supply;
  std::vector<double> renewable;
  // Average renewable use and its standard error over the trace.
  double average_renewable = 0.0;
  double renewable_std_error = 0.0;
  double budget = 0.0;
  // average - 3 se <= s.
  bool within_budget = false;
  // Supply exceeded demand in some slot (must never happen).
  bool supply_above_demand = false;
  // Exponent solved for the policy; absent for s = 0.
  std::optional<ExponentResult> solution;
};

// Solves the exponent at rate s and runs the optimizer's row for the true
// hypothesis over a demand trace. At s = 0 the only feasible policy is the
// identity, so supply follows demand.
inline SupplyTrace ApplyToTrace(const DemandModel& model, double s,
                                std::span<const double> demand, ExponentKind kind,
                                Hypothesis truth, std::uint64_t seed,
                                const SolverOptions& opts = {}) {
  internal::Require(std::isfinite(s) && s >= 0.0, "renewable rate must be nonnegative");
  SupplyTrace out;
  out.budget = s;
  out.demand.assign(demand.begin(), demand.end());
  if (s == 0.0) {
    (void)internal::ToIndices(model.alphabet(), demand);
    out.supply = out.demand;
  } else {
    const ConstraintSet cons = BuildEnergyConstraint(model, s);
    ExponentResult r = kind == ExponentKind::kPhi ? SolvePhi(model.source(), cons, opts)
                                                  : SolveNu(model.source(), cons, opts);
    out.supply = MemorylessPolicyApply(r.policy, truth, demand, seed);
    out.solution = std::move(r);
  }
  out.renewable.resize(out.demand.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < out.demand.size(); ++i) {
    out.renewable[i] = out.demand[i] - out.supply[i];
    if (out.renewable[i] < 0.0) out.supply_above_demand = true;
    sum += out.renewable[i];
    sum_sq += out.renewable[i] * out.renewable[i];
  }
  const double n = static_cast<double>(out.demand.size());
  if (n > 0) {
    out.average_renewable = sum / n;
    const double var =
        n > 1 ? std::max(0.0, (sum_sq - n * out.average_renewable * out.average_renewable) / (n - 1))
              : 0.0;
    out.renewable_std_error = std::sqrt(var / n);
  }
  out.within_budget = out.average_renewable - 3.0 * out.renewable_std_error <= s;
  return out;
}

}  // namespace privexp

#endif  // PRIVEXP_SMARTMETER_HPP_
