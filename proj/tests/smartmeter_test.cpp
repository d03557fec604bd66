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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "privexp/serialization.hpp"
#include "privexp/smartmeter.hpp"
#include "test_util.hpp"

namespace privexp {
namespace {

double TotalVariationRef(const Pmf& p, const Pmf& q) {
  double t = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) t += std::abs(p[i] - q[i]);
  return 0.5 * t;
}

double Mean(const Pmf& p) {
  double m = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) m += p[i] * p.alphabet()[i];
  return m;
}

TEST(DemandModel, RejectsNegativeWatts) {
  const Alphabet a({-1.0, 2.0});
  EXPECT_THROW(DemandModel("bad", Pmf(a, {0.5, 0.5}), Pmf(a, {0.5, 0.5})), InvalidInput);
}

TEST(DemandModel, DishwasherCarriesItsLabels) {
  const DemandModel m = DishwasherModel();
  EXPECT_EQ(m.label(Hypothesis::kH0), "type A");
  EXPECT_EQ(m.label(Hypothesis::kH1), "type B");
  EXPECT_EQ(m.alphabet().size(), 4u);
}

TEST(BuildEnergyConstraint, BinaryAllowedPairsAndCosts) {
  const ConstraintSet c = BuildEnergyConstraint(BinaryDemandModel(0.75, 0.2), 0.5);
  const DistortionSpec& d = c.distortion();
  EXPECT_TRUE(d.mask().allowed(0, 0));
  EXPECT_FALSE(d.mask().allowed(0, 1));
  EXPECT_TRUE(d.mask().allowed(1, 0));
  EXPECT_TRUE(d.mask().allowed(1, 1));
  EXPECT_EQ(d.d(0, 0), 0.0);
  EXPECT_EQ(d.d(1, 0), 2.0);
  EXPECT_EQ(d.d(1, 1), 0.0);
  EXPECT_EQ(c.s_bar(), 0.5);
  EXPECT_EQ(c.s_tilde(), 0.5);
  EXPECT_THROW(BuildEnergyConstraint(BinaryDemandModel(0.75, 0.2), 0.0), InvalidInput);
}

TEST(BuildEnergyConstraint, DishwasherHasTenAllowedPairs) {
  const ConstraintSet c = BuildEnergyConstraint(DishwasherModel(), 100.0);
  const DistortionSpec& d = c.distortion();
  int allowed = 0;
  for (std::size_t x = 0; x < 4; ++x) {
    for (std::size_t y = 0; y < 4; ++y) {
      if (d.mask().allowed(x, y)) {
        ++allowed;
        EXPECT_GE(d.d(x, y), 0.0);
        EXPECT_EQ(d.d(x, y), d.x_alphabet()[x] - d.y_alphabet()[y]);
      }
    }
  }
  EXPECT_EQ(allowed, 10);
}

TEST(SmartMeterExponents, RateAboveMeanDemandGivesZero) {
  const DemandModel m = DishwasherModel();
  const double s = std::max(Mean(m.source().p_x_h0()), Mean(m.source().p_x_h1())) + 1.0;
  const auto sweeps = SmartMeterExponents(m, {s, 4000.0});
  for (const auto& row : sweeps.phi.rows) EXPECT_NEAR(row.value, 0.0, 1e-9);
  for (const auto& row : sweeps.nu.rows) EXPECT_NEAR(row.value, 0.0, 1e-9);
}

TEST(SmartMeterExponents, SmallRateApproachesSourceDivergence) {
  const DemandModel m = BinaryDemandModel(0.75, 0.2);
  const auto sweeps = SmartMeterExponents(m, {1e-6, 0.25, 0.5, 1.0});
  EXPECT_NEAR(sweeps.phi.rows[0].value, 0.700529, 1e-3);
  EXPECT_TRUE(sweeps.phi.monotone_non_increasing);
  EXPECT_TRUE(sweeps.nu.monotone_non_increasing);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_LE(sweeps.nu.rows[i].value, sweeps.phi.rows[i].value + 1e-8);
  }
}

TEST(SmartMeterExponents, OppositeSettingsHaveEqualChernoffCurves) {
  const std::vector<double> grid{0.1, 0.3, 0.6, 0.9};
  const auto a = SmartMeterExponents(BinaryDemandModel(0.8, 0.2), grid);
  const auto b = SmartMeterExponents(BinaryDemandModel(0.2, 0.8), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(a.nu.rows[i].value, b.nu.rows[i].value, 1e-5) << "s=" << grid[i];
  }
}

TEST(SmartMeterExponents, EnlargedSupplyAlphabetQuantizesBack) {
  const DemandModel m = DishwasherModel();
  const Alphabet wide({0.0, 100.0, 200.0, 350.0, 500.0, 850.0, 1200.0});
  const DistortionSpec wide_dist = DistortionSpec::SupplyBelowDemand(m.alphabet(), wide);
  for (double s : {150.0, 350.0}) {
    const ConstraintSet narrow = BuildEnergyConstraint(m, s);
    const ConstraintSet enlarged(wide_dist, s, s);
    const ExponentResult base = SolvePhi(m.source(), narrow);
    const ExponentResult big = SolvePhi(m.source(), enlarged);
    EXPECT_NEAR(big.value, base.value, 1e-5) << "s=" << s;
    const PolicyPair q = QuantizeToDemandAlphabet(big.policy, m.alphabet());
    for (auto h : {Hypothesis::kH0, Hypothesis::kH1}) {
      EXPECT_LE(narrow.distortion().Expected(m.source()[h], q[h]), s + 1e-6);
    }
    const double kl = Kl(Marginal(m.source().p_x_h0(), q.h0()),
                         Marginal(m.source().p_x_h1(), q.h1()));
    EXPECT_NEAR(kl, base.value, 1e-5);
  }
}

TEST(ApplyToTrace, ZeroRateSupplyFollowsDemand) {
  const DemandModel m = DishwasherModel();
  const auto demand = SampleSequence(m.source().p_x_h0(), 2000, 8);
  const SupplyTrace t = ApplyToTrace(m, 0.0, demand, ExponentKind::kPhi, Hypothesis::kH0, 1);
  EXPECT_EQ(t.supply, demand);
  EXPECT_EQ(t.average_renewable, 0.0);
  EXPECT_TRUE(t.within_budget);
  EXPECT_FALSE(t.solution.has_value());
  const std::vector<double> bad{0.0, 300.0};
  EXPECT_THROW(ApplyToTrace(m, 0.0, bad, ExponentKind::kPhi, Hypothesis::kH0, 1), InvalidInput);
}

TEST(ApplyToTrace, LargeRateSuppliesMostlyTheSmallestDemand) {
  const DemandModel m = DishwasherModel();
  for (auto h : {Hypothesis::kH0, Hypothesis::kH1}) {
    const auto demand = SampleSequence(m.source()[h], 5000, 9 + Index(h));
    const SupplyTrace t = ApplyToTrace(m, 4000.0, demand, ExponentKind::kNu, h, 2);
    double zeros = 0.0;
    for (double y : t.supply) zeros += y == 0.0 ? 1.0 : 0.0;
    EXPECT_GE(zeros / 5000.0, 0.9);
    EXPECT_FALSE(t.supply_above_demand);
  }
}

TEST(ApplyToTrace, RenewableUseStaysWithinBudgetAndSupplyBelowDemand) {
  const DemandModel m = DishwasherModel();
  for (auto kind : {ExponentKind::kPhi, ExponentKind::kNu}) {
    for (auto h : {Hypothesis::kH0, Hypothesis::kH1}) {
      const auto demand = SampleSequence(m.source()[h], 20000, 40 + Index(h));
      const SupplyTrace t = ApplyToTrace(m, 250.0, demand, kind, h, 41);
      EXPECT_TRUE(t.within_budget) << t.average_renewable << " +- " << t.renewable_std_error;
      EXPECT_FALSE(t.supply_above_demand);
      for (std::size_t i = 0; i < demand.size(); ++i) {
        EXPECT_LE(t.supply[i], t.demand[i]);
        EXPECT_EQ(t.renewable[i], t.demand[i] - t.supply[i]);
      }
    }
  }
}

TEST(ApplyToTrace, HighRateMarginalsAreCloserInTotalVariation) {
  const DemandModel m = DishwasherModel();
  const double tv0 = TotalVariationRef(m.source().p_x_h0(), m.source().p_x_h1());
  for (auto kind : {ExponentKind::kPhi, ExponentKind::kNu}) {
    const std::vector<double> demand{0.0, 200.0};
    const SupplyTrace t = ApplyToTrace(m, 4000.0, demand, kind, Hypothesis::kH0, 1);
    ASSERT_TRUE(t.solution.has_value());
    EXPECT_LT(TotalVariationRef(t.solution->marginal_h0, t.solution->marginal_h1), tv0);
  }
}

TEST(Fixtures, DishwasherFileMatchesBuiltInModel) {
  const auto file = io::LoadModelFile(std::string(PRIVEXP_FIXTURE_DIR) + "/table1_dishwasher.json");
  const DemandModel m = DishwasherModel();
  EXPECT_EQ(file.model.name(), "dishwasher");
  EXPECT_EQ(file.model.alphabet(), m.alphabet());
  EXPECT_EQ(file.model.source().p_x_h0(), m.source().p_x_h0());
  EXPECT_EQ(file.model.source().p_x_h1(), m.source().p_x_h1());
  EXPECT_EQ(file.model.label(Hypothesis::kH0), "type A");
  EXPECT_EQ(file.model.label(Hypothesis::kH1), "type B");
}

}  // namespace
}  // namespace privexp
