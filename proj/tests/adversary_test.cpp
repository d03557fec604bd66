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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "privexp/adversary.hpp"
#include "test_util.hpp"

namespace privexp {
namespace {

using testing::TwoPoint;

// Joint pmfs of n i.i.d. slots, sequences in lexicographic order.
std::vector<double> ProductJoint(const std::vector<double>& p, int n) {
  std::vector<double> out{1.0};
  for (int i = 0; i < n; ++i) {
    std::vector<double> next;
    next.reserve(out.size() * p.size());
    for (double a : out) {
      for (double b : p) next.push_back(a * b);
    }
    out = std::move(next);
  }
  return out;
}

// Naive randomized Neyman-Pearson: sort sequences by likelihood ratio with
// exact cross-multiplied comparisons, merge exact ties, fill to 1 - eps.
double NaiveNpBeta(const std::vector<double>& j0, const std::vector<double>& j1, double eps) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < j0.size(); ++i) {
    if (j0[i] > 0.0 || j1[i] > 0.0) idx.push_back(i);
  }
  auto greater = [&](std::size_t a, std::size_t b) { return j0[a] * j1[b] > j0[b] * j1[a]; };
  std::stable_sort(idx.begin(), idx.end(), greater);
  const double need = 1.0 - eps;
  double covered = 0.0, beta = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t k = i;
    double m0 = 0.0, m1 = 0.0;
    while (k < idx.size() && !greater(idx[i], idx[k])) {
      m0 += j0[idx[k]];
      m1 += j1[idx[k]];
      ++k;
    }
    if (m0 <= 0.0) break;
    if (covered + m0 >= need) {
      beta += (need - covered) / m0 * m1;
      return beta;
    }
    covered += m0;
    beta += m1;
    i = k;
  }
  return beta;
}

double NaiveBayes(const std::vector<double>& j0, const std::vector<double>& j1, double p0) {
  double a = 0.0;
  for (std::size_t i = 0; i < j0.size(); ++i) a += std::min(p0 * j0[i], (1.0 - p0) * j1[i]);
  return a;
}

std::vector<double> RandomVec(std::mt19937_64& rng, std::size_t m, bool allow_zero) {
  auto v = testing::RandomSimplex(rng, m, 0.01);
  if (allow_zero && m > 2 && rng() % 3 == 0) {
    v[rng() % m] = 0.0;
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (auto& x : v) x /= s;
  }
  return v;
}

TEST(NpExact, MatchesNaiveEnumerationOnSmallInstances) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int c = 0; c < 50; ++c) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const std::size_t m = 2 + rng() % 2;
    const auto p = RandomVec(rng, m, true), q = RandomVec(rng, m, true);
    const double eps = u(rng);
    const Alphabet a = testing::Range(m);
    TestSpec spec = TestSpec::Iid(Pmf(a, p), Pmf(a, q), n);
    const TestResult r = NpExact(spec.NeymanPearson(eps));
    const double ref = NaiveNpBeta(ProductJoint(p, n), ProductJoint(q, n), eps);
    EXPECT_NEAR(r.type2, ref, 1e-12) << "case " << c;
    EXPECT_LE(r.type1, eps + 1e-12);
    // The joint path agrees with the type-class path.
    TestSpec joint = TestSpec::Joint(a, n, ProductJoint(p, n), ProductJoint(q, n));
    EXPECT_NEAR(NpExact(joint.NeymanPearson(eps)).type2, ref, 1e-12);
  }
}

TEST(NpExact, ThreeSlotBernoulliExample) {
  const std::vector<double> p{0.75, 0.25}, q{0.2, 0.8};
  TestSpec spec = TestSpec::Iid(TwoPoint(0.75), TwoPoint(0.2), 3);
  const TestResult r = NpExact(spec.NeymanPearson(0.1));
  EXPECT_NEAR(r.type2, NaiveNpBeta(ProductJoint(p, 3), ProductJoint(q, 3), 0.1), 1e-12);
  EXPECT_NEAR(r.type1, 0.1, 1e-12);
  EXPECT_GE(r.randomization, 0.0);
  EXPECT_LE(r.randomization, 1.0);
  EXPECT_DOUBLE_EQ(r.region.decide_h0 + r.region.decide_h1 + r.region.randomized, 8.0);
}

TEST(NpExact, IdenticalHypothesesGiveOneMinusEpsilon) {
  for (double eps : {0.05, 0.3, 0.9}) {
    TestSpec spec = TestSpec::Iid(TwoPoint(0.4), TwoPoint(0.4), 5);
    EXPECT_NEAR(NpExact(spec.NeymanPearson(eps)).type2, 1.0 - eps, 1e-12);
  }
}

TEST(NpExact, EpsilonNearOneDrivesBetaToZero) {
  TestSpec spec = TestSpec::Iid(TwoPoint(0.9), TwoPoint(0.1), 10);
  EXPECT_LE(NpExact(spec.NeymanPearson(1.0 - 1e-9)).type2, 1e-6);
}

TEST(NpExact, BetaIsNonIncreasingInEpsilonAndHorizon) {
  const Pmf p = TwoPoint(0.75), q = TwoPoint(0.2);
  double prev = INFINITY;
  for (int k = 1; k < 20; ++k) {
    TestSpec spec = TestSpec::Iid(p, q, 8);
    const double b = NpExact(spec.NeymanPearson(k / 20.0)).type2;
    EXPECT_LE(b, prev + 1e-15);
    prev = b;
  }
  prev = INFINITY;
  for (int n = 1; n <= 60; ++n) {
    TestSpec spec = TestSpec::Iid(p, q, n);
    const double b = NpExact(spec.NeymanPearson(0.2)).type2;
    EXPECT_LE(b, prev * (1 + 1e-12)) << "n=" << n;
    prev = b;
  }
}

TEST(NpExact, BeatsRandomDeterministicRegions) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.05, 0.6);
  for (int c = 0; c < 50; ++c) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const std::size_t m = 2 + rng() % 2;
    const auto p = RandomVec(rng, m, false), q = RandomVec(rng, m, false);
    const auto j0 = ProductJoint(p, n), j1 = ProductJoint(q, n);
    const double eps = u(rng);
    TestSpec spec = TestSpec::Iid(Pmf(testing::Range(m), p), Pmf(testing::Range(m), q), n);
    const double beta = NpExact(spec.NeymanPearson(eps)).type2;
    for (int t = 0; t < 1000; ++t) {
      double t1 = 0.0, b = 0.0;
      for (std::size_t i = 0; i < j0.size(); ++i) {
        if (rng() % 2) {
          b += j1[i];
        } else {
          t1 += j0[i];
        }
      }
      if (t1 > eps) continue;
      EXPECT_LE(beta, b + 1e-12);
    }
  }
}

TEST(NpExact, RejectsWrongModeAndBadEpsilon) {
  TestSpec spec = TestSpec::Iid(TwoPoint(0.75), TwoPoint(0.2), 3);
  EXPECT_THROW(NpExact(spec), InvalidInput);
  EXPECT_THROW(spec.NeymanPearson(1.0), InvalidInput);
  EXPECT_THROW(spec.NeymanPearson(0.0), InvalidInput);
}

TEST(NpThresholdTest, SingleSlotByHand) {
  // log LR: outcome 0 -> log(3.75), outcome 1 -> log(0.3125).
  // Cut = D - 0.01 = 0.690529; only outcome 0 clears it.
  TestSpec spec = TestSpec::Iid(TwoPoint(0.75), TwoPoint(0.2), 1);
  const TestResult r = NpThresholdTest(spec, 0.01);
  const double d = 0.75 * std::log(3.75) + 0.25 * std::log(0.3125);
  EXPECT_NEAR(r.threshold, d - 0.01, 1e-15);
  EXPECT_NEAR(r.type1, 0.25, 1e-15);
  EXPECT_NEAR(r.type2, 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(r.region.decide_h0, 1.0);
  ASSERT_TRUE(r.bound_holds.has_value());
  EXPECT_TRUE(*r.bound_holds);
  EXPECT_NEAR(*r.log_type2_bound, -(d - 0.01), 1e-15);
}

TEST(NpThresholdTest, IdenticalHypothesesAcceptEverything) {
  TestSpec spec = TestSpec::Iid(TwoPoint(0.3), TwoPoint(0.3), 4);
  const TestResult r = NpThresholdTest(spec, 0.5);
  EXPECT_NEAR(r.type2, 1.0, 1e-12);
  EXPECT_NEAR(r.type1, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.region.decide_h0, 16.0);
  EXPECT_TRUE(*r.bound_holds);
}

TEST(NpThresholdTest, BoundHoldsOnRandomInstances) {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (int c = 0; c < 100; ++c) {
    const std::size_t m = 2 + rng() % 3;
    const int n = 1 + static_cast<int>(rng() % 30);
    const Alphabet a = testing::Range(m);
    TestSpec spec = TestSpec::Iid(Pmf(a, RandomVec(rng, m, false)),
                                  Pmf(a, RandomVec(rng, m, false)), n);
    const TestResult r = NpThresholdTest(spec, u(rng));
    EXPECT_TRUE(*r.bound_holds) << "case " << c;
    EXPECT_LE(r.log_type2, *r.log_type2_bound);
  }
}

TEST(BayesExact, SingleSlotHandValue) {
  TestSpec spec = TestSpec::Iid(TwoPoint(0.75), TwoPoint(0.2), 1);
  EXPECT_NEAR(BayesExact(spec, 0.5, 0.5).bayes_error, 0.225, 1e-15);
}

TEST(BayesExact, IdenticalHypothesesGiveHalf) {
  TestSpec spec = TestSpec::Iid(TwoPoint(0.3), TwoPoint(0.3), 6);
  const TestResult r = BayesExact(spec, 0.5, 0.5);
  EXPECT_NEAR(r.bayes_error, 0.5, 1e-12);
  // Ties go to h0.
  EXPECT_NEAR(r.type2, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.region.decide_h1, 0.0);
}

TEST(BayesExact, PropertiesOnRandomInstances) {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int c = 0; c < 100; ++c) {
    const std::size_t m = 2 + rng() % 3;
    const int n = 1 + static_cast<int>(rng() % 6);
    const auto p = RandomVec(rng, m, true), q = RandomVec(rng, m, true);
    const double p0 = u(rng);
    const Alphabet a = testing::Range(m);
    const TestResult r = BayesExact(TestSpec::Iid(Pmf(a, p), Pmf(a, q), n), p0, 1.0 - p0);
    const auto j0 = ProductJoint(p, n), j1 = ProductJoint(q, n);
    EXPECT_NEAR(r.bayes_error, NaiveBayes(j0, j1, p0), 1e-12);
    EXPECT_LE(r.bayes_error, std::min(p0, 1.0 - p0) + 1e-15);
    // Bhattacharyya bound at equal priors.
    const TestResult half = BayesExact(TestSpec::Iid(Pmf(a, p), Pmf(a, q), n), 0.5, 0.5);
    double bc = 0.0;
    for (std::size_t i = 0; i < j0.size(); ++i) bc += std::sqrt(j0[i] * j1[i]);
    EXPECT_LE(half.bayes_error, 0.5 * bc + 1e-15);
    // Relabeling the alphabet changes nothing.
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pp(m), qq(m);
    for (std::size_t i = 0; i < m; ++i) {
      pp[i] = p[perm[i]];
      qq[i] = q[perm[i]];
    }
    const TestResult rp = BayesExact(TestSpec::Iid(Pmf(a, pp), Pmf(a, qq), n), p0, 1.0 - p0);
    EXPECT_NEAR(rp.bayes_error, r.bayes_error, 1e-13);
  }
}

TEST(BayesExact, ZeroOnlyForDisjointSupports) {
  const Alphabet a = testing::Range(3);
  const TestResult d = BayesExact(
      TestSpec::Iid(Pmf(a, {0.5, 0.5, 0.0}), Pmf(a, {0.0, 0.0, 1.0}), 3), 0.5, 0.5);
  EXPECT_EQ(d.bayes_error, 0.0);
  const TestResult o = BayesExact(
      TestSpec::Iid(Pmf(a, {0.5, 0.5, 0.0}), Pmf(a, {0.0, 0.01, 0.99}), 3), 0.5, 0.5);
  EXPECT_GT(o.bayes_error, 0.0);
}

TEST(BayesExact, TypeClassPathMatchesNaiveUpToTenSlots) {
  const std::vector<double> p{0.75, 0.25}, q{0.2, 0.8};
  for (int n = 1; n <= 10; ++n) {
    const auto j0 = ProductJoint(p, n), j1 = ProductJoint(q, n);
    const TestResult iid = BayesExact(TestSpec::Iid(TwoPoint(0.75), TwoPoint(0.2), n), 0.5, 0.5);
    const TestResult joint =
        BayesExact(TestSpec::Joint(testing::Range(2), n, j0, j1), 0.5, 0.5);
    const double ref = NaiveBayes(j0, j1, 0.5);
    EXPECT_NEAR(iid.bayes_error, ref, 1e-12) << "n=" << n;
    EXPECT_NEAR(joint.bayes_error, ref, 1e-12) << "n=" << n;
  }
}

TEST(BayesExact, RejectsBadPriors) {
  TestSpec spec = TestSpec::Iid(TwoPoint(0.75), TwoPoint(0.2), 1);
  EXPECT_THROW(BayesExact(spec, 0.0, 1.0), InvalidInput);
  EXPECT_THROW(BayesExact(spec, 0.6, 0.6), InvalidInput);
}

TEST(ResourceCap, OversizedEnumerationsThrow) {
  const Alphabet a = testing::Range(10);
  const Pmf u(a, std::vector<double>(10, 0.1));
  EXPECT_THROW(BayesExact(TestSpec::Iid(u, u, 100), 0.5, 0.5), ResourceCapExceeded);
  EXPECT_THROW(TestSpec::Joint(testing::Range(2), 30, {}, {}), ResourceCapExceeded);
  // Binary alphabets reach long horizons.
  EXPECT_NO_THROW(BayesExact(TestSpec::Iid(TwoPoint(0.75), TwoPoint(0.2), 500), 0.5, 0.5));
}

TEST(ExponentTrend, IdenticalMarginalsGiveVanishingExponent) {
  TrendOptions opts;
  opts.mode = TestMode::kNeymanPearson;
  opts.epsilon = 0.9;
  const auto rows = ExponentTrend(TwoPoint(0.4), TwoPoint(0.4), {10, 100, 1000}, opts);
  for (const auto& r : rows) EXPECT_NEAR(r.exponent, -std::log(0.1) / r.n, 1e-12);
}

TEST(ExponentTrend, BayesGapShrinksTowardChernoff) {
  const Pmf p = TwoPoint(0.75), q = TwoPoint(0.2);
  const double c = testing::RefChernoff(testing::Vec(p.probs()), testing::Vec(q.probs()));
  const auto rows = ExponentTrend(p, q, {10, 50, 100, 250, 500});
  EXPECT_LT(std::abs(rows.back().exponent - c), std::abs(rows.front().exponent - c));
  EXPECT_LT(std::abs(rows.back().exponent - c), 0.02);
}

TEST(ExponentTrend, ThreadCountDoesNotChangeRows) {
  const std::vector<int> ns{5, 17, 40, 90, 200, 333};
  TrendOptions one, four;
  four.threads = 4;
  for (auto mode : {TestMode::kBayes, TestMode::kNeymanPearson}) {
    one.mode = four.mode = mode;
    const auto a = ExponentTrend(TwoPoint(0.6), TwoPoint(0.3), ns, one);
    const auto b = ExponentTrend(TwoPoint(0.6), TwoPoint(0.3), ns, four);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].n, b[i].n);
      EXPECT_EQ(a[i].error, b[i].error);
    }
  }
}

}  // namespace
}  // namespace privexp
