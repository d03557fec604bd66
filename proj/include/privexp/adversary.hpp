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

// Exact finite-horizon adversary oracles.
//
// Observations over n slots are either i.i.d. draws from a per-slot pmf
// pair, handled by enumerating type classes, or an explicit joint pmf pair
// over all |Y|^n sequences. Probabilities are carried in the log domain so
// that horizons of several hundred slots do not underflow.

#ifndef PRIVEXP_ADVERSARY_HPP_
#define PRIVEXP_ADVERSARY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "privexp/distributions.hpp"
#include "privexp/error.hpp"

namespace privexp {

// Largest number of outcome classes (type classes or explicit sequences)
// an oracle will enumerate.
inline constexpr double kMaxOutcomeClasses = 1e7;

enum class TestMode { kNeymanPearson, kBayes };

// Observation model for an n-slot test, plus the test mode.
class TestSpec {
 public:
  // n i.i.d. slots with per-slot pmfs h0 and h1.
  static TestSpec Iid(Pmf h0, Pmf h1, int n) {
    internal::Require(n >= 1, "horizon must be at least one slot");
    internal::Require(h0.alphabet() == h1.alphabet(),
                      "per-slot pmfs must share an alphabet");
    TestSpec spec;
    spec.n_ = n;
    spec.alphabet_ = h0.alphabet();
    spec.slot_ = {std::move(h0), std::move(h1)};
    return spec;
  }

  // Explicit joint pmfs over y^n, sequences in lexicographic order with the
  // first slot most significant.
  static TestSpec Joint(Alphabet y_alphabet, int n, std::vector<double> h0,
                        std::vector<double> h1) {
    internal::Require(n >= 1, "horizon must be at least one slot");
    const double size = std::pow(static_cast<double>(y_alphabet.size()), n);
    if (size > kMaxOutcomeClasses) {
      throw ResourceCapExceeded("explicit joint pmf needs " + std::to_string(size) +
                                " entries, above the cap of 1e7");
    }
    internal::Require(h0.size() == static_cast<std::size_t>(size) &&
                          h1.size() == static_cast<std::size_t>(size),
                      "joint pmfs must have |Y|^n entries");
    for (const auto* v : {&h0, &h1}) {
      double sum = 0.0;
      for (double p : *v) {
        internal::Require(std::isfinite(p) && p >= 0.0 && p <= 1.0,
                          "joint probabilities must lie in [0,1]");
        sum += p;
      }
      internal::Require(std::abs(sum - 1.0) <= 1e-12 * static_cast<double>(v->size()) + 1e-12,
                        "joint pmf must sum to one");
    }
    TestSpec spec;
    spec.n_ = n;
    spec.alphabet_ = std::move(y_alphabet);
    spec.joint_ = {std::move(h0), std::move(h1)};
    return spec;
  }

  // Switches to Neyman-Pearson mode with type-I budget epsilon.
  TestSpec& NeymanPearson(double epsilon) {
    internal::Require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0,1)");
    mode_ = TestMode::kNeymanPearson;
    epsilon_ = epsilon;
    return *this;
  }
  TestSpec& Bayes() {
    mode_ = TestMode::kBayes;
    epsilon_.reset();
    return *this;
  }

  TestMode mode() const { return mode_; }
  std::optional<double> epsilon() const { return epsilon_; }
  int n() const { return n_; }
  const Alphabet& y_alphabet() const { return alphabet_; }
  bool is_iid() const { return slot_.has_value(); }
  const Pmf& slot_pmf(Hypothesis h) const { return (*slot_)[Index(h)]; }
  const std::vector<double>& joint_pmf(Hypothesis h) const { return (*joint_)[Index(h)]; }

 private:
  TestSpec() = default;

  int n_ = 1;
  TestMode mode_ = TestMode::kBayes;
  std::optional<double> epsilon_;
  Alphabet alphabet_;
  std::optional<std::array<Pmf, 2>> slot_;
  std::optional<std::array<std::vector<double>, 2>> joint_;
};

struct RegionSummary {
  // Number of sequences (not classes) in each part of the decision rule.
  double decide_h0 = 0.0;
  double decide_h1 = 0.0;
  double randomized = 0.0;
};

struct TestResult {
  TestMode mode = TestMode::kNeymanPearson;
  // P(decide h1 | h0).
  double type1 = 0.0;
  // P(decide h0 | h1), with its natural log for exponent work.
  double type2 = 0.0;
  double log_type2 = 0.0;
  // Bayes mode only.
  double bayes_error = 0.0;
  double log_bayes_error = 0.0;
  // Log-likelihood-ratio threshold log(p_h0 / p_h1) of the decision rule.
  double threshold = 0.0;
  // Probability of deciding h0 on the boundary (NP mode).
  double randomization = 0.0;
  RegionSummary region;
  // Threshold test only: the guarantee type2 <= exp(-n t(n)).
  std::optional<double> log_type2_bound;
  std::optional<bool> bound_holds;
};

namespace internal {

// A set of sequences sharing one probability under each hypothesis.
struct OutcomeClass {
  double log_count = 0.0;
  double log_p0 = -kInf;
  double log_p1 = -kInf;

  double log_lr() const {
    if (log_p0 == -kInf && log_p1 == -kInf) return std::numeric_limits<double>::quiet_NaN();
    if (log_p1 == -kInf) return kInf;
    if (log_p0 == -kInf) return -kInf;
    return log_p0 - log_p1;
  }
  double mass0() const { return std::exp(log_count + log_p0); }
  double mass1() const { return std::exp(log_count + log_p1); }
};

inline double LogAdd(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

inline double SafeLog(double p) { return p > 0.0 ? std::log(p) : -kInf; }

inline double LogBinomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline std::vector<OutcomeClass> TypeClasses(const Pmf& h0, const Pmf& h1, int n) {
  const std::size_t m = h0.size();
  const double classes =
      std::exp(LogBinomial(static_cast<double>(n + m - 1), static_cast<double>(m - 1)));
  if (classes > kMaxOutcomeClasses * (1.0 + 1e-9)) {
    throw ResourceCapExceeded("type-class enumeration needs about " +
                              std::to_string(classes) + " classes, above the cap of 1e7");
  }
  std::vector<double> l0(m), l1(m);
  for (std::size_t y = 0; y < m; ++y) {
    l0[y] = SafeLog(h0[y]);
    l1[y] = SafeLog(h1[y]);
  }
  const double log_n_fact = std::lgamma(n + 1.0);
  std::vector<OutcomeClass> out;
  out.reserve(static_cast<std::size_t>(classes + 0.5));
  std::vector<int> k(m, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t y, int left) {
    if (y + 1 == m) {
      k[y] = left;
      OutcomeClass c;
      c.log_count = log_n_fact;
      double p0 = 0.0;
      double p1 = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        c.log_count -= std::lgamma(k[i] + 1.0);
        if (k[i] == 0) continue;
        p0 += k[i] * l0[i];
        p1 += k[i] * l1[i];
      }
      c.log_p0 = p0;
      c.log_p1 = p1;
      out.push_back(c);
      return;
    }
    for (int c = left; c >= 0; --c) {
      k[y] = c;
      rec(y + 1, left - c);
    }
  };
  rec(0, n);
  return out;
}

inline std::vector<OutcomeClass> Classes(const TestSpec& spec) {
  if (spec.is_iid()) {
    return TypeClasses(spec.slot_pmf(Hypothesis::kH0), spec.slot_pmf(Hypothesis::kH1),
                       spec.n());
  }
  const auto& j0 = spec.joint_pmf(Hypothesis::kH0);
  const auto& j1 = spec.joint_pmf(Hypothesis::kH1);
  std::vector<OutcomeClass> out(j0.size());
  for (std::size_t i = 0; i < j0.size(); ++i) {
    out[i].log_count = 0.0;
    out[i].log_p0 = SafeLog(j0[i]);
    out[i].log_p1 = SafeLog(j1[i]);
  }
  return out;
}

// Classes grouped by equal likelihood ratio, sorted by ratio descending.
// Classes with zero probability under both hypotheses are dropped.
struct RatioGroup {
  double log_lr = 0.0;
  double mass0 = 0.0;
  double log_mass1 = -kInf;
  double count = 0.0;
};

inline std::vector<RatioGroup> GroupByRatio(std::vector<OutcomeClass> classes) {
  std::erase_if(classes, [](const OutcomeClass& c) {
    return c.log_p0 == -kInf && c.log_p1 == -kInf;
  });
  std::sort(classes.begin(), classes.end(), [](const OutcomeClass& l, const OutcomeClass& r) {
    return l.log_lr() > r.log_lr();
  });
  std::vector<RatioGroup> groups;
  for (const OutcomeClass& c : classes) {
    const double lr = c.log_lr();
    const bool same =
        !groups.empty() &&
        (groups.back().log_lr == lr ||
         (std::isfinite(lr) && std::isfinite(groups.back().log_lr) &&
          std::abs(groups.back().log_lr - lr) <= 1e-12 * std::max(1.0, std::abs(lr))));
    if (!same) groups.push_back({lr, 0.0, -kInf, 0.0});
    RatioGroup& g = groups.back();
    g.mass0 += c.mass0();
    g.log_mass1 = LogAdd(g.log_mass1, c.log_count + c.log_p1);
    g.count += std::exp(c.log_count);
  }
  return groups;
}

}  // namespace internal

// Randomized Neyman-Pearson test: the h0 region is filled with outcomes in
// decreasing likelihood-ratio order until the type-I budget is exhausted,
// and the boundary ratio group is randomized. The returned type-II error is
// the smallest achievable by any test with type-I error at most epsilon.
inline TestResult NpExact(const TestSpec& spec) {
  internal::Require(spec.mode() == TestMode::kNeymanPearson && spec.epsilon(),
                    "Neyman-Pearson oracle needs a spec in that mode with epsilon");
  const double epsilon = *spec.epsilon();
  const auto groups = internal::GroupByRatio(internal::Classes(spec));
  TestResult r;
  r.mode = TestMode::kNeymanPearson;
  const double need = 1.0 - epsilon;
  double covered = 0.0;
  double log_beta = -kInf;
  std::size_t g = 0;
  for (; g < groups.size(); ++g) {
    const auto& grp = groups[g];
    if (grp.mass0 <= 0.0) break;
    if (covered + grp.mass0 >= need) {
      const double gamma = std::clamp((need - covered) / grp.mass0, 0.0, 1.0);
      r.randomization = gamma;
      r.threshold = grp.log_lr;
      covered += gamma * grp.mass0;
      if (gamma > 0.0) log_beta = internal::LogAdd(log_beta, std::log(gamma) + grp.log_mass1);
      if (gamma >= 1.0) {
        r.region.decide_h0 += grp.count;
      } else if (gamma > 0.0) {
        r.region.randomized += grp.count;
      } else {
        r.region.decide_h1 += grp.count;
      }
      ++g;
      break;
    }
    covered += grp.mass0;
    log_beta = internal::LogAdd(log_beta, grp.log_mass1);
    r.region.decide_h0 += grp.count;
  }
  for (; g < groups.size(); ++g) r.region.decide_h1 += groups[g].count;
  r.type1 = std::max(0.0, 1.0 - covered);
  r.log_type2 = log_beta;
  r.type2 = std::exp(log_beta);
  return r;
}

// Deterministic threshold test: decide h0 iff (1/n) log LR >= t(n) with
// t(n) = D(P0^n || P1^n)/n - delta_prime/n. Reports both errors and checks
// the guarantee type2 <= exp(-n t(n)).
inline TestResult NpThresholdTest(const TestSpec& spec, double delta_prime) {
  internal::Require(delta_prime > 0.0 && std::isfinite(delta_prime),
                    "delta_prime must be positive");
  const auto classes = internal::Classes(spec);
  // Divergence of the n-slot joint distributions.
  double divergence = 0.0;
  if (spec.is_iid()) {
    divergence = spec.n() * Kl(spec.slot_pmf(Hypothesis::kH0), spec.slot_pmf(Hypothesis::kH1));
  } else {
    divergence = info::Kl(spec.joint_pmf(Hypothesis::kH0), spec.joint_pmf(Hypothesis::kH1));
  }
  const double cut = divergence - delta_prime;  // n t(n)
  TestResult r;
  r.mode = TestMode::kNeymanPearson;
  r.threshold = cut;
  double accepted0 = 0.0;
  double log_beta = -kInf;
  for (const auto& c : classes) {
    if (c.log_p0 == -kInf && c.log_p1 == -kInf) {
      r.region.decide_h1 += std::exp(c.log_count);
      continue;
    }
    if (c.log_lr() >= cut) {
      accepted0 += c.mass0();
      log_beta = internal::LogAdd(log_beta, c.log_count + c.log_p1);
      r.region.decide_h0 += std::exp(c.log_count);
    } else {
      r.region.decide_h1 += std::exp(c.log_count);
    }
  }
  r.type1 = std::max(0.0, 1.0 - accepted0);
  r.log_type2 = log_beta;
  r.type2 = std::exp(log_beta);
  r.log_type2_bound = -cut;
  r.bound_holds = log_beta <= -cut;
  return r;
}

// Bayes likelihood-ratio test with ties decided as h0:
//   alpha = sum over sequences of min(prior0 P0, prior1 P1).
inline TestResult BayesExact(const TestSpec& spec, double prior_h0, double prior_h1) {
  internal::Require(prior_h0 > 0.0 && prior_h1 > 0.0 &&
                        std::abs(prior_h0 + prior_h1 - 1.0) <= 1e-12,
                    "priors must be positive and sum to one");
  const auto classes = internal::Classes(spec);
  const double lp0 = std::log(prior_h0);
  const double lp1 = std::log(prior_h1);
  TestResult r;
  r.mode = TestMode::kBayes;
  r.threshold = lp1 - lp0;
  double log_alpha = -kInf;
  double log_t1 = -kInf;
  double log_t2 = -kInf;
  for (const auto& c : classes) {
    const double w0 = c.log_count + c.log_p0 + lp0;
    const double w1 = c.log_count + c.log_p1 + lp1;
    if (c.log_p0 == -kInf && c.log_p1 == -kInf) {
      r.region.decide_h0 += std::exp(c.log_count);
      continue;
    }
    if (w0 >= w1) {
      log_alpha = internal::LogAdd(log_alpha, w1);
      log_t2 = internal::LogAdd(log_t2, c.log_count + c.log_p1);
      r.region.decide_h0 += std::exp(c.log_count);
    } else {
      log_alpha = internal::LogAdd(log_alpha, w0);
      log_t1 = internal::LogAdd(log_t1, c.log_count + c.log_p0);
      r.region.decide_h1 += std::exp(c.log_count);
    }
  }
  r.log_bayes_error = log_alpha;
  r.bayes_error = std::exp(log_alpha);
  r.type1 = std::exp(log_t1);
  r.log_type2 = log_t2;
  r.type2 = std::exp(log_t2);
  return r;
}

struct TrendOptions {
  TestMode mode = TestMode::kBayes;
  double epsilon = 0.99;
  double prior_h0 = 0.5;
  int threads = 1;
};

struct TrendRow {
  int n = 0;
  double error = 0.0;
  double exponent = 0.0;  // -(1/n) log error, nats
};

// Exact errors of the optimal test for i.i.d. observations at each horizon.
// Rows follow the order of n_values regardless of thread count.
inline std::vector<TrendRow> ExponentTrend(const Pmf& h0, const Pmf& h1,
                                           const std::vector<int>& n_values,
                                           const TrendOptions& opts = {}) {
  for (int n : n_values) internal::Require(n >= 1, "horizons must be positive");
  std::vector<TrendRow> rows(n_values.size());
  auto solve = [&](std::size_t i) {
    const int n = n_values[i];
    TestSpec spec = TestSpec::Iid(h0, h1, n);
    double log_err = 0.0;
    if (opts.mode == TestMode::kNeymanPearson) {
      const TestResult r = NpExact(spec.NeymanPearson(opts.epsilon));
      log_err = r.log_type2;
    } else {
      const TestResult r = BayesExact(spec, opts.prior_h0, 1.0 - opts.prior_h0);
      log_err = r.log_bayes_error;
    }
    rows[i] = {n, std::exp(log_err), -log_err / n};
  };
  if (opts.mode == TestMode::kNeymanPearson) {
    internal::Require(opts.epsilon > 0.0 && opts.epsilon < 1.0, "epsilon must lie in (0,1)");
  }
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opts.threads, 1)), 1,
                              std::max<std::size_t>(n_values.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_values.size(); ++i) solve(i);
    return rows;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n_values.size(); i += workers) solve(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace privexp

#endif  // PRIVEXP_ADVERSARY_HPP_
