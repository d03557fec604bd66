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

// Executable management policies.
//
// MemorylessPolicyApply runs a hypothesis-aware policy pair slot by slot.
// TwoPhasePolicy is the hypothesis-unaware construction: a short learning
// phase that reveals nothing (constant output), a typical-set decision on
// the observed demand, then the memoryless optimizer for the decided
// hypothesis at slightly tightened budgets.
//
// All randomness comes from std::mt19937_64. A replica's stream depends
// only on (seed, replica, hypothesis), so results do not depend on the
// thread count.

#ifndef PRIVEXP_POLICIES_HPP_
#define PRIVEXP_POLICIES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "privexp/distortion.hpp"
#include "privexp/distributions.hpp"
#include "privexp/error.hpp"
#include "privexp/exponents.hpp"

namespace privexp {

namespace internal {

// Uniform on [0, 1) from the top 53 bits; fixed across platforms, unlike
// the standard distributions.
inline double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Inverse-CDF sampler over a small finite support.
class Sampler {
 public:
  Sampler() = default;
  explicit Sampler(std::span<const double> probs) : cdf_(probs.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      cdf_[i] = acc;
    }
    // Last positive entry absorbs rounding so every u < 1 lands somewhere
    // with positive probability.
    last_ = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0.0) last_ = i;
    }
  }

  std::size_t operator()(std::mt19937_64& rng) const {
    const double u = Uniform01(rng) * cdf_.back();
    for (std::size_t i = 0; i < last_; ++i) {
      if (u < cdf_[i]) return i;
    }
    return last_;
  }

 private:
  std::vector<double> cdf_;
  std::size_t last_ = 0;
};

inline std::vector<Sampler> RowSamplers(const ConditionalPmf& cond) {
  std::vector<Sampler> rows;
  rows.reserve(cond.x_alphabet().size());
  for (std::size_t x = 0; x < cond.x_alphabet().size(); ++x) rows.emplace_back(cond.row(x));
  return rows;
}

inline std::vector<std::size_t> ToIndices(const Alphabet& alphabet,
                                          std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto k = alphabet.IndexOf(values[i]);
    if (!k) {
      throw InvalidInput("symbol " + std::to_string(values[i]) + " at position " +
                         std::to_string(i) + " is not in the alphabet");
    }
    idx[i] = *k;
  }
  return idx;
}

inline std::mt19937_64 ReplicaEngine(std::uint64_t seed, std::uint64_t replica,
                                     std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica),
                    static_cast<std::uint32_t>(replica >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

}  // namespace internal

// n i.i.d. draws from p.
inline std::vector<double> SampleSequence(const Pmf& p, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const internal::Sampler draw(p.probs());
  std::vector<double> out(n);
  for (auto& v : out) v = p.alphabet()[draw(rng)];
  return out;
}

// Each y_i is drawn independently from the row of the h-policy at x_i.
inline std::vector<double> MemorylessPolicyApply(const PolicyPair& policy, Hypothesis h,
                                                 std::span<const double> x_seq,
                                                 std::uint64_t seed) {
  const ConditionalPmf& cond = policy[h];
  const auto xs = internal::ToIndices(cond.x_alphabet(), x_seq);
  const auto rows = internal::RowSamplers(cond);
  std::mt19937_64 rng(seed);
  std::vector<double> y(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) y[i] = cond.y_alphabet()[rows[xs[i]](rng)];
  return y;
}

namespace internal {

inline Hypothesis TypicalSetByIndex(std::span<const std::size_t> xs, const SourceModel& source,
                                   double divergence, double xi) {
  double sum = 0.0;
  for (std::size_t x : xs) {
    const double p0 = source.p_x_h0()[x];
    const double p1 = source.p_x_h1()[x];
    if (p0 == 0.0) return Hypothesis::kH1;
    // p1 = 0 with p0 > 0 is excluded by the finite divergence.
    sum += std::log(p0) - std::log(p1);
  }
  const double avg = sum / static_cast<double>(xs.size());
  return std::abs(avg - divergence) <= xi ? Hypothesis::kH0 : Hypothesis::kH1;
}

}  // namespace internal

// Relative-entropy typical-set test: h0 iff the per-slot log-likelihood
// ratio of x_learn is within xi of D(p_X|h0 || p_X|h1). A sequence that is
// impossible under h0 decides h1 immediately.
inline Hypothesis TypicalSetDecision(std::span<const double> x_learn,
                                     const SourceModel& source, double xi) {
  internal::Require(!x_learn.empty(), "learning sequence must be nonempty");
  internal::Require(xi > 0.0 && std::isfinite(xi), "xi must be positive");
  const double divergence = source.Divergence();
  internal::Require(std::isfinite(divergence), "learning needs a finite source divergence");
  const auto xs = internal::ToIndices(source.x_alphabet(), x_learn);
  return internal::TypicalSetByIndex(xs, source, divergence, xi);
}

enum class TwoPhaseVariant {
  // Phase 2 uses the divergence optimizer (Neyman-Pearson adversary).
  kNpRhoP,
  // Phase 2 uses the Chernoff optimizer (Bayesian adversary).
  kBayesRhoQ,
};

struct TwoPhaseConfig {
  std::size_t n = 0;
  double delta = 0.0;
  double omega = 0.0;
  // Bayes variant: width of the typical-set band.
  std::optional<double> xi;
  // NP variant: xi is derived as 1 - epsilon_prime.
  std::optional<double> epsilon_prime;
  TwoPhaseVariant variant = TwoPhaseVariant::kBayesRhoQ;
  // Learning length is floor(log(n) / log(log_base)); natural log by default.
  double log_base = std::exp(1.0);
};

// Derived parameters of a validated configuration.
struct TwoPhaseLedger {
  std::size_t learning_slots = 0;  // o(n)
  double xi = 0.0;
  double psi = 0.0;
  double divergence = 0.0;
  double d_max = 0.0;
  // Phase-2 budgets (s - delta, s - omega).
  double budget_h0 = 0.0;
  double budget_h1 = 0.0;
  // Open interval of admissible epsilon_prime (NP) or xi (Bayes).
  double lower = 0.0;
  double upper = 0.0;
  // psi - (o(n)/n) d_max >= 0: the learning phase fits inside the slack.
  bool horizon_sufficient = false;
};

inline std::size_t LearningSlots(std::size_t n, double log_base) {
  internal::Require(n >= 1, "horizon must be positive");
  internal::Require(log_base > 1.0 && std::isfinite(log_base), "log base must exceed one");
  // Guard against log(e^k) landing just below k.
  const double v = std::log(static_cast<double>(n)) / std::log(log_base);
  return static_cast<std::size_t>(std::floor(v + 1e-12));
}

inline TwoPhaseLedger ValidateTwoPhase(const TwoPhaseConfig& cfg, const SourceModel& source,
                                       const DistortionSpec& distortion, double s) {
  internal::Require(std::isfinite(s) && s > 0.0, "budget must be positive");
  internal::Require(cfg.delta > 0.0 && cfg.delta < s, "delta must lie in (0, s)");
  internal::Require(cfg.omega > 0.0 && cfg.omega < s, "omega must lie in (0, s)");
  TwoPhaseLedger led;
  led.learning_slots = LearningSlots(cfg.n, cfg.log_base);
  internal::Require(led.learning_slots >= 1, "horizon too short: learning phase is empty");
  internal::Require(led.learning_slots < cfg.n, "horizon too short for a second phase");
  led.divergence = source.Divergence();
  internal::Require(std::isfinite(led.divergence) && led.divergence > 0.0,
                    "two-phase policy needs 0 < D(p_X|h0 || p_X|h1) < inf");
  led.d_max = distortion.d_max();
  const double cap = led.d_max > 0.0 ? std::min(led.divergence, cfg.delta / led.d_max)
                                     : led.divergence;
  if (cfg.variant == TwoPhaseVariant::kNpRhoP) {
    internal::Require(cfg.epsilon_prime.has_value(), "NP variant needs epsilon_prime");
    led.lower = std::max(0.0, 1.0 - cap);
    led.upper = 1.0;
    const double e = *cfg.epsilon_prime;
    internal::Require(e > led.lower && e < led.upper,
                      "epsilon_prime must lie in (" + std::to_string(led.lower) + ", 1)");
    led.xi = 1.0 - e;
    if (cfg.xi) {
      internal::Require(std::abs(*cfg.xi - led.xi) <= 1e-12,
                        "xi must equal 1 - epsilon_prime in the NP variant");
    }
  } else {
    internal::Require(cfg.xi.has_value(), "Bayes variant needs xi");
    led.lower = 0.0;
    led.upper = cap;
    led.xi = *cfg.xi;
    internal::Require(led.xi > led.lower && led.xi < led.upper,
                      "xi must lie in (0, " + std::to_string(led.upper) + ")");
  }
  led.psi = cfg.delta - led.d_max * led.xi;
  internal::Require(led.psi > 0.0, "psi = delta - d_max xi must be positive");
  led.budget_h0 = s - cfg.delta;
  led.budget_h1 = s - cfg.omega;
  led.horizon_sufficient =
      led.psi - static_cast<double>(led.learning_slots) / static_cast<double>(cfg.n) * led.d_max >=
      0.0;
  return led;
}

// Thread-safe memo of phase-2 solves keyed by source, distortion, budgets
// and variant.
class Phase2Cache {
 public:
  std::shared_ptr<const ExponentResult> GetOrSolve(const SourceModel& source,
                                                   const ConstraintSet& cons,
                                                   TwoPhaseVariant variant,
                                                   const SolverOptions& opts) {
    const std::string key = Key(source, cons, variant);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = entries_.find(key);
      if (it != entries_.end()) {
        ++hits_;
        return it->second;
      }
    }
    auto solved = std::make_shared<const ExponentResult>(
        variant == TwoPhaseVariant::kNpRhoP ? SolvePhi(source, cons, opts)
                                            : SolveNu(source, cons, opts));
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.emplace(key, std::move(solved)).first->second;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }
  std::size_t hits() const {
    std::lock_guard<std::mutex> lock(mu_);
    return hits_;
  }

 private:
  static void Append(std::string& key, double v) {
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof(double));
    key.append(buf, sizeof(double));
  }
  static std::string Key(const SourceModel& source, const ConstraintSet& cons,
                         TwoPhaseVariant variant) {
    std::string key(1, variant == TwoPhaseVariant::kNpRhoP ? 'p' : 'q');
    for (double v : source.x_alphabet().symbols()) Append(key, v);
    for (double v : source.p_x_h0().probs()) Append(key, v);
    for (double v : source.p_x_h1().probs()) Append(key, v);
    const DistortionSpec& d = cons.distortion();
    for (double v : d.y_alphabet().symbols()) Append(key, v);
    for (double v : d.matrix()) Append(key, v);
    for (std::size_t x = 0; x < d.x_alphabet().size(); ++x) {
      for (std::size_t y = 0; y < d.y_alphabet().size(); ++y) {
        key.push_back(d.mask().allowed(x, y) ? '1' : '0');
      }
    }
    Append(key, cons.s_bar());
    Append(key, cons.s_tilde());
    return key;
  }

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const ExponentResult>> entries_;
  std::size_t hits_ = 0;
};

struct PolicyTrace {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> distortion;
  Hypothesis hypothesis = Hypothesis::kH0;
  std::optional<Hypothesis> learned;
  // First slot of the second phase, c(n) = o(n).
  std::size_t phase_boundary = 0;

  int phase(std::size_t slot) const { return slot < phase_boundary ? 1 : 2; }
  double AverageDistortion() const {
    double sum = 0.0;
    for (double d : distortion) sum += d;
    return distortion.empty() ? 0.0 : sum / static_cast<double>(distortion.size());
  }
};

class TwoPhasePolicy {
 public:
  // Validates the configuration and solves (or fetches) the phase-2
  // optimizer at budgets (s - delta, s - omega).
  static TwoPhasePolicy Build(const TwoPhaseConfig& cfg, const SourceModel& source,
                              const DistortionSpec& distortion, double s,
                              Phase2Cache* cache = nullptr, const SolverOptions& opts = {}) {
    TwoPhasePolicy p;
    p.cfg_ = cfg;
    p.source_ = source;
    p.distortion_ = distortion;
    p.s_ = s;
    p.ledger_ = ValidateTwoPhase(cfg, source, distortion, s);
    for (std::size_t x = 0; x < distortion.x_alphabet().size(); ++x) {
      internal::Require(distortion.mask().allowed(x, 0),
                        "the learning phase needs min(Y) allowed for every x");
    }
    const ConstraintSet cons(distortion, p.ledger_.budget_h0, p.ledger_.budget_h1);
    if (cache != nullptr) {
      p.phase2_ = cache->GetOrSolve(source, cons, cfg.variant, opts);
    } else {
      p.phase2_ = std::make_shared<const ExponentResult>(
          cfg.variant == TwoPhaseVariant::kNpRhoP ? SolvePhi(source, cons, opts)
                                                  : SolveNu(source, cons, opts));
    }
    p.x_sampler_ = {internal::Sampler(source.p_x_h0().probs()),
                    internal::Sampler(source.p_x_h1().probs())};
    p.rows_ = {internal::RowSamplers(p.phase2_->policy.h0()),
               internal::RowSamplers(p.phase2_->policy.h1())};
    return p;
  }

  const TwoPhaseConfig& config() const { return cfg_; }
  const TwoPhaseLedger& ledger() const { return ledger_; }
  const ExponentResult& phase2() const { return *phase2_; }
  const SourceModel& source() const { return source_; }
  const DistortionSpec& distortion() const { return distortion_; }
  double budget() const { return s_; }

  // Core loop shared by Apply, Simulate and the audit. next_x() yields
  // demand indices; sink(slot, x, y) receives every emitted index pair.
  // Returns the learned hypothesis.
  template <class NextX, class Sink>
  Hypothesis Run(NextX&& next_x, std::mt19937_64& rng, Sink&& sink) const {
    const std::size_t o = ledger_.learning_slots;
    std::vector<std::size_t> learn(o);
    for (std::size_t i = 0; i < o; ++i) {
      learn[i] = next_x();
      // Learning phase: constant output min(Y).
      sink(i, learn[i], std::size_t{0});
    }
    const Hypothesis learned =
        internal::TypicalSetByIndex(learn, source_, ledger_.divergence, ledger_.xi);
    const auto& rows = rows_[Index(learned)];
    for (std::size_t i = o; i < cfg_.n; ++i) {
      const std::size_t x = next_x();
      sink(i, x, rows[x](rng));
    }
    return learned;
  }

  // Runs the policy on a given demand sequence of length n.
  PolicyTrace Apply(Hypothesis h, std::span<const double> x_seq, std::uint64_t seed) const {
    internal::Require(x_seq.size() == cfg_.n, "demand sequence length must equal n");
    const auto xs = internal::ToIndices(source_.x_alphabet(), x_seq);
    std::mt19937_64 rng(seed);
    std::size_t next = 0;
    return Record(h, [&] { return xs[next++]; }, rng);
  }

  // Draws demand i.i.d. from p_X|h and runs the policy on the same stream.
  PolicyTrace Simulate(Hypothesis h, std::mt19937_64& rng) const {
    const auto& draw = x_sampler_[Index(h)];
    return Record(h, [&] { return draw(rng); }, rng);
  }
  PolicyTrace Simulate(Hypothesis h, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    return Simulate(h, rng);
  }

  std::size_t DrawDemand(Hypothesis h, std::mt19937_64& rng) const {
    return x_sampler_[Index(h)](rng);
  }

 private:
  TwoPhasePolicy() = default;

  template <class NextX>
  PolicyTrace Record(Hypothesis h, NextX&& next_x, std::mt19937_64& rng) const {
    PolicyTrace t;
    t.hypothesis = h;
    t.phase_boundary = ledger_.learning_slots;
    t.x.resize(cfg_.n);
    t.y.resize(cfg_.n);
    t.distortion.resize(cfg_.n);
    const Alphabet& xa = source_.x_alphabet();
    const Alphabet& ya = distortion_.y_alphabet();
    t.learned = Run(next_x, rng, [&](std::size_t i, std::size_t x, std::size_t y) {
      t.x[i] = xa[x];
      t.y[i] = ya[y];
      t.distortion[i] = distortion_.d(x, y);
    });
    return t;
  }

  TwoPhaseConfig cfg_;
  SourceModel source_;
  DistortionSpec distortion_;
  double s_ = 0.0;
  TwoPhaseLedger ledger_;
  std::shared_ptr<const ExponentResult> phase2_;
  std::array<internal::Sampler, 2> x_sampler_;
  std::array<std::vector<internal::Sampler>, 2> rows_;
};

struct HypothesisAudit {
  double mean_distortion = 0.0;
  double distortion_std_error = 0.0;
  // Fraction of replicas whose learned hypothesis differs from the truth.
  double learning_error = 0.0;
  double learning_std_error = 0.0;
  bool phase1_constant = true;
  // mean - 3 se <= s.
  bool distortion_ok = false;
};

struct TwoPhaseAudit {
  std::size_t replicas = 0;
  double budget = 0.0;
  double xi = 0.0;
  std::array<HypothesisAudit, 2> per_hypothesis;
  bool horizon_sufficient = false;
  // Learning error under h0 at most xi + 3 se.
  bool learning_ok = false;
  bool pass = false;
};

// Monte Carlo audit of the long-run distortion constraint and the learning
// phase over `replicas` traces per hypothesis.
inline TwoPhaseAudit AuditTwoPhase(const TwoPhasePolicy& policy, std::size_t replicas,
                                   std::uint64_t seed, int threads = 1) {
  internal::Require(replicas >= 2, "audit needs at least two replicas");
  TwoPhaseAudit audit;
  audit.replicas = replicas;
  audit.budget = policy.budget();
  audit.xi = policy.ledger().xi;
  audit.horizon_sufficient = policy.ledger().horizon_sufficient;
  for (int h = 0; h < 2; ++h) {
    const Hypothesis hyp = static_cast<Hypothesis>(h);
    struct Replica {
      double average_distortion = 0.0;
      bool learned_correctly = false;
      bool phase1_constant = true;
    };
    const std::size_t boundary = policy.ledger().learning_slots;
    const double n = static_cast<double>(policy.config().n);
    const DistortionSpec& dist = policy.distortion();
    std::vector<Replica> runs(replicas);
    auto work = [&](std::size_t begin, std::size_t step) {
      for (std::size_t r = begin; r < replicas; r += step) {
        auto rng = internal::ReplicaEngine(seed, r, static_cast<std::uint64_t>(h));
        Replica& run = runs[r];
        double total = 0.0;
        const Hypothesis learned = policy.Run(
            [&] { return policy.DrawDemand(hyp, rng); }, rng,
            [&](std::size_t i, std::size_t x, std::size_t y) {
              if (i < boundary && y != 0) run.phase1_constant = false;
              total += dist.d(x, y);
            });
        run.average_distortion = total / n;
        run.learned_correctly = learned == hyp;
      }
    };
    const std::size_t workers =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, replicas);
    if (workers == 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
      for (auto& t : pool) t.join();
    }
    // Reduce in replica order so the result is independent of threads.
    double sum = 0.0, sum_sq = 0.0, wrong = 0.0;
    bool constant = true;
    for (const auto& run : runs) {
      sum += run.average_distortion;
      sum_sq += run.average_distortion * run.average_distortion;
      wrong += run.learned_correctly ? 0.0 : 1.0;
      constant = constant && run.phase1_constant;
    }
    const double r = static_cast<double>(replicas);
    HypothesisAudit& a = audit.per_hypothesis[h];
    a.mean_distortion = sum / r;
    const double var = std::max(0.0, (sum_sq - r * a.mean_distortion * a.mean_distortion) / (r - 1.0));
    a.distortion_std_error = std::sqrt(var / r);
    a.learning_error = wrong / r;
    a.learning_std_error = std::sqrt(a.learning_error * (1.0 - a.learning_error) / r);
    a.phase1_constant = constant;
    a.distortion_ok = a.mean_distortion - 3.0 * a.distortion_std_error <= policy.budget();
  }
  const HypothesisAudit& h0 = audit.per_hypothesis[0];
  audit.learning_ok = h0.learning_error <= audit.xi + 3.0 * h0.learning_std_error;
  audit.pass = audit.per_hypothesis[0].distortion_ok && audit.per_hypothesis[1].distortion_ok &&
               h0.phase1_constant && audit.per_hypothesis[1].phase1_constant && audit.learning_ok;
  return audit;
}

}  // namespace privexp

#endif  // PRIVEXP_POLICIES_HPP_
