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

// Finite alphabets, probability mass functions, conditional pmfs and the
// information measures used throughout the library. All divergences are in
// nats.

#ifndef PRIVEXP_DISTRIBUTIONS_HPP_
#define PRIVEXP_DISTRIBUTIONS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "privexp/error.hpp"
#include "privexp/scalar_search.hpp"

namespace privexp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPmfTolerance = 1e-12;

enum class Hypothesis { kH0 = 0, kH1 = 1 };

inline int Index(Hypothesis h) { return static_cast<int>(h); }

// Strictly increasing, nonempty list of finite real symbols.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<double> symbols) : symbols_(std::move(symbols)) {
    internal::Require(!symbols_.empty(), "alphabet must be nonempty");
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      internal::Require(std::isfinite(symbols_[i]),
                        "alphabet symbols must be finite");
      if (i > 0) {
        internal::Require(symbols_[i - 1] < symbols_[i],
                          "alphabet must be strictly increasing");
      }
    }
  }

  std::size_t size() const { return symbols_.size(); }
  double operator[](std::size_t i) const { return symbols_[i]; }
  std::span<const double> symbols() const { return symbols_; }
  double min() const { return symbols_.front(); }
  double max() const { return symbols_.back(); }

  std::optional<std::size_t> IndexOf(double symbol) const {
    auto it = std::lower_bound(symbols_.begin(), symbols_.end(), symbol);
    if (it == symbols_.end() || *it != symbol) return std::nullopt;
    return static_cast<std::size_t>(it - symbols_.begin());
  }

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::vector<double> symbols_;
};

enum class Normalization { kStrict, kRenormalize };

class Pmf {
 public:
  Pmf() = default;

  // kStrict rejects inputs whose sum is off by more than kPmfTolerance;
  // kRenormalize divides by the (positive) sum instead.
  Pmf(Alphabet alphabet, std::vector<double> probs,
      Normalization mode = Normalization::kStrict)
      : alphabet_(std::move(alphabet)), probs_(std::move(probs)) {
    internal::Require(probs_.size() == alphabet_.size(),
                      "pmf length does not match alphabet size");
    double sum = 0.0;
    for (double p : probs_) {
      internal::Require(std::isfinite(p) && p >= 0.0,
                        "pmf entries must be finite and nonnegative");
      sum += p;
    }
    if (mode == Normalization::kRenormalize) {
      internal::Require(sum > 0.0, "cannot renormalize an all-zero vector");
      for (double& p : probs_) p /= sum;
    } else {
      internal::Require(std::abs(sum - 1.0) <= kPmfTolerance,
                        "pmf entries must sum to 1");
    }
    for (double p : probs_) {
      internal::Require(p <= 1.0 + kPmfTolerance, "pmf entry exceeds 1");
    }
  }

  static Pmf PointMass(Alphabet alphabet, std::size_t index) {
    std::vector<double> probs(alphabet.size(), 0.0);
    internal::Require(index < probs.size(), "point-mass index out of range");
    probs[index] = 1.0;
    return Pmf(std::move(alphabet), std::move(probs));
  }

  const Alphabet& alphabet() const { return alphabet_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const { return probs_.size(); }

  double Mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += probs_[i] * alphabet_[i];
    return m;
  }

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  Alphabet alphabet_;
  std::vector<double> probs_;
};

// Forbidden (x, y) pairs, row-major over |X| x |Y|.
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t rows, std::size_t cols, bool forbidden = false)
      : rows_(rows), cols_(cols), forbidden_(rows * cols, forbidden) {}

  bool forbidden(std::size_t x, std::size_t y) const {
    return forbidden_[x * cols_ + y];
  }
  bool allowed(std::size_t x, std::size_t y) const { return !forbidden(x, y); }
  void set_forbidden(std::size_t x, std::size_t y, bool value = true) {
    forbidden_[x * cols_ + y] = value;
  }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<bool> forbidden_;
};

// A row-stochastic matrix p(y | x). Rows are stored row-major.
class ConditionalPmf {
 public:
  ConditionalPmf() = default;
  ConditionalPmf(Alphabet x_alphabet, Alphabet y_alphabet,
                 std::vector<double> row_major,
                 std::optional<Mask> mask = std::nullopt)
      : x_(std::move(x_alphabet)),
        y_(std::move(y_alphabet)),
        rows_(std::move(row_major)),
        mask_(std::move(mask)) {
    internal::Require(rows_.size() == x_.size() * y_.size(),
                      "conditional pmf has wrong number of entries");
    if (mask_) {
      internal::Require(mask_->rows() == x_.size() && mask_->cols() == y_.size(),
                        "mask shape does not match alphabets");
    }
    for (std::size_t x = 0; x < x_.size(); ++x) {
      double sum = 0.0;
      for (std::size_t y = 0; y < y_.size(); ++y) {
        const double w = at(x, y);
        internal::Require(std::isfinite(w) && w >= 0.0,
                          "conditional entries must be finite and nonnegative");
        if (mask_ && mask_->forbidden(x, y)) {
          internal::Require(w == 0.0, "forbidden pair carries probability");
        }
        sum += w;
      }
      internal::Require(std::abs(sum - 1.0) <= kPmfTolerance,
                        "conditional row must sum to 1");
    }
  }

  static ConditionalPmf Identity(const Alphabet& alphabet) {
    const std::size_t n = alphabet.size();
    std::vector<double> rows(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) rows[i * n + i] = 1.0;
    return ConditionalPmf(alphabet, alphabet, std::move(rows));
  }

  const Alphabet& x_alphabet() const { return x_; }
  const Alphabet& y_alphabet() const { return y_; }
  const std::optional<Mask>& mask() const { return mask_; }
  double at(std::size_t x, std::size_t y) const {
    return rows_[x * y_.size() + y];
  }
  std::span<const double> row(std::size_t x) const {
    return std::span<const double>(rows_).subspan(x * y_.size(), y_.size());
  }
  std::span<const double> entries() const { return rows_; }

  friend bool operator==(const ConditionalPmf&, const ConditionalPmf&) = default;

 private:
  Alphabet x_;
  Alphabet y_;
  std::vector<double> rows_;
  std::optional<Mask> mask_;
};

// Memoryless hypothesis-aware policy: one conditional per hypothesis.
class PolicyPair {
 public:
  PolicyPair() = default;
  PolicyPair(ConditionalPmf h0, ConditionalPmf h1)
      : h0_(std::move(h0)), h1_(std::move(h1)) {
    internal::Require(h0_.x_alphabet() == h1_.x_alphabet() &&
                          h0_.y_alphabet() == h1_.y_alphabet(),
                      "policy pair members must share alphabets");
  }

  const ConditionalPmf& h0() const { return h0_; }
  const ConditionalPmf& h1() const { return h1_; }
  const ConditionalPmf& operator[](Hypothesis h) const {
    return h == Hypothesis::kH0 ? h0_ : h1_;
  }
  const Alphabet& x_alphabet() const { return h0_.x_alphabet(); }
  const Alphabet& y_alphabet() const { return h0_.y_alphabet(); }

 private:
  ConditionalPmf h0_;
  ConditionalPmf h1_;
};

// ---------------------------------------------------------------------------
// Information measures on raw probability vectors.

namespace info {

inline double Kl(std::span<const double> p, std::span<const double> q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    d += p[i] * std::log(p[i] / q[i]);
  }
  // Roundoff can leave a tiny negative value when p == q.
  return std::max(d, 0.0);
}

// Sum_z p^tau q^(1-tau); terms with a zero factor contribute 0, which fixes
// the endpoint values to p(supp q) at tau = 1 and q(supp p) at tau = 0.
inline double BhattacharyyaSum(std::span<const double> p,
                               std::span<const double> q, double tau) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0 || q[i] <= 0.0) continue;
    if (tau == 0.0) {
      s += q[i];
    } else if (tau == 1.0) {
      s += p[i];
    } else {
      s += std::exp(tau * std::log(p[i]) + (1.0 - tau) * std::log(q[i]));
    }
  }
  return s;
}

inline double ChernoffCoeff(std::span<const double> p,
                            std::span<const double> q, double tau) {
  const double s = BhattacharyyaSum(p, q, tau);
  if (s <= 0.0) return kInf;
  return std::max(-std::log(s), 0.0);
}

inline double Renyi(std::span<const double> p, std::span<const double> q,
                    double tau) {
  const double c = ChernoffCoeff(p, q, tau);
  return c / (1.0 - tau);
}

struct ChernoffInfo {
  double value = 0.0;
  double tau_star = 0.5;
};

inline constexpr double kChernoffTauTolerance = 1e-9;

inline ChernoffInfo Chernoff(std::span<const double> p,
                             std::span<const double> q) {
  if (std::equal(p.begin(), p.end(), q.begin(), q.end())) return {0.0, 0.5};
  if (BhattacharyyaSum(p, q, 0.5) <= 0.0) return {kInf, 0.5};
  const ScalarMax best = GoldenSectionMaximize(
      [&](double tau) { return ChernoffCoeff(p, q, tau); }, 0.0, 1.0,
      kChernoffTauTolerance);
  return {best.value, best.argmax};
}

inline double TotalVariation(std::span<const double> p,
                             std::span<const double> q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

}  // namespace info

// ---------------------------------------------------------------------------
// Checked operations on Pmf values.

namespace internal {

inline void RequireSameAlphabet(const Pmf& p, const Pmf& q) {
  Require(p.alphabet() == q.alphabet(), "pmfs are on different alphabets");
}

}  // namespace internal

// Output law p_Y(y) = sum_x p_X(x) p(y|x).
inline Pmf Marginal(const Pmf& source, const ConditionalPmf& cond) {
  internal::Require(source.alphabet() == cond.x_alphabet(),
                    "source alphabet does not match conditional input alphabet");
  std::vector<double> out(cond.y_alphabet().size(), 0.0);
  for (std::size_t x = 0; x < source.size(); ++x) {
    if (source[x] == 0.0) continue;
    const auto row = cond.row(x);
    for (std::size_t y = 0; y < out.size(); ++y) out[y] += source[x] * row[y];
  }
  // Accumulated roundoff stays well inside the strict tolerance; renormalize
  // to keep the sum exact.
  return Pmf(cond.y_alphabet(), std::move(out), Normalization::kRenormalize);
}

inline double Kl(const Pmf& p, const Pmf& q) {
  internal::RequireSameAlphabet(p, q);
  return info::Kl(p.probs(), q.probs());
}

inline double Renyi(const Pmf& p, const Pmf& q, double tau) {
  internal::RequireSameAlphabet(p, q);
  internal::Require(tau >= 0.0 && tau < 1.0, "Renyi order must lie in [0,1)");
  return info::Renyi(p.probs(), q.probs(), tau);
}

inline double ChernoffCoeff(const Pmf& p, const Pmf& q, double tau) {
  internal::RequireSameAlphabet(p, q);
  internal::Require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0,1]");
  return info::ChernoffCoeff(p.probs(), q.probs(), tau);
}

inline info::ChernoffInfo Chernoff(const Pmf& p, const Pmf& q) {
  internal::RequireSameAlphabet(p, q);
  return info::Chernoff(p.probs(), q.probs());
}

inline double TotalVariation(const Pmf& p, const Pmf& q) {
  internal::RequireSameAlphabet(p, q);
  return info::TotalVariation(p.probs(), q.probs());
}

// Hypothesis pair of data laws on a shared alphabet, plus priors.
class SourceModel {
 public:
  SourceModel() = default;
  SourceModel(Pmf p_x_h0, Pmf p_x_h1, double prior_h0 = 0.5)
      : p_h0_(std::move(p_x_h0)), p_h1_(std::move(p_x_h1)),
        prior_h0_(prior_h0), prior_h1_(1.0 - prior_h0) {
    internal::RequireSameAlphabet(p_h0_, p_h1_);
    internal::Require(prior_h0 > 0.0 && prior_h0 <= 0.5,
                      "prior_h0 must satisfy 0 < prior_h0 <= prior_h1");
  }

  const Alphabet& x_alphabet() const { return p_h0_.alphabet(); }
  const Pmf& p_x_h0() const { return p_h0_; }
  const Pmf& p_x_h1() const { return p_h1_; }
  const Pmf& operator[](Hypothesis h) const {
    return h == Hypothesis::kH0 ? p_h0_ : p_h1_;
  }
  double prior_h0() const { return prior_h0_; }
  double prior_h1() const { return prior_h1_; }

  double Divergence() const { return Kl(p_h0_, p_h1_); }

  // 0 < D(p_X|h0 || p_X|h1) < inf. Not enforced on construction so that
  // degenerate pairs (identical hypotheses) remain representable; callers
  // that rely on the assumption check it explicitly.
  bool SatisfiesStandingAssumption() const {
    const double d = Divergence();
    return d > 0.0 && std::isfinite(d);
  }

 private:
  Pmf p_h0_;
  Pmf p_h1_;
  double prior_h0_ = 0.5;
  double prior_h1_ = 0.5;
};

}  // namespace privexp

#endif  // PRIVEXP_DISTRIBUTIONS_HPP_
