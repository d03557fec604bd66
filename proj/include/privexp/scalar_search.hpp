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

#ifndef PRIVEXP_SCALAR_SEARCH_HPP_
#define PRIVEXP_SCALAR_SEARCH_HPP_

#include <cmath>
#include <concepts>

namespace privexp {

struct ScalarMax {
  double argmax = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

// Golden-section search for the maximum of a concave function on [lo, hi].
// The interior estimate is compared against both endpoints, so a maximum
// sitting on the boundary (or a concave function that jumps down at an
// endpoint) is reported correctly. Ties prefer the interior point.
//
// `f` is called either as f(t) or, if it accepts two arguments, as
// f(t, bracket_width) so callers can tighten inner tolerances as the
// bracket shrinks.
template <class F>
  requires std::invocable<F, double> || std::invocable<F, double, double>
ScalarMax GoldenSectionMaximize(F&& f_in, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double width = hi - lo;
  auto f = [&](double t) {
    if constexpr (std::invocable<F, double, double>) {
      return f_in(t, width);
    } else {
      return f_in(t);
    }
  };
  ScalarMax out;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  out.evaluations = 2;
  while (b - a > tol) {
    width = b - a;
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++out.evaluations;
  }
  if (fc >= fd) {
    out.argmax = c;
    out.value = fc;
  } else {
    out.argmax = d;
    out.value = fd;
  }
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  out.evaluations += 2;
  if (f_lo > out.value) {
    out.argmax = lo;
    out.value = f_lo;
  }
  if (f_hi > out.value) {
    out.argmax = hi;
    out.value = f_hi;
  }
  return out;
}

}  // namespace privexp

#endif  // PRIVEXP_SCALAR_SEARCH_HPP_
