#pragma once

#include <cmath>
#include <cstddef>

#include "persuade_sis/model.hpp"

namespace persuade_sis {

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Bisection on [lo, hi]. Requires f(lo) and f(hi) of opposite sign (or one
/// of them zero). Stops when |f| < tol, when the bracket cannot be halved any
/// further in double precision, or after max_iter halvings, so identical
/// inputs always give bit-identical roots.
template <class F>
RootResult bisect(F&& f, double lo, double hi, double tol = 1e-10, std::size_t max_iter = 200) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return {lo, 0.0, 0};
  if (f_hi == 0.0) return {hi, 0.0, 0};
  if ((f_lo < 0.0) == (f_hi < 0.0))
    throw NumericalError("bisection: no sign change on bracket");

  RootResult best = std::abs(f_lo) < std::abs(f_hi) ? RootResult{lo, f_lo, 0}
                                                   : RootResult{hi, f_hi, 0};
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (std::abs(f_mid) <= std::abs(best.residual)) best = {mid, f_mid, it};
    best.iterations = it;
    if (std::abs(f_mid) < tol) return {mid, f_mid, it};
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

}  // namespace persuade_sis
