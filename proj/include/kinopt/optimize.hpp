#pragma once

#include <cmath>
#include <cstddef>

namespace kinopt {

template <typename Real>
struct GoldenSectionResult {
  Real x;
  Real fx;
  std::size_t iterations;
};

/// Golden-section search for the minimum of a unimodal f on [lo, hi]. Stops
/// once the bracket is narrower than `tol`. One function evaluation per
/// iteration after the first two.
template <typename Real, typename F>
GoldenSectionResult<Real> golden_section_minimize(F&& f, Real lo, Real hi, Real tol, std::size_t max_iter = 500) {
  const Real inv_phi = (std::sqrt(Real(5)) - Real(1)) / Real(2);
  Real a = lo;
  Real b = hi;
  Real c = b - inv_phi * (b - a);
  Real d = a + inv_phi * (b - a);
  Real fc = f(c);
  Real fd = f(d);
  std::size_t it = 0;
  while ((b - a) > tol && it < max_iter) {
    if (fc < fd) {
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
    ++it;
  }
  const Real x = (a + b) / Real(2);
  return {x, f(x), it};
}

/// Ternary search for the minimum of a unimodal f on [lo, hi]; never
/// evaluates the endpoints.
template <typename F>
double ternary_minimize(F&& f, double lo, double hi, double tol = 1e-13, int max_iter = 300) {
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace kinopt
