#pragma once
// Bracketed scalar root finding: bisection with Newton acceleration when a
// derivative is supplied. The bracket is never abandoned; a Newton step that
// leaves it (or fails to shrink the residual) falls back to bisection, so the
// method is as robust as bisection and usually converges in a handful of
// iterations.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace ctlab {

struct RootOptions {
  double x_tol = 1e-12;       // scaled by (1 + |x|)
  double f_tol_rel = 1e-13;   // relative to the bracketing residuals
  int max_iter = 200;
};

// F: double -> double, monotone-ish inside [lo, hi] with f(lo), f(hi) of
// opposite (weak) signs. DF may be null.
template <typename F, typename DF>
double solve_bracketed(const F& f, const DF& df, double lo, double hi, RootOptions opt = {}) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::invalid_argument("solve_bracketed: endpoints do not bracket a root");

  const double f_scale = std::max(std::fabs(flo), std::fabs(fhi));
  double x = 0.5 * (lo + hi);
  double fx = f(x);
  for (int it = 0; it < opt.max_iter; ++it) {
    if (std::fabs(fx) <= opt.f_tol_rel * f_scale) return x;
    // shrink the bracket with the current sample
    if ((fx > 0.0) == (fhi > 0.0)) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
    if (hi - lo <= opt.x_tol * (1.0 + std::fabs(x))) return 0.5 * (lo + hi);

    double next = 0.5 * (lo + hi);  // bisection fallback
    if constexpr (!std::is_same_v<DF, std::nullptr_t>) {
      const double d = df(x);
      if (std::isfinite(d) && d != 0.0) {
        const double cand = x - fx / d;
        if (cand > lo && cand < hi) next = cand;
      }
    }
    x = next;
    fx = f(x);
  }
  return x;
}

template <typename F>
double solve_bracketed(const F& f, std::nullptr_t, double lo, double hi, RootOptions opt = {}) {
  return solve_bracketed<F, std::nullptr_t>(f, nullptr, lo, hi, opt);
}

template <typename F>
double solve_bisection(const F& f, double lo, double hi, RootOptions opt = {}) {
  return solve_bracketed(f, nullptr, lo, hi, opt);
}

}  // namespace ctlab
