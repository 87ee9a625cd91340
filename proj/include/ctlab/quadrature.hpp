#pragma once
// 1-D adaptive Simpson quadrature plus Gauss-Legendre tensor rules for the
// handful of genuinely 2-D integrals (normalizing constants, coverage).
//
// The adaptive rule terminates on the usual Richardson estimate
// |S_fine - S_coarse| <= 15 * tol with the tolerance split across halves, so
// the returned value carries the (S_fine - S_coarse)/15 correction. Relative
// tolerance is applied against the running estimate of the requested
// interval, which keeps tail integrals of rapidly decaying densities
// accurate in a relative sense (needed when masses of order 1e-16 are later
// inverted).

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include "ctlab/core.hpp"

namespace ctlab {

struct QuadOptions {
  double abs_tol = 1e-14;
  double rel_tol = 1e-13;
  int max_depth = 64;
};

namespace detail {

template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth, int max_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= max_depth || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace detail

template <typename F>
double adaptive_simpson(const F& f, double a, double b, QuadOptions opt = {}) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(opt.abs_tol, opt.rel_tol * std::fabs(whole));
  return sign * detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 0, opt.max_depth);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules on [-1, 1] via Golub-Welsch
// ---------------------------------------------------------------------------

struct QuadRule {
  Vec node;
  Vec weight;
};

inline const QuadRule& gauss_legendre(int n) {
  static std::map<int, QuadRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Mat j(n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k - 1, k) = b;
    j(k, k - 1) = b;
  }
  Mat vecs;
  Vec vals = jacobi_eigen(j, &vecs);
  QuadRule rule;
  rule.node.resize(static_cast<std::size_t>(n));
  rule.weight.resize(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](int p, int q) { return vals[static_cast<std::size_t>(p)] < vals[static_cast<std::size_t>(q)]; });
  for (int i = 0; i < n; ++i) {
    const int src = order[static_cast<std::size_t>(i)];
    rule.node[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(src)];
    const double v0 = vecs(0, src);
    rule.weight[static_cast<std::size_t>(i)] = 2.0 * v0 * v0;  // moment of weight 1 on [-1,1]
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

// Integral of f over [a, b] with an n-point Gauss-Legendre rule.
template <typename F>
double gl_integrate(const F& f, double a, double b, int n) {
  const QuadRule& r = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < r.node.size(); ++i) s += r.weight[i] * f(c + h * r.node[i]);
  return h * s;
}

// Tensor Gauss-Legendre integral of f(x, y) over a 2-D box.
template <typename F2>
double gl_integrate_2d(const F2& f, const Box& box, int n) {
  if (box.dim() != 2) throw std::invalid_argument("gl_integrate_2d: box must be 2-D");
  const QuadRule& r = gauss_legendre(n);
  const double cx = box.ax[0].mid(), hx = 0.5 * box.ax[0].length();
  const double cy = box.ax[1].mid(), hy = 0.5 * box.ax[1].length();
  double s = 0.0;
  for (std::size_t i = 0; i < r.node.size(); ++i) {
    const double x = cx + hx * r.node[i];
    double row = 0.0;
    for (std::size_t j = 0; j < r.node.size(); ++j)
      row += r.weight[j] * f(x, cy + hy * r.node[j]);
    s += r.weight[i] * row;
  }
  return hx * hy * s;
}

}  // namespace ctlab
