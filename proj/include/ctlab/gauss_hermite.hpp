#pragma once
// Gauss-Hermite rules (weight exp(-z^2) on the real line), built once per
// order through Golub-Welsch on the symmetric tridiagonal Jacobi matrix.
// The helper gaussian_expect integrates against the standard normal law:
//
//   E_gamma[f] = (1/sqrt(pi)) * sum_k w_k f(sqrt(2) z_k).

#include <cmath>
#include <map>

#include "ctlab/core.hpp"
#include "ctlab/quadrature.hpp"

namespace ctlab {

inline const QuadRule& gauss_hermite(int n) {
  static std::map<int, QuadRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Mat j(n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);  // monic Hermite recurrence, weight exp(-z^2)
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
  const double mu0 = std::sqrt(kPi);  // integral of exp(-z^2)
  for (int i = 0; i < n; ++i) {
    const int src = order[static_cast<std::size_t>(i)];
    rule.node[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(src)];
    const double v0 = vecs(0, src);
    rule.weight[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

// Expectation of f under the standard 1-D Gaussian.
template <typename F>
double gaussian_expect(const F& f, int order) {
  const QuadRule& r = gauss_hermite(order);
  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
  const double s2 = std::sqrt(2.0);
  double s = 0.0;
  for (std::size_t k = 0; k < r.node.size(); ++k) s += r.weight[k] * f(s2 * r.node[k]);
  return inv_sqrt_pi * s;
}

}  // namespace ctlab
