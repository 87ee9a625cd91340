#pragma once
// Transport by heat flow with Gaussian reference measure.
//
// For a target density proportional to exp(-U(x)) times the standard
// Gaussian, the interpolation nu_t = P_t(e^{-U}) gamma (P_t the
// Ornstein-Uhlenbeck semigroup) induces the flow
//
//   dS_t/dt = v(t, S_t),  v(t, x) = -d/dx log P_t(e^{-U})(x),  S_0 = Id,
//
// whose limit S_inf pushes the target forward to the Gaussian; the inverse
// of S_inf is then the Gaussian-to-target transport. P_t has the explicit
// Mehler form P_t f(x) = E_z[f(x e^{-t} + sqrt(1-e^{-2t}) z)] under the
// standard normal z, evaluated by Gauss-Hermite quadrature.
//
// U is restricted to even polynomials a2 x^2 + a4 x^4 (+ constant) acting
// per coordinate: this keeps all quadratures convergent, makes every
// multi-dimensional flow a product of 1-D flows, and matches the symmetry
// assumptions under which preserved log-concavity of P_t e^{-U} certifies
// that every flow map is a 1-contraction. The log-concavity probe measures
// min_x d^2/dx^2 [-log P_t e^{-U}] over a (t, x) grid.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "ctlab/core.hpp"
#include "ctlab/gauss_hermite.hpp"
#include "ctlab/interpolation.hpp"
#include "ctlab/transport_map.hpp"

namespace ctlab {

// even polynomial a0 + a2 x^2 + a4 x^4, the per-coordinate flow potential
struct EvenPoly1 {
  double a0 = 0.0, a2 = 0.0, a4 = 0.0;

  double value(double x) const {
    const double t = x * x;
    return a0 + a2 * t + a4 * t * t;
  }
  double deriv(double x) const { return 2.0 * a2 * x + 4.0 * a4 * x * x * x; }
  double second(double x) const { return 2.0 * a2 + 12.0 * a4 * x * x; }
  bool convex() const { return a2 >= 0.0 && a4 >= 0.0; }
};

// separable U(x) = sum_i parts[i](x_i)
struct SeparablePotential {
  std::vector<EvenPoly1> parts;
  int dim() const { return static_cast<int>(parts.size()); }
};

inline constexpr int kDefaultGhOrder = 64;
inline constexpr double kDefaultTMax = 20.0;
inline constexpr double kDefaultDt = 1e-2;

// Mehler form of the OU semigroup: P_t h(x) = E_z h(x e^{-t} + sqrt(1-e^{-2t}) z)
inline double ou_apply(const std::function<double(double)>& h, double t, double x,
                       int order = kDefaultGhOrder) {
  if (t < 0.0) throw std::invalid_argument("ou_apply: t must be >= 0");
  const double decay = std::exp(-t);
  const double spread = std::sqrt(std::max(0.0, 1.0 - decay * decay));
  return gaussian_expect([&](double z) { return h(x * decay + spread * z); }, order);
}

// v(t, x) = -d/dx log P_t(e^{-U})(x) = e^{-t} E[U'(w) e^{-U(w)}] / E[e^{-U(w)}]
// with w = x e^{-t} + sqrt(1-e^{-2t}) z; the largest exponent is factored out
// so the denominator never underflows
inline double flow_velocity1(const EvenPoly1& u, double t, double x,
                             int order = kDefaultGhOrder) {
  const double decay = std::exp(-t);
  const double spread = std::sqrt(std::max(0.0, 1.0 - decay * decay));
  const auto& rule = gauss_hermite(order);

  const double s2 = std::sqrt(2.0);
  double peak = -kInf;
  for (std::size_t k = 0; k < rule.node.size(); ++k) {
    const double w = x * decay + spread * s2 * rule.node[k];
    peak = std::max(peak, -u.value(w));
  }
  double den = 0.0, num = 0.0;
  for (std::size_t k = 0; k < rule.node.size(); ++k) {
    const double w = x * decay + spread * s2 * rule.node[k];
    const double e = rule.weight[k] * std::exp(-u.value(w) - peak);
    den += e;
    num += e * u.deriv(w);
  }
  if (!(den > 0.0)) throw std::runtime_error("flow_velocity1: semigroup average underflowed");
  return decay * num / den;
}

// second derivative of U_t = -log P_t e^{-U} by central differencing of the
// velocity; h = 1e-4 balances the O(h^2) truncation against quadrature noise
inline double flow_convexity1(const EvenPoly1& u, double t, double x,
                              int order = kDefaultGhOrder, double h = 1e-4) {
  return (flow_velocity1(u, t, x + h, order) - flow_velocity1(u, t, x - h, order)) / (2.0 * h);
}

struct FlowResult1 {
  Vec seeds;      // initial positions, strictly increasing
  Vec positions;  // S_{t_max} at the seeds
  double t_max = kDefaultTMax;
  double dt = kDefaultDt;
  int gh_order = kDefaultGhOrder;
  int halvings = 0;  // step-size halvings forced by ordering violations
};

// classical 4th-order one-step integration of the whole seed set; a step
// that breaks the seed ordering (impossible for the exact flow) is redone
// with half the step size, giving up after 10 halvings
inline FlowResult1 integrate_flow1(
    const EvenPoly1& u, Vec seeds, double t_max = kDefaultTMax, double dt = kDefaultDt,
    int order = kDefaultGhOrder,
    const std::function<void(double, const Vec&)>& observer = nullptr) {
  if (seeds.empty()) throw std::invalid_argument("integrate_flow1: no seeds");
  for (std::size_t i = 1; i < seeds.size(); ++i)
    if (!(seeds[i] > seeds[i - 1]))
      throw std::invalid_argument("integrate_flow1: seeds must strictly increase");
  if (!(dt > 0.0 && t_max > 0.0))
    throw std::invalid_argument("integrate_flow1: t_max and dt must be positive");

  FlowResult1 r;
  r.seeds = seeds;
  r.t_max = t_max;
  r.dt = dt;
  r.gh_order = order;

  Vec pos = std::move(seeds);
  const std::size_t n = pos.size();
  Vec k1(n), k2(n), k3(n), k4(n), trial(n);
  double t = 0.0;
  double step = dt;
  if (observer) observer(0.0, pos);

  while (t < t_max - 1e-12) {
    const double h = std::min(step, t_max - t);
    for (std::size_t i = 0; i < n; ++i) k1[i] = flow_velocity1(u, t, pos[i], order);
    for (std::size_t i = 0; i < n; ++i)
      k2[i] = flow_velocity1(u, t + 0.5 * h, pos[i] + 0.5 * h * k1[i], order);
    for (std::size_t i = 0; i < n; ++i)
      k3[i] = flow_velocity1(u, t + 0.5 * h, pos[i] + 0.5 * h * k2[i], order);
    for (std::size_t i = 0; i < n; ++i)
      k4[i] = flow_velocity1(u, t + h, pos[i] + h * k3[i], order);
    for (std::size_t i = 0; i < n; ++i)
      trial[i] = pos[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    bool ordered = true;
    for (std::size_t i = 1; i < n; ++i)
      if (!(trial[i] > trial[i - 1])) {
        ordered = false;
        break;
      }
    if (!ordered) {
      if (++r.halvings > 10)
        throw std::runtime_error("integrate_flow1: ordering violated after 10 step halvings");
      step *= 0.5;
      continue;
    }
    pos = trial;
    t += h;
    if (observer) observer(t, pos);
  }
  r.positions = std::move(pos);
  return r;
}

// product flow: each coordinate integrates independently
inline std::vector<FlowResult1> integrate_flow(const SeparablePotential& u,
                                               const std::vector<Vec>& seeds_per_coord,
                                               double t_max = kDefaultTMax,
                                               double dt = kDefaultDt,
                                               int order = kDefaultGhOrder) {
  if (static_cast<int>(seeds_per_coord.size()) != u.dim())
    throw std::invalid_argument("integrate_flow: one seed vector per coordinate required");
  std::vector<FlowResult1> out;
  out.reserve(seeds_per_coord.size());
  for (std::size_t i = 0; i < seeds_per_coord.size(); ++i)
    out.push_back(integrate_flow1(u.parts[i], seeds_per_coord[i], t_max, dt, order));
  return out;
}

// the transport map T = S_inf^{-1} (Gaussian -> target), interpolated
// monotonically through the (S(seed), seed) pairs
inline TransportMap inverse_flow_map1(const FlowResult1& fs) {
  auto inv = std::make_shared<MonotoneCubic>(fs.positions, fs.seeds);
  auto fwd = std::make_shared<MonotoneCubic>(fs.seeds, fs.positions);
  TransportMap t;
  t.kind = MapKind::flow;
  t.name = "heatflow";
  t.dim = 1;
  t.forward = [inv](const Vec& y) { return Vec{inv->eval(y[0])}; };
  t.jacobian = [inv](const Vec& y) {
    Mat j(1);
    j(0, 0) = inv->deriv(y[0]);
    return j;
  };
  t.inverse = [fwd](const Vec& x) { return Vec{fwd->eval(x[0])}; };
  return t;
}

struct ProbeResult {
  double min_second = kInf;  // smallest observed U_t''
  double argmin_t = 0.0;
  double argmin_x = 0.0;
  bool passed(double tol = 1e-6) const { return min_second >= -tol; }
};

// minimum Hessian eigenvalue of U_t over a (t, x) grid; separable U makes
// the Hessian diagonal, so the minimum over coordinates suffices
inline ProbeResult logconcavity_probe1(const EvenPoly1& u, const Vec& t_grid, const Vec& x_grid,
                                       int order = kDefaultGhOrder) {
  if (!u.convex()) throw std::invalid_argument("logconcavity_probe1: U must be convex");
  ProbeResult r;
  for (double t : t_grid)
    for (double x : x_grid) {
      const double s = flow_convexity1(u, t, x, order);
      if (s < r.min_second) {
        r.min_second = s;
        r.argmin_t = t;
        r.argmin_x = x;
      }
    }
  return r;
}

inline ProbeResult logconcavity_probe(const SeparablePotential& u, const Vec& t_grid,
                                      const Vec& x_grid, int order = kDefaultGhOrder) {
  ProbeResult best;
  for (const auto& part : u.parts) {
    const ProbeResult r = logconcavity_probe1(part, t_grid, x_grid, order);
    if (r.min_second < best.min_second) best = r;
  }
  return best;
}

// density of nu_t (up to the t-independent normalization E_gamma e^{-U}):
// P_t(e^{-U})(x) * gamma(x); used by the push-forward consistency check
inline double flow_interpolation_density1(const EvenPoly1& u, double t, double x,
                                          int order = kDefaultGhOrder) {
  const double p = ou_apply([&u](double w) { return std::exp(-u.value(w)); }, t, x, order);
  return p * std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

}  // namespace ctlab
