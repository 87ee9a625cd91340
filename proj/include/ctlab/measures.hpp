#pragma once
// Reference measures and their potentials.
//
// A Potential is a smooth function with analytic gradient and Hessian plus
// *claims* (convexity lower bound K, directional upper bound C, symmetry
// flags, a second-difference modulus). Claims are never trusted silently:
// audit_* routines check them on sample grids to audit_tol and downstream
// certificates only use audited claims.
//
// A MeasureSpec describes one of the built-in measure families. Probability
// families carry exact or quadrature-computed normalization so density()
// integrates to 1; families of infinite mass (the model measure nu_A,
// Lebesgue on a half line) are flagged and handled by anchored mass
// coordinates downstream.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ctlab/core.hpp"
#include "ctlab/quadrature.hpp"
#include "ctlab/rootfind.hpp"

namespace ctlab {

inline constexpr double kAuditTol = 1e-8;

inline double gaussian_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }
inline double gaussian_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// inverse of gaussian_cdf by bracketed solve (assumes 0 < p < 1)
inline double gaussian_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gaussian_quantile: p outside (0,1)");
  return solve_bracketed([p](double z) { return gaussian_cdf(z) - p; },
                         [](double z) { return gaussian_pdf(z); }, -40.0, 40.0);
}

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

struct Potential {
  int dim = 1;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;

  // claims
  double convexity_lower_bound = 0.0;                    // D^2 V >= K * Id
  std::optional<double> directional_upper_bound;         // V_ee <= C for unit e
  bool even = false;                                     // V(-x) = V(x)
  bool unconditional = false;                            // even in each coordinate
  std::optional<std::function<double(double)>> modulus;  // delta(r) lower bound, see second_difference

  double value1(double x) const { return value(Vec{x}); }
  double grad1(double x) const { return grad(Vec{x})[0]; }
  double hess1(double x) const { return hess(Vec{x})(0, 0); }
};

// centered second difference V(x+y) + V(x-y) - 2 V(x)
inline double second_difference(const Potential& p, const Vec& x, const Vec& y) {
  Vec xp(x), xm(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] += y[i];
    xm[i] -= y[i];
  }
  return p.value(xp) + p.value(xm) - 2.0 * p.value(x);
}

inline double second_difference1(const Potential& p, double x, double y) {
  return second_difference(p, Vec{x}, Vec{y});
}

struct AuditResult {
  bool ok = true;
  double worst_gap = 0.0;  // most violating margin found (positive = violation)
  Vec where;
};

// claim: min eigenvalue of the Hessian >= K at every audit point
inline AuditResult audit_convexity(const Potential& p, const std::vector<Vec>& points,
                                   double tol = kAuditTol) {
  AuditResult r;
  for (const Vec& x : points) {
    const double gap = p.convexity_lower_bound - min_eigenvalue_sym(p.hess(x));
    if (gap > r.worst_gap) {
      r.worst_gap = gap;
      r.where = x;
    }
  }
  r.ok = r.worst_gap <= tol;
  return r;
}

// claim: max eigenvalue of the Hessian <= C at every audit point
inline AuditResult audit_directional_upper(const Potential& p, const std::vector<Vec>& points,
                                           double tol = kAuditTol) {
  AuditResult r;
  if (!p.directional_upper_bound) {
    r.ok = false;
    r.worst_gap = kInf;
    return r;
  }
  for (const Vec& x : points) {
    const double gap = max_eigenvalue_sym(p.hess(x)) - *p.directional_upper_bound;
    if (gap > r.worst_gap) {
      r.worst_gap = gap;
      r.where = x;
    }
  }
  r.ok = r.worst_gap <= tol;
  return r;
}

// claim: second_difference(x, y) >= delta(|y|) on the sample grid
inline AuditResult audit_modulus_lower(const Potential& p, const std::vector<Vec>& xs,
                                       const std::vector<Vec>& ys, double tol = kAuditTol) {
  AuditResult r;
  if (!p.modulus) {
    r.ok = false;
    r.worst_gap = kInf;
    return r;
  }
  const auto& delta = *p.modulus;
  for (const Vec& x : xs)
    for (const Vec& y : ys) {
      const double gap = delta(norm2(y)) - second_difference(p, x, y);
      if (gap > r.worst_gap) {
        r.worst_gap = gap;
        r.where = x;
      }
    }
  r.ok = r.worst_gap <= tol;
  return r;
}

// claim: second_difference(x, y) <= A |y|^(p+1) on the sample grid
inline AuditResult audit_secdiff_upper(const Potential& pot, double a, double p,
                                       const std::vector<Vec>& xs, const std::vector<Vec>& ys,
                                       double tol = kAuditTol) {
  AuditResult r;
  for (const Vec& x : xs)
    for (const Vec& y : ys) {
      const double gap = second_difference(pot, x, y) - a * std::pow(norm2(y), p + 1.0);
      if (gap > r.worst_gap) {
        r.worst_gap = gap;
        r.where = x;
      }
    }
  r.ok = r.worst_gap <= tol;
  return r;
}

// claim: second_difference(x, y) >= A |y|^(q+1) on the sample grid
inline AuditResult audit_secdiff_lower(const Potential& pot, double a, double q,
                                       const std::vector<Vec>& xs, const std::vector<Vec>& ys,
                                       double tol = kAuditTol) {
  AuditResult r;
  for (const Vec& x : xs)
    for (const Vec& y : ys) {
      const double gap = a * std::pow(norm2(y), q + 1.0) - second_difference(pot, x, y);
      if (gap > r.worst_gap) {
        r.worst_gap = gap;
        r.where = x;
      }
    }
  r.ok = r.worst_gap <= tol;
  return r;
}

// sum of two potentials on the same space; claims combine conservatively
inline Potential add_potentials(const Potential& a, const Potential& b) {
  if (a.dim != b.dim) throw std::invalid_argument("add_potentials: dimension mismatch");
  Potential s;
  s.dim = a.dim;
  s.value = [av = a.value, bv = b.value](const Vec& x) { return av(x) + bv(x); };
  s.grad = [ag = a.grad, bg = b.grad](const Vec& x) {
    Vec g = ag(x), h = bg(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += h[i];
    return g;
  };
  s.hess = [ah = a.hess, bh = b.hess](const Vec& x) {
    Mat m = ah(x);
    const Mat n = bh(x);
    for (std::size_t i = 0; i < m.a.size(); ++i) m.a[i] += n.a[i];
    return m;
  };
  s.convexity_lower_bound = a.convexity_lower_bound + b.convexity_lower_bound;
  if (a.directional_upper_bound && b.directional_upper_bound)
    s.directional_upper_bound = *a.directional_upper_bound + *b.directional_upper_bound;
  s.even = a.even && b.even;
  s.unconditional = a.unconditional && b.unconditional;
  if (a.modulus && b.modulus) {
    s.modulus = [da = *a.modulus, db = *b.modulus](double r) { return da(r) + db(r); };
  } else if (a.modulus && b.convexity_lower_bound >= 0.0) {
    s.modulus = a.modulus;  // adding a convex term can only increase the second difference
  } else if (b.modulus && a.convexity_lower_bound >= 0.0) {
    s.modulus = b.modulus;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Potential factories (exact derivatives)
// ---------------------------------------------------------------------------

// V(x) = sum_i x_i^2 / (2 sigma_i^2) + sum_i log(sigma_i sqrt(2 pi))
inline Potential gaussian_potential(const Vec& sigmas) {
  const int d = static_cast<int>(sigmas.size());
  double c = 0.0, smax = 0.0, smin = kInf;
  for (double s : sigmas) {
    if (!(s > 0.0)) throw std::invalid_argument("gaussian_potential: sigma must be positive");
    c += std::log(s * std::sqrt(2.0 * kPi));
    smax = std::max(smax, s);
    smin = std::min(smin, s);
  }
  Potential p;
  p.dim = d;
  p.value = [sigmas, c](const Vec& x) {
    double v = c;
    for (std::size_t i = 0; i < x.size(); ++i) v += 0.5 * x[i] * x[i] / (sigmas[i] * sigmas[i]);
    return v;
  };
  p.grad = [sigmas](const Vec& x) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] / (sigmas[i] * sigmas[i]);
    return g;
  };
  p.hess = [sigmas, d](const Vec&) {
    Mat h(d);
    for (int i = 0; i < d; ++i) h(i, i) = 1.0 / (sigmas[static_cast<std::size_t>(i)] * sigmas[static_cast<std::size_t>(i)]);
    return h;
  };
  p.convexity_lower_bound = 1.0 / (smax * smax);
  p.directional_upper_bound = 1.0 / (smin * smin);
  p.even = true;
  p.unconditional = true;
  const double k = 1.0 / (smax * smax);
  p.modulus = [k](double r) { return k * r * r; };
  return p;
}

inline Potential gaussian_potential(int d, double sigma = 1.0) {
  return gaussian_potential(Vec(static_cast<std::size_t>(d), sigma));
}

// 1-D V(x) = c2 x^2 + c4 x^4 + const (const supplied by the measure factory)
inline Potential even_poly_potential(double c2, double c4, double constant = 0.0) {
  if (c2 < 0.0 || c4 < 0.0)
    throw std::invalid_argument("even_poly_potential: coefficients must be nonnegative");
  Potential p;
  p.dim = 1;
  p.value = [=](const Vec& x) {
    const double t = x[0] * x[0];
    return c2 * t + c4 * t * t + constant;
  };
  p.grad = [=](const Vec& x) { return Vec{2.0 * c2 * x[0] + 4.0 * c4 * x[0] * x[0] * x[0]}; };
  p.hess = [=](const Vec& x) {
    Mat h(1);
    h(0, 0) = 2.0 * c2 + 12.0 * c4 * x[0] * x[0];
    return h;
  };
  p.convexity_lower_bound = 2.0 * c2;
  if (c4 == 0.0) p.directional_upper_bound = 2.0 * c2;
  p.even = true;
  p.unconditional = true;
  // second difference: 2 c2 y^2 + c4 (2 y^4 + 12 x^2 y^2) >= 2 c2 y^2 + 2 c4 y^4
  p.modulus = [c2, c4](double r) { return 2.0 * c2 * r * r + 2.0 * c4 * r * r * r * r; };
  return p;
}

// 2-D V(x) = coef * |x|^4, convex, rotation invariant
inline Potential radial_quartic_potential2d(double coef) {
  Potential p;
  p.dim = 2;
  p.value = [coef](const Vec& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return coef * r2 * r2;
  };
  p.grad = [coef](const Vec& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return Vec{4.0 * coef * r2 * x[0], 4.0 * coef * r2 * x[1]};
  };
  p.hess = [coef](const Vec& x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    Mat h(2);
    h(0, 0) = 4.0 * coef * (r2 + 2.0 * x[0] * x[0]);
    h(1, 1) = 4.0 * coef * (r2 + 2.0 * x[1] * x[1]);
    h(0, 1) = h(1, 0) = 8.0 * coef * x[0] * x[1];
    return h;
  };
  p.convexity_lower_bound = 0.0;
  p.even = true;
  p.unconditional = true;
  p.modulus = [coef](double r) { return 2.0 * coef * r * r * r * r; };
  return p;
}

// log-convex potential of the model measure: W(x) = -log cos(A x),
// density of nu_A is exp(+W) = 1 / cos(A x) on (-pi/2A, pi/2A)
inline Potential nu_model_potential(double a) {
  if (!(a > 0.0)) throw std::invalid_argument("nu_model_potential: A must be positive");
  Potential p;
  p.dim = 1;
  p.value = [a](const Vec& x) { return -std::log(std::cos(a * x[0])); };
  p.grad = [a](const Vec& x) { return Vec{a * std::tan(a * x[0])}; };
  p.hess = [a](const Vec& x) {
    Mat h(1);
    const double c = std::cos(a * x[0]);
    h(0, 0) = a * a / (c * c);
    return h;
  };
  p.convexity_lower_bound = a * a;
  p.even = true;
  p.unconditional = true;
  return p;
}

// 1-D product extension: V(x) = sum_i parts[i](x_i)
inline Potential product_potential(const std::vector<Potential>& parts) {
  for (const auto& q : parts)
    if (q.dim != 1) throw std::invalid_argument("product_potential: parts must be 1-D");
  const int d = static_cast<int>(parts.size());
  auto shared = std::make_shared<std::vector<Potential>>(parts);
  Potential p;
  p.dim = d;
  p.value = [shared](const Vec& x) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) v += (*shared)[i].value1(x[i]);
    return v;
  };
  p.grad = [shared](const Vec& x) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = (*shared)[i].grad1(x[i]);
    return g;
  };
  p.hess = [shared, d](const Vec& x) {
    Mat h(d);
    for (int i = 0; i < d; ++i) h(i, i) = (*shared)[static_cast<std::size_t>(i)].hess1(x[static_cast<std::size_t>(i)]);
    return h;
  };
  double kmin = kInf;
  bool have_c = true;
  double cmax = 0.0;
  bool even = true, uncond = true;
  for (const auto& q : parts) {
    kmin = std::min(kmin, q.convexity_lower_bound);
    if (q.directional_upper_bound)
      cmax = std::max(cmax, *q.directional_upper_bound);
    else
      have_c = false;
    even = even && q.even;
    uncond = uncond && q.unconditional;
  }
  p.convexity_lower_bound = kmin;
  if (have_c) p.directional_upper_bound = cmax;
  p.even = even;
  p.unconditional = uncond;
  return p;
}

// ---------------------------------------------------------------------------
// Convex bodies (for uniform measures and Monte Carlo set checks)
// ---------------------------------------------------------------------------

struct ConvexBody {
  std::string name;
  int dim = 2;
  bool symmetric = true;
  double diameter = kInf;
  std::function<bool(const Vec&)> member;
  std::function<double(const Vec&)> radial;  // sup { t >= 0 : t*u in K } for unit u
  Box bounding_box;
  double volume = kInf;
};

inline ConvexBody make_square(double halfwidth) {
  ConvexBody b;
  b.name = "square";
  b.diameter = 2.0 * std::sqrt(2.0) * halfwidth;
  b.member = [halfwidth](const Vec& x) {
    return std::fabs(x[0]) <= halfwidth && std::fabs(x[1]) <= halfwidth;
  };
  b.radial = [halfwidth](const Vec& u) {
    const double m = std::max(std::fabs(u[0]), std::fabs(u[1]));
    return m > 0.0 ? halfwidth / m : kInf;
  };
  b.bounding_box = Box::cube(2, halfwidth);
  b.volume = 4.0 * halfwidth * halfwidth;
  return b;
}

inline ConvexBody make_disk(double radius) {
  ConvexBody b;
  b.name = "disk";
  b.diameter = 2.0 * radius;
  b.member = [radius](const Vec& x) { return x[0] * x[0] + x[1] * x[1] <= radius * radius; };
  b.radial = [radius](const Vec&) { return radius; };
  b.bounding_box = Box::cube(2, radius);
  b.volume = kPi * radius * radius;
  return b;
}

inline ConvexBody make_ellipse(double ax, double by) {
  ConvexBody b;
  b.name = "ellipse";
  b.diameter = 2.0 * std::max(ax, by);
  b.member = [ax, by](const Vec& x) {
    const double u = x[0] / ax, v = x[1] / by;
    return u * u + v * v <= 1.0;
  };
  b.radial = [ax, by](const Vec& u) {
    const double s = (u[0] / ax) * (u[0] / ax) + (u[1] / by) * (u[1] / by);
    return s > 0.0 ? 1.0 / std::sqrt(s) : kInf;
  };
  b.bounding_box = Box{{Interval{-ax, ax}, Interval{-by, by}}};
  b.volume = kPi * ax * by;
  return b;
}

// unbounded symmetric strip |x_0| <= w
inline ConvexBody make_strip(double w) {
  ConvexBody b;
  b.name = "strip";
  b.diameter = kInf;
  b.member = [w](const Vec& x) { return std::fabs(x[0]) <= w; };
  b.radial = [w](const Vec& u) { return std::fabs(u[0]) > 0.0 ? w / std::fabs(u[0]) : kInf; };
  b.bounding_box = Box{{Interval{-w, w}, Interval{-kInf, kInf}}};
  return b;
}

inline ConvexBody scale_body(const ConvexBody& k, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("scale_body: scale must be positive");
  ConvexBody b = k;
  b.name = k.name + "*" + std::to_string(s);
  b.diameter = k.diameter * s;
  b.member = [inner = k.member, s](const Vec& x) {
    Vec y(x);
    for (auto& v : y) v /= s;
    return inner(y);
  };
  b.radial = [inner = k.radial, s](const Vec& u) { return s * inner(u); };
  for (auto& ivl : b.bounding_box.ax) ivl = Interval{ivl.lo * s, ivl.hi * s};
  if (std::isfinite(k.volume)) b.volume = k.volume * s * s;
  return b;
}

// ---------------------------------------------------------------------------
// Measure specifications
// ---------------------------------------------------------------------------

enum class MassKind { probability, infinite };

enum class Family {
  gaussian,          // product Gaussian, per-axis sigmas
  quartic_tilted,    // 1-D exp(-(x^2/2 + lambda x^4)) / Z
  even_quartic,      // 1-D exp(-(c2 x^2 + c4 x^4)) / Z
  exponential,       // rate * exp(-rate x) on [0, inf)
  uniform_interval,  // 1-D
  uniform_body,      // 2-D
  nu_model,          // dx / cos(A x), infinite mass
  lebesgue_halfline, // scale * dx on [0, inf), infinite mass
  radial_density,    // Psi(|x|) dx on a centered ball, target of radial transport
  density2d,         // exp(-V(x)) / Z on a finite box
  product2d          // product of two 1-D probability measures
};

struct MeasureSpec {
  Family family = Family::gaussian;
  std::string name;
  int dim = 1;
  MassKind mass = MassKind::probability;

  // potential of the density, when meaningful; for probability density kinds
  // the normalization constant is folded in so density = exp(-V).
  // nu_model stores its log-convex potential W instead (density = exp(+W)).
  Potential pot;
  bool has_potential = false;

  std::function<double(const Vec&)> density_fn;

  // finite working support used by quadrature and grids; for infinite-mass
  // families this is the open mathematical support
  Box support;
  // true when the support endpoint is a genuine boundary of the measure
  // (uniform endpoints, the 0 of exponential laws) rather than a truncation
  std::vector<std::pair<bool, bool>> hard_edge;

  bool even = false;

  // family parameters
  Vec sigmas;                                // gaussian
  double lambda = 0.0;                       // quartic_tilted
  double c2 = 0.0, c4 = 0.0;                 // even_quartic
  double rate = 1.0;                         // exponential
  double a = 0.0, b = 0.0;                   // uniform_interval
  ConvexBody body;                           // uniform_body
  double nu_a = 0.0;                         // nu_model
  double scale = 1.0;                        // lebesgue_halfline
  std::function<double(double)> radial_psi;  // radial_density
  double rmax = 0.0;                         // radial_density
  std::vector<MeasureSpec> factors;          // product2d

  double density(const Vec& x) const { return density_fn(x); }
  double density1(double x) const { return density_fn(Vec{x}); }

  const Interval& support1() const { return support.ax[0]; }

  // mass of the measure inside a box (coverage check for grids)
  double box_mass(const Box& box) const;
};

namespace detail {

// integral of exp(-V) over [lo, hi] by adaptive quadrature
inline double density_mass_1d(const Potential& v, double lo, double hi) {
  return adaptive_simpson([&](double x) { return std::exp(-v.value1(x)); }, lo, hi);
}

// expand [0, R] until V(R) - V(center) >= growth (density ratio e^-growth)
inline double growth_radius(const Potential& v, double center, double growth, double dir) {
  double r = 1.0;
  const double v0 = v.value1(center);
  for (int i = 0; i < 200; ++i) {
    if (v.value1(center + dir * r) - v0 >= growth) return r;
    r *= 1.5;
  }
  throw std::runtime_error("growth_radius: potential grows too slowly to truncate");
}

}  // namespace detail

// --- factories -------------------------------------------------------------

inline MeasureSpec make_gaussian(const Vec& sigmas) {
  MeasureSpec m;
  m.family = Family::gaussian;
  m.dim = static_cast<int>(sigmas.size());
  m.sigmas = sigmas;
  m.name = "gaussian";
  m.pot = gaussian_potential(sigmas);
  m.has_potential = true;
  m.even = true;
  m.density_fn = [v = m.pot.value](const Vec& x) { return std::exp(-v(x)); };
  for (double s : sigmas) {
    m.support.ax.push_back(Interval{-8.0 * s, 8.0 * s});  // tails below 1e-15
    m.hard_edge.emplace_back(false, false);
  }
  return m;
}

inline MeasureSpec make_standard_gaussian(int d) { return make_gaussian(Vec(static_cast<std::size_t>(d), 1.0)); }

inline MeasureSpec make_gaussian1(double sigma) { return make_gaussian(Vec{sigma}); }

// shared tail logic for normalized 1-D exp(-poly) families: support is
// +-8 standard deviations, the standard deviation measured by quadrature
inline MeasureSpec make_even_density_1d(Family fam, Potential bare, std::string name) {
  // provisional radius where the density has decayed by e^-60
  const double r0 = detail::growth_radius(bare, 0.0, 60.0, 1.0);
  const double z0 = detail::density_mass_1d(bare, -r0, r0);
  const double var = adaptive_simpson(
                         [&](double x) { return x * x * std::exp(-bare.value1(x)); }, -r0, r0) /
                     z0;
  const double r = std::min(r0, 8.0 * std::sqrt(var));
  const double z = detail::density_mass_1d(bare, -r, r);

  MeasureSpec m;
  m.family = fam;
  m.dim = 1;
  m.name = std::move(name);
  m.pot = bare;
  const double logz = std::log(z);
  auto baseval = bare.value;
  m.pot.value = [baseval, logz](const Vec& x) { return baseval(x) + logz; };
  m.has_potential = true;
  m.even = true;
  m.density_fn = [v = m.pot.value](const Vec& x) { return std::exp(-v(x)); };
  m.support.ax.push_back(Interval{-r, r});
  m.hard_edge.emplace_back(false, false);
  return m;
}

// exp(-(x^2/2 + lambda x^4)) / Z
inline MeasureSpec make_quartic_tilted(double lambda) {
  MeasureSpec m = make_even_density_1d(Family::quartic_tilted,
                                       even_poly_potential(0.5, lambda), "quartic_tilted");
  m.lambda = lambda;
  return m;
}

// exp(-(c2 x^2 + c4 x^4)) / Z
inline MeasureSpec make_even_quartic(double c2, double c4) {
  if (!(c4 > 0.0 || c2 > 0.0))
    throw std::invalid_argument("make_even_quartic: need a positive coefficient");
  MeasureSpec m = make_even_density_1d(Family::even_quartic,
                                       even_poly_potential(c2, c4), "even_quartic");
  m.c2 = c2;
  m.c4 = c4;
  return m;
}

inline MeasureSpec make_exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("make_exponential: rate must be positive");
  MeasureSpec m;
  m.family = Family::exponential;
  m.dim = 1;
  m.rate = rate;
  m.name = "exponential";
  Potential p;
  p.dim = 1;
  p.value = [rate](const Vec& x) { return rate * x[0] - std::log(rate); };
  p.grad = [rate](const Vec&) { return Vec{rate}; };
  p.hess = [](const Vec&) { return Mat(1); };
  p.convexity_lower_bound = 0.0;
  m.pot = p;
  m.has_potential = true;
  m.density_fn = [rate](const Vec& x) { return x[0] >= 0.0 ? rate * std::exp(-rate * x[0]) : 0.0; };
  // window tail mass e^{-40} ~ 4e-18 matches the gaussian z = 8 tail scale;
  // exp -> exp pairs keep equal renormalizers, so linear maps stay exact
  m.support.ax.push_back(Interval{0.0, 40.0 / rate});
  m.hard_edge.emplace_back(true, false);
  return m;
}

inline MeasureSpec make_uniform_interval(double a, double b) {
  if (!(b > a)) throw std::invalid_argument("make_uniform_interval: need a < b");
  MeasureSpec m;
  m.family = Family::uniform_interval;
  m.dim = 1;
  m.a = a;
  m.b = b;
  m.name = "uniform_interval";
  const double dens = 1.0 / (b - a);
  m.density_fn = [a, b, dens](const Vec& x) { return (x[0] >= a && x[0] <= b) ? dens : 0.0; };
  m.support.ax.push_back(Interval{a, b});
  m.hard_edge.emplace_back(true, true);
  m.even = (a == -b);
  return m;
}

inline MeasureSpec make_nu_model(double a) {
  MeasureSpec m;
  m.family = Family::nu_model;
  m.dim = 1;
  m.nu_a = a;
  m.name = "nu_model";
  m.mass = MassKind::infinite;
  m.pot = nu_model_potential(a);  // log-convex potential W, density = exp(+W)
  m.has_potential = true;
  m.even = true;
  const double half = 0.5 * kPi / a;
  m.density_fn = [a](const Vec& x) { return 1.0 / std::cos(a * x[0]); };
  m.support.ax.push_back(Interval{-half, half});
  m.hard_edge.emplace_back(true, true);
  return m;
}

inline MeasureSpec make_lebesgue_halfline(double scale = 1.0, double working_radius = 1024.0) {
  if (!(scale > 0.0)) throw std::invalid_argument("make_lebesgue_halfline: scale must be positive");
  MeasureSpec m;
  m.family = Family::lebesgue_halfline;
  m.dim = 1;
  m.scale = scale;
  m.name = "lebesgue_halfline";
  m.mass = MassKind::infinite;
  m.density_fn = [scale](const Vec& x) { return x[0] >= 0.0 ? scale : 0.0; };
  m.support.ax.push_back(Interval{0.0, working_radius});
  m.hard_edge.emplace_back(true, false);
  return m;
}

inline MeasureSpec make_uniform_on_body(const ConvexBody& body) {
  if (body.dim != 2) throw std::invalid_argument("make_uniform_on_body: only 2-D bodies");
  if (!std::isfinite(body.volume))
    throw std::invalid_argument("make_uniform_on_body: body must have finite volume");
  MeasureSpec m;
  m.family = Family::uniform_body;
  m.dim = 2;
  m.body = body;
  m.name = "uniform_" + body.name;
  const double dens = 1.0 / body.volume;
  m.density_fn = [member = body.member, dens](const Vec& x) { return member(x) ? dens : 0.0; };
  m.support = body.bounding_box;
  m.hard_edge.assign(2, {true, true});
  m.even = body.symmetric;
  return m;
}

inline MeasureSpec make_radial_density(std::function<double(double)> psi, int d, double rmax) {
  if (d < 1) throw std::invalid_argument("make_radial_density: dimension must be >= 1");
  if (!(rmax > 0.0)) throw std::invalid_argument("make_radial_density: rmax must be positive");
  for (int i = 0; i <= 64; ++i) {
    const double r = rmax * i / 64.0;
    if (!(psi(r) > 0.0))
      throw std::invalid_argument("make_radial_density: Psi must be positive on [0, rmax]");
  }
  MeasureSpec m;
  m.family = Family::radial_density;
  m.dim = d;
  m.rmax = rmax;
  m.radial_psi = psi;
  m.name = "radial_density";
  m.mass = MassKind::infinite;  // not a probability measure; used as radial transport target
  m.density_fn = [psi](const Vec& x) { return psi(norm2(x)); };
  for (int i = 0; i < d; ++i) {
    m.support.ax.push_back(Interval{-rmax, rmax});
    m.hard_edge.emplace_back(true, true);
  }
  m.even = true;
  return m;
}

// exp(-V)/Z restricted to a finite box, Z by tensor Gauss-Legendre
inline MeasureSpec make_density2d(const Potential& v, const Box& box, std::string name,
                                  int quad_n = 200) {
  if (v.dim != 2 || box.dim() != 2)
    throw std::invalid_argument("make_density2d: potential and box must be 2-D");
  const double z = gl_integrate_2d(
      [&](double x, double y) { return std::exp(-v.value(Vec{x, y})); }, box, quad_n);
  MeasureSpec m;
  m.family = Family::density2d;
  m.dim = 2;
  m.name = std::move(name);
  m.pot = v;
  const double logz = std::log(z);
  auto baseval = v.value;
  m.pot.value = [baseval, logz](const Vec& x) { return baseval(x) + logz; };
  m.has_potential = true;
  m.even = v.even;
  m.density_fn = [val = m.pot.value](const Vec& x) { return std::exp(-val(x)); };
  m.support = box;
  m.hard_edge.assign(2, {false, false});
  return m;
}

inline MeasureSpec make_product2d(MeasureSpec fx, MeasureSpec fy) {
  if (fx.dim != 1 || fy.dim != 1)
    throw std::invalid_argument("make_product2d: factors must be 1-D");
  if (fx.mass != MassKind::probability || fy.mass != MassKind::probability)
    throw std::invalid_argument("make_product2d: factors must be probability measures");
  MeasureSpec m;
  m.family = Family::product2d;
  m.dim = 2;
  m.name = fx.name + "*" + fy.name;
  m.even = fx.even && fy.even;
  m.support.ax = {fx.support.ax[0], fy.support.ax[0]};
  m.hard_edge = {fx.hard_edge[0], fy.hard_edge[0]};
  auto fxp = std::make_shared<MeasureSpec>(std::move(fx));
  auto fyp = std::make_shared<MeasureSpec>(std::move(fy));
  m.density_fn = [fxp, fyp](const Vec& x) {
    return fxp->density1(x[0]) * fyp->density1(x[1]);
  };
  m.factors = {*fxp, *fyp};
  if (fxp->has_potential && fyp->has_potential) {
    m.pot = product_potential({fxp->pot, fyp->pot});
    m.has_potential = true;
  }
  return m;
}

// --- box coverage ------------------------------------------------------------

inline double MeasureSpec::box_mass(const Box& box) const {
  if (box.dim() != dim) throw std::invalid_argument("box_mass: dimension mismatch");
  switch (family) {
    case Family::gaussian: {
      double p = 1.0;
      for (int i = 0; i < dim; ++i) {
        const double s = sigmas[static_cast<std::size_t>(i)];
        const auto& ivl = box.ax[static_cast<std::size_t>(i)];
        p *= gaussian_cdf(ivl.hi / s) - gaussian_cdf(ivl.lo / s);
      }
      return p;
    }
    case Family::product2d:
      return factors[0].box_mass(Box{{box.ax[0]}}) * factors[1].box_mass(Box{{box.ax[1]}});
    case Family::quartic_tilted:
    case Family::even_quartic:
    case Family::exponential:
    case Family::uniform_interval: {
      const auto& sup = support.ax[0];
      const double lo = std::max(sup.lo, box.ax[0].lo);
      const double hi = std::min(sup.hi, box.ax[0].hi);
      if (hi <= lo) return 0.0;
      return adaptive_simpson([this](double x) { return density1(x); }, lo, hi);
    }
    case Family::density2d: {
      double inside = gl_integrate_2d([this](double x, double y) { return density(Vec{x, y}); },
                                      box, 200);
      return std::min(inside, 1.0);
    }
    case Family::uniform_body: {
      const Box& bb = body.bounding_box;
      bool covered = true;
      for (int i = 0; i < 2; ++i)
        covered = covered && box.ax[static_cast<std::size_t>(i)].lo <= bb.ax[static_cast<std::size_t>(i)].lo &&
                  box.ax[static_cast<std::size_t>(i)].hi >= bb.ax[static_cast<std::size_t>(i)].hi;
      if (covered) return 1.0;
      // coarse membership fraction on a fine grid
      const int n = 400;
      long in_body = 0, in_both = 0;
      const Box& s = body.bounding_box;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Vec x{s.ax[0].lo + (i + 0.5) * s.ax[0].length() / n,
                s.ax[1].lo + (j + 0.5) * s.ax[1].length() / n};
          if (body.member(x)) {
            ++in_body;
            if (box.contains(x)) ++in_both;
          }
        }
      return in_body > 0 ? static_cast<double>(in_both) / static_cast<double>(in_body) : 0.0;
    }
    default:
      throw std::invalid_argument("box_mass: not defined for infinite-mass families");
  }
}

// uniform audit grid over an interval
inline std::vector<Vec> audit_grid_1d(const Interval& ivl, int n) {
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    pts.push_back(Vec{ivl.lo + ivl.length() * i / (n - 1)});
  return pts;
}

inline std::vector<Vec> audit_grid_2d(const Box& box, int n_per_axis) {
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(n_per_axis) * static_cast<std::size_t>(n_per_axis));
  for (int i = 0; i < n_per_axis; ++i)
    for (int j = 0; j < n_per_axis; ++j)
      pts.push_back(Vec{box.ax[0].lo + box.ax[0].length() * i / (n_per_axis - 1),
                        box.ax[1].lo + box.ax[1].length() * j / (n_per_axis - 1)});
  return pts;
}

}  // namespace ctlab
