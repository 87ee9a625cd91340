#pragma once
// Downstream inequality checks: Gaussian correlation for ellipsoids, the
// Hargé moment bound, the (B) dilation inequality, the strong Gaussian
// Poincaré inequality, 1-D isoperimetric profiles by brute force, the
// Bakry-Ledoux profile comparison, and concentration transfer through a
// uniform convexity modulus.
//
// Monte Carlo checks state pass/fail against 3-sigma confidence bands and
// never claim a violation from noise alone. Every check draws from a
// private PRNG stream derived from (master seed, check name), so reports
// are bit-reproducible; sub-estimates that must be independent derive
// sub-streams ("name/A", "name/B", ...).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctlab/core.hpp"
#include "ctlab/gauss_hermite.hpp"
#include "ctlab/measures.hpp"
#include "ctlab/report.hpp"
#include "ctlab/rng.hpp"
#include "ctlab/transport1d.hpp"

namespace ctlab {

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
  std::uint64_t seed = 0;
};

// mean of fn over n standard Gaussian samples in dimension d
inline MCEstimate mc_gaussian_mean(const std::function<double(const Vec&)>& fn, int d, long n,
                                   Rng rng) {
  if (n < 1000) throw std::invalid_argument("mc_gaussian_mean: need n >= 1000");
  const std::uint64_t stream_seed = rng.next();  // records the stream position
  Vec x(static_cast<std::size_t>(d));
  double sum = 0.0, sumsq = 0.0;
  for (long k = 0; k < n; ++k) {
    rng.fill_normal(x);
    const double v = fn(x);
    sum += v;
    sumsq += v * v;
  }
  MCEstimate e;
  e.n = n;
  e.seed = stream_seed;
  e.mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, (sumsq - sum * sum / static_cast<double>(n)) /
                                       static_cast<double>(n - 1));
  e.std_error = std::sqrt(var / static_cast<double>(n));
  return e;
}

inline MCEstimate mc_gaussian_prob(const std::function<bool(const Vec&)>& member, int d, long n,
                                   Rng rng) {
  return mc_gaussian_mean([&member](const Vec& x) { return member(x) ? 1.0 : 0.0; }, d, n,
                          std::move(rng));
}

// gamma(A cap B) >= gamma(A) gamma(B) for symmetric convex A and ellipsoid
// B, tested with independent streams and a 3-sigma combined band
inline CheckEntry correlation_check(const ConvexBody& a, const ConvexBody& b, int d, long n,
                                    std::uint64_t master_seed, std::string digest = "") {
  const MCEstimate pa = mc_gaussian_prob(a.member, d, n, derive_stream(master_seed, "correlation/A"));
  const MCEstimate pb = mc_gaussian_prob(b.member, d, n, derive_stream(master_seed, "correlation/B"));
  const MCEstimate pab = mc_gaussian_prob(
      [&](const Vec& x) { return a.member(x) && b.member(x); }, d, n,
      derive_stream(master_seed, "correlation/AB"));
  const double combined = std::sqrt(pab.std_error * pab.std_error +
                                    pa.mean * pa.mean * pb.std_error * pb.std_error +
                                    pb.mean * pb.mean * pa.std_error * pa.std_error);
  CheckEntry e = make_entry("correlation_" + a.name + "_" + b.name, "gaussian-correlation-ellipsoid",
                            pab.mean, pa.mean * pb.mean, "lower-abs", 3.0 * combined,
                            std::move(digest), master_seed);
  e.note = "n=" + std::to_string(n);
  return e;
}

// E[f g] <= E[f] E[g] under gamma for even log-concave f and even convex g
inline CheckEntry harge_check(const std::function<double(const Vec&)>& f,
                              const std::function<double(const Vec&)>& g, int d, long n,
                              std::uint64_t master_seed, std::string digest = "") {
  const MCEstimate ef = mc_gaussian_mean(f, d, n, derive_stream(master_seed, "harge/f"));
  const MCEstimate eg = mc_gaussian_mean(g, d, n, derive_stream(master_seed, "harge/g"));
  const MCEstimate efg = mc_gaussian_mean([&](const Vec& x) { return f(x) * g(x); }, d, n,
                                          derive_stream(master_seed, "harge/fg"));
  const double combined = std::sqrt(efg.std_error * efg.std_error +
                                    ef.mean * ef.mean * eg.std_error * eg.std_error +
                                    eg.mean * eg.mean * ef.std_error * ef.std_error);
  CheckEntry e = make_entry("harge", "harge-moment-bound", efg.mean, ef.mean * eg.mean,
                            "upper-abs", 3.0 * combined, std::move(digest), master_seed);
  e.note = "n=" + std::to_string(n);
  return e;
}

// gamma(sqrt(ab) K)^2 >= gamma(aK) gamma(bK) plus a 9-point discrete
// log-concavity scan of t -> log gamma(e^t K)
inline std::vector<CheckEntry> b_inequality_check(const ConvexBody& k, double a, double b, int d,
                                                  long n, std::uint64_t master_seed,
                                                  std::string digest = "") {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("b_inequality_check: scales must be > 0");
  auto scaled_prob = [&](double s, const std::string& tag) {
    return mc_gaussian_prob(
        [&k, s](const Vec& x) {
          Vec y(x);
          for (auto& v : y) v /= s;
          return k.member(y);
        },
        d, n, derive_stream(master_seed, "b_inequality/" + tag));
  };

  std::vector<CheckEntry> out;
  const double mid = std::sqrt(a * b);
  const MCEstimate pm = scaled_prob(mid, "mid");
  const MCEstimate pa = scaled_prob(a, "a");
  const MCEstimate pb = scaled_prob(b, "b");
  const double combined = std::sqrt(4.0 * pm.mean * pm.mean * pm.std_error * pm.std_error +
                                    pa.mean * pa.mean * pb.std_error * pb.std_error +
                                    pb.mean * pb.mean * pa.std_error * pa.std_error);
  CheckEntry main = make_entry("b_inequality_" + k.name, "b-inequality", pm.mean * pm.mean,
                               pa.mean * pb.mean, "lower-abs", 3.0 * combined, digest,
                               master_seed);
  main.note = "n=" + std::to_string(n);
  out.push_back(main);

  // discrete concavity of the log-probability curve on 9 dilation exponents
  const int m = 9;
  const double t0 = std::log(a), t1 = std::log(b);
  Vec logp(m), se_rel(m);
  for (int i = 0; i < m; ++i) {
    const double t = t0 + (t1 - t0) * i / (m - 1);
    const MCEstimate p = scaled_prob(std::exp(t), "curve" + std::to_string(i));
    logp[static_cast<std::size_t>(i)] = std::log(p.mean);
    se_rel[static_cast<std::size_t>(i)] = p.std_error / p.mean;  // error of log p
  }
  double worst_secdiff = -kInf, worst_band = 0.0;
  for (int i = 1; i + 1 < m; ++i) {
    const double d2 = logp[static_cast<std::size_t>(i) + 1] - 2.0 * logp[static_cast<std::size_t>(i)] +
                      logp[static_cast<std::size_t>(i) - 1];
    const double band = std::sqrt(se_rel[static_cast<std::size_t>(i) + 1] * se_rel[static_cast<std::size_t>(i) + 1] +
                                  4.0 * se_rel[static_cast<std::size_t>(i)] * se_rel[static_cast<std::size_t>(i)] +
                                  se_rel[static_cast<std::size_t>(i) - 1] * se_rel[static_cast<std::size_t>(i) - 1]);
    if (d2 > worst_secdiff) {
      worst_secdiff = d2;
      worst_band = band;
    }
  }
  CheckEntry curve = make_entry("b_inequality_curve_" + k.name, "b-inequality", worst_secdiff, 0.0,
                                "upper-abs", 3.0 * worst_band, digest, master_seed);
  curve.note = "max second difference of log gamma(e^t K) over 9-point stencil";
  out.push_back(curve);
  return out;
}

// ---------------------------------------------------------------------------
// Strong Gaussian Poincaré: int f^2 <= 1/2 int |grad f|^2 for mean-zero f
// with mean-zero gradient
// ---------------------------------------------------------------------------

struct TestFunction {
  std::string name;
  int dim = 1;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
};

inline CheckEntry strong_poincare_check(const TestFunction& f, int quad_order = 64,
                                        double precondition_tol = 1e-8,
                                        std::string digest = "") {
  auto expect = [&](const std::function<double(const Vec&)>& h) {
    if (f.dim == 1)
      return gaussian_expect([&](double x) { return h(Vec{x}); }, quad_order);
    if (f.dim == 2) {
      const QuadRule& rule = gauss_hermite(quad_order);
      const double s2 = std::sqrt(2.0);
      double s = 0.0;
      for (std::size_t i = 0; i < rule.node.size(); ++i)
        for (std::size_t j = 0; j < rule.node.size(); ++j)
          s += rule.weight[i] * rule.weight[j] * h(Vec{s2 * rule.node[i], s2 * rule.node[j]});
      return s / kPi;
    }
    throw std::invalid_argument("strong_poincare_check: dimension must be 1 or 2");
  };

  const double mean_f = expect(f.value);
  double worst_grad_mean = 0.0;
  for (int i = 0; i < f.dim; ++i)
    worst_grad_mean = std::max(
        worst_grad_mean, std::fabs(expect([&](const Vec& x) { return f.grad(x)[static_cast<std::size_t>(i)]; })));

  CheckEntry e;
  e.name = "strong_poincare_" + f.name;
  e.theorem = "strong-gaussian-poincare";
  e.direction = "upper";
  e.tolerance = 1e-6;
  e.inputs_digest = std::move(digest);
  if (std::fabs(mean_f) > precondition_tol || worst_grad_mean > precondition_tol) {
    e.status = CheckStatus::precondition_failed;
    e.note = "mean(f) or mean(grad f) not zero to " + std::to_string(precondition_tol);
    return e;
  }
  const double lhs = expect([&](const Vec& x) {
    const double v = f.value(x);
    return v * v;
  });
  const double rhs = 0.5 * expect([&](const Vec& x) {
    const Vec g = f.grad(x);
    double s = 0.0;
    for (double c : g) s += c * c;
    return s;
  });
  e.computed_value = lhs;
  e.bound_value = rhs;
  e.status =
      direction_holds("upper", lhs, rhs, e.tolerance) ? CheckStatus::passed : CheckStatus::failed;
  return e;
}

// ---------------------------------------------------------------------------
// 1-D isoperimetric profiles by brute force in mass coordinates
// ---------------------------------------------------------------------------

// Candidates are half-lines (probability measures only; they carry infinite
// mass otherwise) and single intervals parameterized by the mass coordinate
// of the left endpoint. The interval scan uses a uniform grid refined by
// ternary search around the best cell.
inline double isoperimetric_profile_1d(const MeasureSpec& m, const Cdf1D& cdf, double t,
                                       int grid = 2000) {
  if (m.dim != 1) throw std::invalid_argument("isoperimetric_profile_1d: 1-D measures only");
  if (!(t > 0.0 && t < 1.0))
    throw std::invalid_argument("isoperimetric_profile_1d: t outside (0, 1)");
  auto boundary_halfline_lo = [&]() { return m.density1(cdf.quantile_lower(t)); };
  auto boundary_halfline_hi = [&]() { return m.density1(cdf.quantile_upper(t)); };
  auto boundary_interval = [&](double s) {
    return m.density1(cdf.quantile_lower(s)) + m.density1(cdf.quantile_lower(s + t));
  };
  double best = std::min(boundary_halfline_lo(), boundary_halfline_hi());
  // interval scan over the left-endpoint mass s in (0, 1 - t)
  const double span = 1.0 - t;
  double best_s = -1.0;
  for (int i = 1; i < grid; ++i) {
    const double s = span * i / grid;
    const double v = boundary_interval(s);
    if (v < best) {
      best = v;
      best_s = s;
    }
  }
  if (best_s >= 0.0) {
    // ternary polish inside the bracketing cells
    double lo = std::max(best_s - span / grid, span * 1e-9);
    double hi = std::min(best_s + span / grid, span * (1.0 - 1e-9));
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (boundary_interval(m1) <= boundary_interval(m2))
        hi = m2;
      else
        lo = m1;
    }
    best = std::min(best, boundary_interval(0.5 * (lo + hi)));
  }
  return best;
}

inline double isoperimetric_profile_1d(const MeasureSpec& m, double t, int grid = 2000) {
  if (m.dim != 1) throw std::invalid_argument("isoperimetric_profile_1d: 1-D measures only");
  if (m.mass == MassKind::probability) {
    Cdf1D cdf(m);
    return isoperimetric_profile_1d(m, cdf, t, grid);
  }

  // infinite mass: half-lines are excluded automatically (they would carry
  // infinite measure); intervals are parameterized by the signed mass s of
  // the left endpoint
  const SignedMass1D h = signed_mass_handle(m);
  const double edge = h.mass(h.domain.hi - h.domain.length() * 1e-12);
  if (!(t > 0.0 && t < 2.0 * edge))
    throw std::invalid_argument("isoperimetric_profile_1d: t outside the measurable range");
  auto boundary_interval = [&](double s) {
    return h.dens(h.quantile(s)) + h.dens(h.quantile(s + t));
  };
  // the density in mass coordinates grows toward the edges, so scan a
  // window around the symmetric interval and polish
  const double lo_limit = std::max(-edge, -t / 2.0 - 0.5 * edge);
  const double hi_limit = std::min(edge - t, -t / 2.0 + 0.5 * edge);
  double best = kInf, best_s = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double s = lo_limit + (hi_limit - lo_limit) * i / grid;
    const double v = boundary_interval(s);
    if (v < best) {
      best = v;
      best_s = s;
    }
  }
  double lo = std::max(lo_limit, best_s - (hi_limit - lo_limit) / grid);
  double hi = std::min(hi_limit, best_s + (hi_limit - lo_limit) / grid);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (boundary_interval(m1) <= boundary_interval(m2))
      hi = m2;
    else
      lo = m1;
  }
  return std::min(best, boundary_interval(0.5 * (lo + hi)));
}

// exact Gaussian isoperimetric function I_gamma(t) = pdf(quantile(t))
inline double gaussian_isoperimetric(double t) { return gaussian_pdf(gaussian_quantile(t)); }

// profile(mu) >= profile(gamma) pointwise for 1-D mu = e^{-W} dx with
// audited D^2 W >= 1; the Gaussian side uses the closed form
inline std::vector<CheckEntry> bakry_ledoux_check(const MeasureSpec& m, const Vec& t_list,
                                                  double tol = 1e-6, std::string digest = "") {
  if (!m.has_potential)
    throw std::invalid_argument("bakry_ledoux_check: measure needs a potential");
  std::vector<CheckEntry> out;
  const AuditResult audit =
      audit_convexity(m.pot, audit_grid_1d(m.support.ax[0], 2001));
  const bool usable = m.pot.convexity_lower_bound >= 1.0 && audit.ok;
  const Cdf1D cdf(m);
  for (double t : t_list) {
    CheckEntry e;
    e.name = "bakry_ledoux_t" + std::to_string(t);
    e.theorem = "bakry-ledoux-profile";
    e.direction = "lower-abs";
    e.tolerance = tol;
    e.inputs_digest = digest;
    if (!usable) {
      e.status = CheckStatus::precondition_failed;
      e.note = "convexity bound below 1 or audit failed";
      out.push_back(e);
      continue;
    }
    e.computed_value = isoperimetric_profile_1d(m, cdf, t);
    e.bound_value = gaussian_isoperimetric(t);
    e.status = direction_holds("lower-abs", e.computed_value, e.bound_value, tol)
                   ? CheckStatus::passed
                   : CheckStatus::failed;
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Concentration transfer through a uniform convexity modulus
// ---------------------------------------------------------------------------

// For half-lines A = (-inf, q_a] of nu-measure a and enlargements A_r:
//   nu(A_r) >= Phi(Phi^{-1}(a) + sqrt(delta(r/8))/2)
// and for a >= 1/2 the exponential corollary
//   nu(A_r) >= 1 - exp(-delta(r/8)/8)/2.
inline std::vector<CheckEntry> concentration_transfer_check(const MeasureSpec& m,
                                                            const Vec& a_list, const Vec& r_list,
                                                            double tol = 1e-9,
                                                            std::string digest = "") {
  if (m.dim != 1 || m.mass != MassKind::probability || !m.has_potential || !m.pot.modulus)
    throw std::invalid_argument(
        "concentration_transfer_check: need a 1-D probability measure with a declared modulus");
  const auto& delta = *m.pot.modulus;
  // audit the modulus on a product grid before using it
  const AuditResult audit = audit_modulus_lower(
      m.pot, audit_grid_1d(m.support.ax[0], 201), audit_grid_1d(Interval{-4.0, 4.0}, 81));
  Cdf1D cdf(m);
  std::vector<CheckEntry> out;
  for (double a : a_list)
    for (double r : r_list) {
      CheckEntry e;
      e.name = "concentration_a" + std::to_string(a) + "_r" + std::to_string(r);
      e.theorem = "concentration-transfer";
      e.direction = "lower-abs";
      e.tolerance = tol;
      e.inputs_digest = digest;
      if (!audit.ok) {
        e.status = CheckStatus::precondition_failed;
        e.note = "modulus audit failed";
        out.push_back(e);
        continue;
      }
      const double qa = cdf.quantile_lower(a);
      const double mass_r = 1.0 - cdf.upper(std::min(qa + r, cdf.domain().hi));
      e.computed_value = mass_r;
      e.bound_value = gaussian_cdf(gaussian_quantile(a) + 0.5 * std::sqrt(delta(r / 8.0)));
      e.status = direction_holds("lower-abs", mass_r, e.bound_value, tol) ? CheckStatus::passed
                                                                          : CheckStatus::failed;
      out.push_back(e);
      if (a >= 0.5) {
        CheckEntry c;
        c.name = "concentration_exp_a" + std::to_string(a) + "_r" + std::to_string(r);
        c.theorem = "concentration-transfer";
        c.direction = "lower-abs";
        c.tolerance = tol;
        c.inputs_digest = digest;
        c.computed_value = mass_r;
        c.bound_value = 1.0 - 0.5 * std::exp(-delta(r / 8.0) / 8.0);
        c.status = direction_holds("lower-abs", mass_r, c.bound_value, tol) ? CheckStatus::passed
                                                                            : CheckStatus::failed;
        out.push_back(c);
      }
    }
  return out;
}

}  // namespace ctlab
