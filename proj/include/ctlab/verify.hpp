#pragma once
// Certification diagnostics applied to transport maps: Lipschitz constants,
// second-difference quotients of the convex potential, Hölder and uniform
// convexity moduli, L^p bounds on the map derivative, and the scaling law
// for maps onto dilated bodies.
//
// Estimator bias directions are deliberate: pairwise quotients bound the
// Lipschitz constant from below (safe for <=-type certificates only when
// the map derivative is exact), Jacobian sup over a grid inherits only the
// grid bias. Entropic maps are sampled on interior nodes with a declared
// margin where truncation bias dominates.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctlab/core.hpp"
#include "ctlab/grid_ot.hpp"
#include "ctlab/measures.hpp"
#include "ctlab/quadrature.hpp"
#include "ctlab/report.hpp"
#include "ctlab/rng.hpp"
#include "ctlab/rootfind.hpp"
#include "ctlab/transport_map.hpp"

namespace ctlab {

// max over sampled pairs of |T(x) - T(y)| / |x - y|; lower bound on the
// true Lipschitz constant; coincident pairs are skipped and counted
inline double lipschitz_pairwise(const TransportMap& t, const std::function<Vec()>& sample,
                                 int n_pairs, long* skipped = nullptr) {
  if (n_pairs < 1) throw std::invalid_argument("lipschitz_pairwise: need n_pairs >= 1");
  double best = 0.0;
  long skip = 0;
  for (int k = 0; k < n_pairs; ++k) {
    const Vec x = sample(), y = sample();
    const double d = std::sqrt(dist2(x, y));
    if (d < 1e-14) {
      ++skip;
      continue;
    }
    const double q = std::sqrt(dist2(t.forward(x), t.forward(y))) / d;
    best = std::max(best, q);
  }
  if (skipped) *skipped = skip;
  return best;
}

// max spectral norm of the Jacobian over a point grid
inline double jacobian_opnorm_sup(const TransportMap& t, const std::vector<Vec>& grid) {
  if (!t.has_jacobian()) throw std::invalid_argument("jacobian_opnorm_sup: no jacobian");
  double best = 0.0;
  for (const Vec& x : grid) {
    const Mat j = t.jacobian(x);
    for (double v : j.a)
      if (!std::isfinite(v)) throw std::runtime_error("jacobian_opnorm_sup: non-finite entry");
    best = std::max(best, j.n == 1 ? std::fabs(j(0, 0)) : operator_norm(j));
  }
  return best;
}

// centered second difference of the potential along a unit direction
inline double second_difference_phi(const std::function<double(const Vec&)>& phi, const Vec& x,
                                    const Vec& e, double t) {
  Vec xp(x), xm(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] += t * e[i];
    xm[i] -= t * e[i];
  }
  return phi(xp) + phi(xm) - 2.0 * phi(x);
}

// samples of delta2 Phi / t^2, the discrete curvature along e
inline Vec second_diff_quotient(const std::function<double(const Vec&)>& phi, const Vec& e,
                                double t, const std::vector<Vec>& grid) {
  Vec out;
  out.reserve(grid.size());
  for (const Vec& x : grid) out.push_back(second_difference_phi(phi, x, e, t) / (t * t));
  return out;
}

// delta2 Phi must decay along |x| -> edge for maps whose target forbids
// linear growth; inapplicable pairs (linear maps) are recorded as such
inline CheckEntry incremental_decay_check(const std::function<double(const Vec&)>& phi, double t,
                                          const Vec& xs, double decay_tol, bool applicable,
                                          std::string digest = "", std::string note = "") {
  CheckEntry e;
  e.name = "incremental_decay";
  e.theorem = "second-difference-decay";
  e.direction = "upper-abs";
  e.tolerance = decay_tol;
  e.inputs_digest = std::move(digest);
  e.note = std::move(note);
  if (!applicable) {
    e.status = CheckStatus::not_applicable;
    e.note += (e.note.empty() ? "" : "; ") + std::string("linear-growth target: lemma inapplicable");
    return e;
  }
  if (xs.size() < 3) throw std::invalid_argument("incremental_decay_check: need >= 3 points");
  Vec vals;
  vals.reserve(xs.size());
  for (double x : xs) vals.push_back(second_difference_phi(phi, Vec{x}, Vec{1.0}, t));
  const double last = vals.back();
  e.computed_value = last;
  e.bound_value = 0.0;
  const bool decreasing_tail = vals[vals.size() - 1] <= vals[vals.size() - 2] &&
                               vals[vals.size() - 2] <= vals[vals.size() - 3];
  if (last <= decay_tol)
    e.status = CheckStatus::passed;
  else if (decreasing_tail)
    e.status = CheckStatus::inconclusive;  // still decaying, domain exhausted
  else
    e.status = CheckStatus::failed;
  return e;
}

// ---------------------------------------------------------------------------
// Hölder modulus of the potential
// ---------------------------------------------------------------------------

struct HolderInputs {
  const Potential* source = nullptr;  // second difference <= a_p |y|^{p+1}
  const Potential* target = nullptr;  // second difference >= a_q |y|^{q+1}
  double a_p = 1.0, p = 1.0;
  double a_q = 1.0, q = 1.0;
};

// delta2 Phi(x, t) <= 2 (A_p/A_q)^{1/(q+1)} t^{1+alpha}, alpha = (p+1)/(q+1);
// the declared moduli are audited first and a violation aborts the check
inline CheckEntry holder_modulus_check(const std::function<double(const Vec&)>& phi,
                                       const HolderInputs& in, const Vec& x_grid,
                                       const Vec& t_list, const std::vector<Vec>& audit_xs,
                                       const std::vector<Vec>& audit_ys,
                                       std::string digest = "") {
  CheckEntry e;
  e.name = "holder_modulus";
  e.theorem = "hoelder-lipschitz-modulus";
  e.direction = "upper";
  e.tolerance = 1e-9;
  e.inputs_digest = std::move(digest);

  const AuditResult src_ok = audit_secdiff_upper(*in.source, in.a_p, in.p, audit_xs, audit_ys);
  const AuditResult tgt_ok = audit_secdiff_lower(*in.target, in.a_q, in.q, audit_xs, audit_ys);
  if (!src_ok.ok || !tgt_ok.ok) {
    e.status = CheckStatus::precondition_failed;
    e.note = "modulus audit failed: worst gap " +
             std::to_string(std::max(src_ok.worst_gap, tgt_ok.worst_gap));
    return e;
  }

  const double alpha = (in.p + 1.0) / (in.q + 1.0);
  const double bound = 2.0 * std::pow(in.a_p / in.a_q, 1.0 / (in.q + 1.0));
  double worst = 0.0;
  for (double x : x_grid)
    for (double t : t_list)
      worst = std::max(worst,
                       second_difference_phi(phi, Vec{x}, Vec{1.0}, t) / std::pow(t, 1.0 + alpha));
  e.computed_value = worst;
  e.bound_value = bound;
  e.status = direction_holds("upper", worst, bound, e.tolerance) ? CheckStatus::passed
                                                                 : CheckStatus::failed;
  return e;
}

// ---------------------------------------------------------------------------
// Concentration-style gradient modulus
// ---------------------------------------------------------------------------

// |T(x) - T(y)| <= 8 delta^{-1}(4 |x-y|^2) for targets with uniform
// convexity modulus delta (audited by the caller); delta is inverted
// numerically on [0, r_max]
inline CheckEntry ms_modulus_check(const TransportMap& t,
                                   const std::function<double(double)>& delta, double r_max,
                                   const std::function<Vec()>& sample, int n_pairs,
                                   std::string digest = "", std::uint64_t seed = 0) {
  auto delta_inv = [&](double v) {
    if (v <= 0.0) return 0.0;
    if (v > delta(r_max))
      throw std::out_of_range("ms_modulus_check: delta^{-1} outside audited range");
    return solve_bisection([&](double r) { return delta(r) - v; }, 0.0, r_max);
  };
  double worst = -kInf;
  for (int k = 0; k < n_pairs; ++k) {
    const Vec x = sample(), y = sample();
    const double d = std::sqrt(dist2(x, y));
    if (d < 1e-14) continue;
    const double lhs = std::sqrt(dist2(t.forward(x), t.forward(y)));
    const double rhs = 8.0 * delta_inv(4.0 * d * d);
    worst = std::max(worst, lhs - rhs);
  }
  CheckEntry e = make_entry("ms_modulus", "ms-gradient-modulus", worst, 0.0, "upper-abs", 1e-9,
                            std::move(digest), seed);
  return e;
}

// |grad f(x + t h) - grad f(x)| <= (2/t) sup_{|v|=1} delta2 f(x + t h; 2t v)
// for convex f (gradient-difference reading of the convexity lemma)
inline CheckEntry sodin_lemma_check(const Potential& f, double t, const std::vector<Vec>& xs,
                                    const std::vector<Vec>& dirs, std::string digest = "") {
  if (!(t > 0.0)) throw std::invalid_argument("sodin_lemma_check: t must be positive");
  double worst = -kInf;
  for (const Vec& x : xs)
    for (const Vec& h : dirs) {
      Vec xt(x);
      for (std::size_t i = 0; i < x.size(); ++i) xt[i] += t * h[i];
      const Vec g1 = f.grad(xt), g0 = f.grad(x);
      double lhs = 0.0;
      for (std::size_t i = 0; i < g1.size(); ++i) lhs += (g1[i] - g0[i]) * (g1[i] - g0[i]);
      lhs = std::sqrt(lhs);
      double sup = 0.0;
      for (const Vec& v : dirs) {
        Vec vv(v);
        for (auto& c : vv) c *= 2.0 * t;
        sup = std::max(sup, second_difference(f, xt, vv));
      }
      worst = std::max(worst, lhs - (2.0 / t) * sup);
    }
  return make_entry("sodin_lemma", "convex-gradient-lemma", worst, 0.0, "upper-abs", 1e-9,
                    std::move(digest));
}

// ---------------------------------------------------------------------------
// L^p estimates on the map derivative (1-D)
// ---------------------------------------------------------------------------

// K ||(Phi'')^2||_p <= ||(V'')_+||_p  and  K ||(Phi'')^2||_p <= (p+1)/2 ||(V')^2||_p
// in L^p(mu); p = infinity (encoded as p <= 0) uses the sup over sup_grid,
// squaring the sup of Phi'' for the left side
inline std::vector<CheckEntry> lp_norm_check_1d(const MeasureSpec& src, double target_k,
                                                const std::function<double(double)>& tprime,
                                                const Vec& p_list, const Vec& sup_grid,
                                                double tolerance, std::string digest = "") {
  if (src.dim != 1 || !src.has_potential)
    throw std::invalid_argument("lp_norm_check_1d: need a 1-D source with a potential");
  const Interval dom = src.support.ax[0];
  const Potential& v = src.pot;

  auto lp_norm = [&](const std::function<double(double)>& f, double p) {
    const double integral = adaptive_simpson(
        [&](double x) { return std::pow(std::fabs(f(x)), p) * src.density1(x); }, dom.lo, dom.hi);
    return std::pow(integral, 1.0 / p);
  };
  auto sup_norm = [&](const std::function<double(double)>& f) {
    double s = 0.0;
    for (double x : sup_grid) s = std::max(s, std::fabs(f(x)));
    return s;
  };

  auto phi2 = [&](double x) {
    const double d = tprime(x);
    return d * d;
  };
  auto vpp_pos = [&](double x) { return std::max(v.hess1(x), 0.0); };
  auto vp_sq = [&](double x) {
    const double g = v.grad1(x);
    return g * g;
  };

  std::vector<CheckEntry> out;
  for (double p : p_list) {
    const bool inf_p = p <= 0.0;
    const std::string tag = inf_p ? "inf" : std::to_string(static_cast<int>(p));
    double lhs, rhs1, rhs2;
    if (inf_p) {
      const double s = sup_norm(tprime);
      lhs = target_k * s * s;
      rhs1 = sup_norm(vpp_pos);
      rhs2 = kInf;  // the (p+1)/2 form has no p = infinity statement
    } else {
      lhs = target_k * lp_norm(phi2, p);
      rhs1 = lp_norm(vpp_pos, p);
      rhs2 = 0.5 * (p + 1.0) * lp_norm(vp_sq, p);
    }
    out.push_back(make_entry("lp_bound_p" + tag, "lp-derivative-estimate", lhs, rhs1, "upper",
                             tolerance, digest));
    if (!inf_p)
      out.push_back(make_entry("lp_gradient_bound_p" + tag, "lp-derivative-estimate", lhs, rhs2,
                               "upper", tolerance, digest));
  }
  return out;
}

// K (sum w ||D2Phi||^{2r})^{1/r} <= (sum w ||(D2V)_+||^r)^{1/r} on interior
// grid nodes; D2Phi is the symmetrized barycentric Jacobian
inline std::vector<CheckEntry> operator_norm_lp_check(const GridMap& map,
                                                      const Potential& source_pot, double target_k,
                                                      const Vec& r_list, int margin, double budget,
                                                      std::string digest = "") {
  const int n = map.n();
  std::vector<CheckEntry> out;
  for (double r : r_list) {
    double lhs_sum = 0.0, rhs_sum = 0.0;
    for (int i = margin; i < n - margin; ++i)
      for (int j = margin; j < n - margin; ++j) {
        const double w = map.node_weight(i, j);
        if (w <= 0.0) continue;
        const Vec x = map.node(i, j);
        const double dphi = operator_norm(sym_part(map.jacobian_at_node(i, j)));
        const double dv = positive_part_norm_sym(source_pot.hess(x));
        lhs_sum += w * std::pow(dphi, 2.0 * r);
        rhs_sum += w * std::pow(dv, r);
      }
    const double lhs = target_k * std::pow(lhs_sum, 1.0 / r);
    const double rhs = std::pow(rhs_sum, 1.0 / r);
    out.push_back(make_entry("operator_norm_lp_r" + std::to_string(static_cast<int>(r)),
                             "lp-operator-norm-estimate", lhs, rhs, "upper", budget, digest));
  }
  return out;
}

// Lipschitz constants of maps onto dilated bodies sK must scale linearly in
// s: |L_s / L_1 - s| <= budget * s, with the declared discretization budget
inline std::vector<CheckEntry> body_scaling_entries(const Vec& s_list, const Vec& lipschitz,
                                                    double budget, std::string digest = "") {
  if (s_list.size() != lipschitz.size() || s_list.empty())
    throw std::invalid_argument("body_scaling_entries: size mismatch");
  std::size_t ref = s_list.size();
  for (std::size_t i = 0; i < s_list.size(); ++i)
    if (s_list[i] == 1.0) ref = i;
  if (ref == s_list.size())
    throw std::invalid_argument("body_scaling_entries: s = 1 reference missing");
  std::vector<CheckEntry> out;
  for (std::size_t i = 0; i < s_list.size(); ++i) {
    std::ostringstream name;
    name << "body_scaling_s" << s_list[i];
    out.push_back(make_entry(name.str(), "set-image-scaling", lipschitz[i] / lipschitz[ref],
                             s_list[i], "equality-abs", budget * s_list[i], digest));
  }
  return out;
}

// uniform interior grids for sampling maps
inline std::vector<Vec> interior_grid_1d(const Interval& ivl, int n, double shrink = 0.0) {
  const double lo = ivl.lo + shrink, hi = ivl.hi - shrink;
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pts.push_back(Vec{lo + (hi - lo) * i / (n - 1)});
  return pts;
}

// interior nodes of a grid map, excluding a boundary margin
inline std::vector<Vec> interior_nodes(const GridMap& m, int margin) {
  std::vector<Vec> pts;
  const int n = m.n();
  for (int i = margin; i < n - margin; ++i)
    for (int j = margin; j < n - margin; ++j) pts.push_back(m.node(i, j));
  return pts;
}

// sampler drawing uniform interior nodes of a grid map
inline std::function<Vec()> node_sampler(const GridMap& m, int margin, Rng& rng) {
  const int n = m.n();
  return [&m, margin, n, &rng]() {
    const int span = n - 2 * margin;
    const int i = margin + static_cast<int>(rng.uniform(0.0, 1.0) * span);
    const int j = margin + static_cast<int>(rng.uniform(0.0, 1.0) * span);
    return m.node(std::min(i, n - margin - 1), std::min(j, n - margin - 1));
  };
}

// ---------------------------------------------------------------------------
// Pairwise scan of an entropic grid map
// ---------------------------------------------------------------------------

struct PairwiseScan {
  std::vector<Vec> nodes;     // essential-support grid nodes
  double floor_dist = 0.0;    // half the scan-set diameter
  double pairwise = 0.0;      // max quotient over the sampled pairs
  double jacobian_sup = 0.0;  // differenced operator-norm sup over the nodes
};

// Scan set: nodes carrying real source mass whose images land in resolved
// target territory; outside the essential supports the coupling rows (and
// the target duals) are Sinkhorn noise and certify nothing.
//
// Pair quotients are sampled at cell centers with a separation floor. Node
// images snap to the target grid by up to h/4, and for near-linear maps the
// snap alternates sign between neighbors, so bilinear values at cell centers
// average it away; the floor keeps what remains divided by at least half the
// scan-set diameter.
inline PairwiseScan entropic_pairwise_scan(const GridMap& map, const DiscreteMeasure& dsrc,
                                           const DiscreteMeasure& dtgt, long n_pairs, Rng& rng,
                                           double mass_floor = 1e-5) {
  PairwiseScan s;
  double wmax_src = 0.0;
  double wmax_tgt = 0.0;
  for (const double w : dsrc.w) wmax_src = std::max(wmax_src, w);
  for (const double w : dtgt.w) wmax_tgt = std::max(wmax_tgt, w);
  const auto tgt_weight_near = [&](double px, double py) {
    const auto clamp_idx = [&](double p, const Vec& axis, double step) {
      const long k = std::lround((p - axis.front()) / step);
      return static_cast<int>(std::clamp(k, 0L, static_cast<long>(axis.size()) - 1L));
    };
    return dtgt.weight(clamp_idx(px, dtgt.xs, dtgt.hx), clamp_idx(py, dtgt.ys, dtgt.hy));
  };
  for (int i = 1; i < map.n() - 1; ++i)
    for (int j = 1; j < map.n() - 1; ++j) {
      if (map.node_weight(i, j) < mass_floor * wmax_src) continue;
      if (tgt_weight_near(map.tx(i, j), map.ty(i, j)) < mass_floor * wmax_tgt) continue;
      s.nodes.push_back(map.node(i, j));
    }
  if (s.nodes.size() < 16)
    throw std::runtime_error("entropic_pairwise_scan: essential support resolves too few nodes");

  std::vector<Vec> centers;
  centers.reserve(s.nodes.size());
  for (const Vec& p : s.nodes) centers.push_back(Vec{p[0] + 0.5 * dsrc.hx, p[1] + 0.5 * dsrc.hy});
  double diam2 = 0.0;
  for (std::size_t a = 0; a < centers.size(); ++a)
    for (std::size_t b = a + 1; b < centers.size(); ++b)
      diam2 = std::max(diam2, dist2(centers[a], centers[b]));
  s.floor_dist = 0.5 * std::sqrt(diam2);

  Vec anchor;
  bool draw_anchor = true;
  auto sampler = [&]() {
    if (draw_anchor) {
      draw_anchor = false;
      anchor = centers[static_cast<std::size_t>(rng.next() % centers.size())];
      return anchor;
    }
    draw_anchor = true;
    Vec far = centers[static_cast<std::size_t>(rng.next() % centers.size())];
    double best = dist2(anchor, far);
    for (int tries = 0; tries < 64 && best < s.floor_dist * s.floor_dist; ++tries) {
      Vec y = centers[static_cast<std::size_t>(rng.next() % centers.size())];
      const double d2 = dist2(anchor, y);
      if (d2 > best) {
        best = d2;
        far = y;
      }
    }
    return far;
  };
  const TransportMap t = map.as_transport_map();
  s.pairwise = lipschitz_pairwise(t, sampler, n_pairs);
  s.jacobian_sup = jacobian_opnorm_sup(t, s.nodes);
  return s;
}

// random unit directions plus the coordinate basis
inline std::vector<Vec> direction_set(int dim, int n_random, Rng& rng) {
  std::vector<Vec> dirs;
  for (int i = 0; i < dim; ++i) {
    Vec e(static_cast<std::size_t>(dim), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    dirs.push_back(e);
  }
  for (int k = 0; k < n_random; ++k) {
    Vec v(static_cast<std::size_t>(dim));
    double norm = 0.0;
    do {
      for (auto& c : v) c = rng.normal();
      norm = norm2(v);
    } while (norm < 1e-8);
    for (auto& c : v) c /= norm;
    dirs.push_back(v);
  }
  return dirs;
}

}  // namespace ctlab
