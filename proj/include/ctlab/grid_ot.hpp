#pragma once
// Entropic optimal transport on regular 2-D grids with quadratic cost
// c(x, y) = |x - y|^2 / 2, solved by log-domain Sinkhorn iteration.
//
// The cost separates per axis, so each dual update is two nested
// log-sum-exp reductions of size n instead of one of size n^2; a full
// update costs O(n^3) rather than O(n^4). All reductions subtract the
// running maximum before exponentiating, which keeps epsilon down to 1e-3
// on 64^2 grids inside double range. Zero-weight nodes (e.g. grid corners
// outside a convex body) are masked out of every reduction.
//
// The barycentric projection of the converged plan gives the transport map
// on source nodes; the convex potential comes from the source dual,
// Phi(x) = |x|^2/2 - f(x), which is globally consistent up to a constant.

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctlab/core.hpp"
#include "ctlab/measures.hpp"
#include "ctlab/transport_map.hpp"

namespace ctlab {

struct DiscreteMeasure {
  int n = 0;        // nodes per axis
  Vec xs, ys;       // node coordinates (cell centers)
  Vec w;            // weights, row-major w[i*n + j] for node (xs[i], ys[j])
  double hx = 0.0, hy = 0.0;
  Box box;

  double weight(int i, int j) const { return w[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)]; }
};

// cell-center discretization; weights proportional to density * cell volume
inline DiscreteMeasure discretize(const MeasureSpec& m, const Box& box, int n_per_axis,
                                  double coverage_tol = 1e-10) {
  if (m.dim != 2) throw std::invalid_argument("discretize: measure must be 2-D");
  if (m.mass != MassKind::probability)
    throw std::invalid_argument("discretize: measure must be a probability measure");
  if (n_per_axis < 2) throw std::invalid_argument("discretize: need at least 2 nodes per axis");
  const double covered = m.box_mass(box);
  if (covered < 1.0 - coverage_tol)
    throw std::invalid_argument("discretize: box covers only " + std::to_string(covered) +
                                " of the mass");

  DiscreteMeasure d;
  d.n = n_per_axis;
  d.box = box;
  d.hx = box.ax[0].length() / n_per_axis;
  d.hy = box.ax[1].length() / n_per_axis;
  d.xs.resize(static_cast<std::size_t>(n_per_axis));
  d.ys.resize(static_cast<std::size_t>(n_per_axis));
  for (int i = 0; i < n_per_axis; ++i) {
    d.xs[static_cast<std::size_t>(i)] = box.ax[0].lo + (i + 0.5) * d.hx;
    d.ys[static_cast<std::size_t>(i)] = box.ax[1].lo + (i + 0.5) * d.hy;
  }
  d.w.resize(static_cast<std::size_t>(n_per_axis) * static_cast<std::size_t>(n_per_axis));
  double total = 0.0;
  for (int i = 0; i < n_per_axis; ++i)
    for (int j = 0; j < n_per_axis; ++j) {
      const double v = m.density(Vec{d.xs[static_cast<std::size_t>(i)], d.ys[static_cast<std::size_t>(j)]});
      d.w[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_per_axis) + static_cast<std::size_t>(j)] = v;
      total += v;
    }
  if (!(total > 0.0)) throw std::invalid_argument("discretize: measure vanishes on the box");
  for (auto& v : d.w) v /= total;
  return d;
}

struct SinkhornDiagnostics {
  double epsilon = 0.0;
  int iterations = 0;
  double marginal_error = kInf;
  bool converged = false;
};

struct Coupling {
  std::shared_ptr<const DiscreteMeasure> src, tgt;
  Vec f, g;  // duals on source / target nodes, zero at masked nodes
  double epsilon = 0.0;
  double marginal_error = kInf;
  bool converged = false;
  int iterations = 0;
  std::vector<SinkhornDiagnostics> history;

  // plan row for one source node (weights over all target nodes)
  Vec row_plan(int i, int j) const {
    const int n = src->n, m = tgt->n;
    const double xi = src->xs[static_cast<std::size_t>(i)], yj = src->ys[static_cast<std::size_t>(j)];
    const double ai = src->weight(i, j);
    const double fi = f[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
    Vec row(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l) {
        const double b = tgt->weight(k, l);
        if (b <= 0.0) continue;
        const double dx = xi - tgt->xs[static_cast<std::size_t>(k)];
        const double dy = yj - tgt->ys[static_cast<std::size_t>(l)];
        const double c = 0.5 * (dx * dx + dy * dy);
        row[static_cast<std::size_t>(k) * static_cast<std::size_t>(m) + static_cast<std::size_t>(l)] =
            ai * b * std::exp((fi + g[static_cast<std::size_t>(k) * static_cast<std::size_t>(m) + static_cast<std::size_t>(l)] - c) / epsilon);
      }
    return row;
  }

  // unregularized cost of the entropic plan
  double transport_cost() const {
    const int n = src->n;
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (src->weight(i, j) <= 0.0) continue;
        const Vec row = row_plan(i, j);
        const int m = tgt->n;
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) {
            const double p = row[static_cast<std::size_t>(k) * static_cast<std::size_t>(m) + static_cast<std::size_t>(l)];
            if (p <= 0.0) continue;
            const double dx = src->xs[static_cast<std::size_t>(i)] - tgt->xs[static_cast<std::size_t>(k)];
            const double dy = src->ys[static_cast<std::size_t>(j)] - tgt->ys[static_cast<std::size_t>(l)];
            total += p * 0.5 * (dx * dx + dy * dy);
          }
      }
    return total;
  }
};

namespace detail {

// squared-distance / (2 eps) table between two coordinate axes
inline Vec half_cost_table(const Vec& s, const Vec& t, double eps) {
  Vec c(s.size() * t.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double d = s[i] - t[k];
      c[i * t.size() + k] = d * d / (2.0 * eps);
    }
  return c;
}

// One Sinkhorn half-update: out[i,j] = -eps * log SUM_{k,l} exp(
//   dual[k,l]/eps + log w[k,l] - cx[i,k] - cy[j,l] )
// where (cx, cy) are half-cost tables from the out-grid axes to the in-grid
// axes. Two-stage reduction with running-max stabilization; masked nodes
// (log w = -inf) never contribute.
struct LseTransform {
  int n_out = 0, n_in = 0;
  Vec cx, cy;     // [i_out * n_in + k_in]
  Vec logw_in;    // log weights of the in-grid, -inf at masked nodes
  // scratch
  Vec stage_log;  // [k_in * n_out_y + j_out] after stage 1

  void init(const Vec& out_xs, const Vec& out_ys, const Vec& in_xs, const Vec& in_ys,
            const Vec& in_w, double eps) {
    n_out = static_cast<int>(out_xs.size());
    n_in = static_cast<int>(in_xs.size());
    cx = half_cost_table(out_xs, in_xs, eps);
    cy = half_cost_table(out_ys, in_ys, eps);
    logw_in.resize(in_w.size());
    for (std::size_t i = 0; i < in_w.size(); ++i)
      logw_in[i] = in_w[i] > 0.0 ? std::log(in_w[i]) : -kInf;
    stage_log.assign(static_cast<std::size_t>(n_in) * static_cast<std::size_t>(n_out), 0.0);
  }

  // dual over the in-grid -> out over the out-grid (times -eps at the caller)
  void apply(const Vec& dual_over_eps, Vec* out_log) {
    const int ni = n_in, no = n_out;
    // stage 1: reduce over l (in-grid y) for each (k, j)
    for (int k = 0; k < ni; ++k) {
      const std::size_t base_in = static_cast<std::size_t>(k) * static_cast<std::size_t>(ni);
      for (int j = 0; j < no; ++j) {
        const std::size_t base_cy = static_cast<std::size_t>(j) * static_cast<std::size_t>(ni);
        double m = -kInf;
        for (int l = 0; l < ni; ++l) {
          const double e = dual_over_eps[base_in + static_cast<std::size_t>(l)] +
                           logw_in[base_in + static_cast<std::size_t>(l)] -
                           cy[base_cy + static_cast<std::size_t>(l)];
          if (e > m) m = e;
        }
        double s = 0.0;
        if (m > -kInf)
          for (int l = 0; l < ni; ++l) {
            const double e = dual_over_eps[base_in + static_cast<std::size_t>(l)] +
                             logw_in[base_in + static_cast<std::size_t>(l)] -
                             cy[base_cy + static_cast<std::size_t>(l)];
            s += std::exp(e - m);
          }
        stage_log[static_cast<std::size_t>(k) * static_cast<std::size_t>(no) + static_cast<std::size_t>(j)] =
            m > -kInf ? m + std::log(s) : -kInf;
      }
    }
    // stage 2: reduce over k (in-grid x) for each (i, j)
    out_log->assign(static_cast<std::size_t>(no) * static_cast<std::size_t>(no), 0.0);
    for (int i = 0; i < no; ++i) {
      const std::size_t base_cx = static_cast<std::size_t>(i) * static_cast<std::size_t>(ni);
      for (int j = 0; j < no; ++j) {
        double m = -kInf;
        for (int k = 0; k < ni; ++k) {
          const double e = stage_log[static_cast<std::size_t>(k) * static_cast<std::size_t>(no) + static_cast<std::size_t>(j)] -
                           cx[base_cx + static_cast<std::size_t>(k)];
          if (e > m) m = e;
        }
        double s = 0.0;
        if (m > -kInf)
          for (int k = 0; k < ni; ++k) {
            const double e = stage_log[static_cast<std::size_t>(k) * static_cast<std::size_t>(no) + static_cast<std::size_t>(j)] -
                             cx[base_cx + static_cast<std::size_t>(k)];
            s += std::exp(e - m);
          }
        (*out_log)[static_cast<std::size_t>(i) * static_cast<std::size_t>(no) + static_cast<std::size_t>(j)] =
            m > -kInf ? m + std::log(s) : -kInf;
      }
    }
  }
};

}  // namespace detail

// log-domain Sinkhorn at fixed temperature; pass warm-start duals to continue
inline Coupling sinkhorn(std::shared_ptr<const DiscreteMeasure> src,
                         std::shared_ptr<const DiscreteMeasure> tgt, double eps,
                         int max_iter = 2000, double tol = 1e-6, Vec f0 = {}, Vec g0 = {}) {
  if (!(eps > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive");
  const int n = src->n, m = tgt->n;
  const std::size_t ns = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  const std::size_t ms = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);

  Coupling c;
  c.src = src;
  c.tgt = tgt;
  c.epsilon = eps;
  c.f = f0.size() == ns ? std::move(f0) : Vec(ns, 0.0);
  c.g = g0.size() == ms ? std::move(g0) : Vec(ms, 0.0);

  detail::LseTransform to_src, to_tgt;  // "to_src" writes duals on source nodes
  to_src.init(src->xs, src->ys, tgt->xs, tgt->ys, tgt->w, eps);
  to_tgt.init(tgt->xs, tgt->ys, src->xs, src->ys, src->w, eps);

  Vec dual_scaled(std::max(ns, ms)), log_out;
  auto scale_in = [eps](const Vec& d, const Vec& w, Vec* out) {
    out->resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) (*out)[i] = w[i] > 0.0 ? d[i] / eps : 0.0;
  };

  for (int it = 1; it <= max_iter; ++it) {
    // f-update: source marginal becomes exact
    scale_in(c.g, tgt->w, &dual_scaled);
    to_src.apply(dual_scaled, &log_out);
    for (std::size_t i = 0; i < ns; ++i) c.f[i] = src->w[i] > 0.0 ? -eps * log_out[i] : 0.0;

    // g-update; the change in g measures the target-marginal error of (f, g_old)
    scale_in(c.f, src->w, &dual_scaled);
    to_tgt.apply(dual_scaled, &log_out);
    double err = 0.0;
    for (std::size_t j = 0; j < ms; ++j) {
      if (tgt->w[j] <= 0.0) continue;
      const double gnew = -eps * log_out[j];
      if (it > 1) err += tgt->w[j] * std::fabs(std::exp((c.g[j] - gnew) / eps) - 1.0);
      c.g[j] = gnew;
    }
    c.iterations = it;
    if (it > 1) {
      c.marginal_error = err;
      if (err <= tol) {
        // refresh f so the returned pair has exact source marginals
        scale_in(c.g, tgt->w, &dual_scaled);
        to_src.apply(dual_scaled, &log_out);
        for (std::size_t i = 0; i < ns; ++i) c.f[i] = src->w[i] > 0.0 ? -eps * log_out[i] : 0.0;
        c.converged = true;
        break;
      }
    }
  }
  return c;
}

inline Vec make_epsilon_schedule(double start = 1.0, double end = 5e-3, double factor = 0.5) {
  if (!(start > 0.0 && end > 0.0 && end <= start && factor > 0.0 && factor < 1.0))
    throw std::invalid_argument("make_epsilon_schedule: need start >= end > 0, 0 < factor < 1");
  Vec eps;
  for (double e = start; e > end * (1.0 + 1e-12); e *= factor) eps.push_back(e);
  eps.push_back(end);
  return eps;
}

// warm-started continuation over a decreasing temperature ladder
inline Coupling epsilon_schedule_solve(std::shared_ptr<const DiscreteMeasure> src,
                                       std::shared_ptr<const DiscreteMeasure> tgt,
                                       const Vec& eps_list, int max_iter = 2000,
                                       double tol = 1e-6) {
  if (eps_list.empty()) throw std::invalid_argument("epsilon_schedule_solve: empty schedule");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("epsilon_schedule_solve: schedule must strictly decrease");

  Coupling c;
  Vec f, g;
  std::vector<SinkhornDiagnostics> history;
  for (double eps : eps_list) {
    c = sinkhorn(src, tgt, eps, max_iter, tol, std::move(f), std::move(g));
    history.push_back({eps, c.iterations, c.marginal_error, c.converged});
    f = c.f;
    g = c.g;
  }
  c.history = std::move(history);
  return c;
}

// ---------------------------------------------------------------------------
// Barycentric map on the source grid
// ---------------------------------------------------------------------------

class GridMap {
 public:
  explicit GridMap(const Coupling& c) : impl_(std::make_shared<Impl>()) {
    if (!c.src || !c.tgt) throw std::invalid_argument("GridMap: empty coupling");
    impl_->src = c.src;
    impl_->epsilon = c.epsilon;
    impl_->dual_f = c.f;
    build(c);
  }

  int n() const { return impl_->src->n; }
  const DiscreteMeasure& source() const { return *impl_->src; }
  double tx(int i, int j) const { return impl_->tx[impl_->idx(i, j)]; }
  double ty(int i, int j) const { return impl_->ty[impl_->idx(i, j)]; }
  double node_weight(int i, int j) const { return impl_->src->weight(i, j); }

  Vec node(int i, int j) const {
    return Vec{impl_->src->xs[static_cast<std::size_t>(i)], impl_->src->ys[static_cast<std::size_t>(j)]};
  }

  Vec forward(const Vec& x) const { return Vec{impl_->interp(impl_->tx, x), impl_->interp(impl_->ty, x)}; }

  // central differences of the node tables; one-sided at the box edge
  Mat jacobian_at_node(int i, int j) const {
    const auto& s = *impl_->src;
    const int n = s.n;
    auto clampi = [n](int k) { return std::min(std::max(k, 0), n - 1); };
    const int il = clampi(i - 1), ir = clampi(i + 1);
    const int jl = clampi(j - 1), jr = clampi(j + 1);
    const double dx = (ir - il) * s.hx, dy = (jr - jl) * s.hy;
    Mat m(2);
    m(0, 0) = (tx(ir, j) - tx(il, j)) / dx;
    m(0, 1) = (tx(i, jr) - tx(i, jl)) / dy;
    m(1, 0) = (ty(ir, j) - ty(il, j)) / dx;
    m(1, 1) = (ty(i, jr) - ty(i, jl)) / dy;
    return m;
  }

  // Phi(x) = |x|^2/2 - f(x) from the source dual
  double potential(const Vec& x) const {
    return 0.5 * (x[0] * x[0] + x[1] * x[1]) - impl_->interp(impl_->dual_f, x);
  }

  TransportMap as_transport_map() const {
    TransportMap t;
    t.kind = MapKind::grid_barycentric;
    t.name = "entropic";
    t.dim = 2;
    auto impl = impl_;
    auto self = *this;
    t.forward = [self](const Vec& x) { return self.forward(x); };
    t.jacobian = [self](const Vec& x) {
      const auto& s = self.source();
      int i = static_cast<int>(std::lround((x[0] - s.xs[0]) / s.hx));
      int j = static_cast<int>(std::lround((x[1] - s.ys[0]) / s.hy));
      i = std::min(std::max(i, 0), s.n - 1);
      j = std::min(std::max(j, 0), s.n - 1);
      return self.jacobian_at_node(i, j);
    };
    t.potential = [self](const Vec& x) { return self.potential(x); };
    return t;
  }

 private:
  struct Impl {
    std::shared_ptr<const DiscreteMeasure> src;
    double epsilon = 0.0;
    Vec tx, ty, dual_f;

    std::size_t idx(int i, int j) const {
      return static_cast<std::size_t>(i) * static_cast<std::size_t>(src->n) + static_cast<std::size_t>(j);
    }

    // bilinear interpolation of a node table, clamped to the grid hull
    double interp(const Vec& tab, const Vec& p) const {
      const auto& s = *src;
      const int n = s.n;
      double u = (p[0] - s.xs[0]) / s.hx, v = (p[1] - s.ys[0]) / s.hy;
      u = std::min(std::max(u, 0.0), static_cast<double>(n - 1));
      v = std::min(std::max(v, 0.0), static_cast<double>(n - 1));
      const int i = std::min(static_cast<int>(u), n - 2), j = std::min(static_cast<int>(v), n - 2);
      const double du = u - i, dv = v - j;
      return (1 - du) * (1 - dv) * tab[idx(i, j)] + du * (1 - dv) * tab[idx(i + 1, j)] +
             (1 - du) * dv * tab[idx(i, j + 1)] + du * dv * tab[idx(i + 1, j + 1)];
    }
  };

  // barycentric projection via the same two-stage reduction as the solver,
  // with three simultaneous sums (mass, x-moment, y-moment)
  void build(const Coupling& c) {
    const auto& s = *c.src;
    const auto& t = *c.tgt;
    const int n = s.n, m = t.n;
    const double eps = c.epsilon;
    const Vec cx = detail::half_cost_table(s.xs, t.xs, eps);
    const Vec cy = detail::half_cost_table(s.ys, t.ys, eps);

    // stage 1 over l: for each (k, j) store max exponent, mass sum, y-moment
    Vec m1(static_cast<std::size_t>(m) * static_cast<std::size_t>(n), -kInf);
    Vec s0(static_cast<std::size_t>(m) * static_cast<std::size_t>(n), 0.0);
    Vec sy(static_cast<std::size_t>(m) * static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < n; ++j) {
        const std::size_t out = static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
        double mx = -kInf;
        for (int l = 0; l < m; ++l) {
          const double b = t.w[static_cast<std::size_t>(k) * static_cast<std::size_t>(m) + static_cast<std::size_t>(l)];
          if (b <= 0.0) continue;
          const double e = (c.g[static_cast<std::size_t>(k) * static_cast<std::size_t>(m) + static_cast<std::size_t>(l)]) / eps +
                           std::log(b) - cy[static_cast<std::size_t>(j) * static_cast<std::size_t>(m) + static_cast<std::size_t>(l)];
          if (e > mx) mx = e;
        }
        if (mx == -kInf) continue;
        double q0 = 0.0, qy = 0.0;
        for (int l = 0; l < m; ++l) {
          const double b = t.w[static_cast<std::size_t>(k) * static_cast<std::size_t>(m) + static_cast<std::size_t>(l)];
          if (b <= 0.0) continue;
          const double e = (c.g[static_cast<std::size_t>(k) * static_cast<std::size_t>(m) + static_cast<std::size_t>(l)]) / eps +
                           std::log(b) - cy[static_cast<std::size_t>(j) * static_cast<std::size_t>(m) + static_cast<std::size_t>(l)];
          const double z = std::exp(e - mx);
          q0 += z;
          qy += z * t.ys[static_cast<std::size_t>(l)];
        }
        m1[out] = mx;
        s0[out] = q0;
        sy[out] = qy;
      }

    // stage 2 over k for each source node (i, j)
    impl_->tx.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    impl_->ty.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double mx = -kInf;
        for (int k = 0; k < m; ++k) {
          const std::size_t in = static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
          if (s0[in] <= 0.0) continue;
          const double e = m1[in] + std::log(s0[in]) - cx[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)];
          if (e > mx) mx = e;
        }
        if (mx == -kInf)
          throw std::runtime_error("GridMap: empty plan row (vanishing row mass)");
        double q0 = 0.0, qx = 0.0, qy = 0.0;
        for (int k = 0; k < m; ++k) {
          const std::size_t in = static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
          if (s0[in] <= 0.0) continue;
          const double z = std::exp(m1[in] - cx[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)] - mx);
          q0 += z * s0[in];
          qx += z * s0[in] * t.xs[static_cast<std::size_t>(k)];
          qy += z * sy[in];
        }
        const std::size_t out = static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
        impl_->tx[out] = qx / q0;
        impl_->ty[out] = qy / q0;
      }
  }

  std::shared_ptr<Impl> impl_;
};

}  // namespace ctlab
