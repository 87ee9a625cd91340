// Entropic transport on grids: marginal convergence, plan symmetry, a 3x3
// linear-program oracle, and the barycentric map against the closed-form
// gaussian contraction.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "ctlab/grid_ot.hpp"
#include "ctlab/measures.hpp"

using namespace ctlab;

namespace {

std::shared_ptr<DiscreteMeasure> line_measure(const Vec& xs, const Vec& a) {
  // embeds a 1-D instance in the 2-D solver: all mass on the middle row
  auto d = std::make_shared<DiscreteMeasure>();
  d->n = static_cast<int>(xs.size());
  d->xs = xs;
  d->ys.assign(xs.size(), 0.0);
  for (std::size_t j = 0; j < xs.size(); ++j) d->ys[j] = static_cast<double>(j) - 1.0;
  d->w.assign(xs.size() * xs.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) d->w[i * xs.size() + 1] = a[i];
  d->hx = 1.0;
  d->hy = 1.0;
  return d;
}

}  // namespace

TEST_CASE("discretization: weights normalize and coverage is enforced") {
  const MeasureSpec g = make_standard_gaussian(2);
  const Box box = Box::cube(2, 8.0);
  const DiscreteMeasure d = discretize(g, box, 16);
  double sum = 0.0;
  for (double v : d.w) sum += v;
  CHECK(std::fabs(sum - 1.0) < 1e-12);
  CHECK(d.xs.size() == 16);
  // symmetric grid: center cells carry the largest weight
  CHECK(d.weight(8, 8) > d.weight(0, 0));

  // a box missing mass is rejected
  CHECK_THROWS_AS(discretize(g, Box::cube(2, 1.0), 8), std::invalid_argument);
}

TEST_CASE("sinkhorn self-transport converges to the identity plan") {
  const MeasureSpec g = make_standard_gaussian(2);
  const Box box = Box::cube(2, 8.0);
  auto d = std::make_shared<DiscreteMeasure>(discretize(g, box, 12));
  Coupling c = sinkhorn(d, d, 0.05, 4000, 1e-7);
  CHECK(c.converged);
  CHECK(c.marginal_error < 1e-6);
  // self-transport cost tends to 0 with epsilon; at eps = 0.05 on a coarse
  // grid it is already far below the cell size squared
  CHECK(c.transport_cost() < 0.05);
}

TEST_CASE("3x3 instance reproduces the exact linear-program optimum") {
  // offline LP oracle: sources (-1, 0, 1) weights (1/2, 1/4, 1/4),
  // targets (-1/2, 1/4, 3/2) weights (1/4, 1/4, 1/2), cost |x-y|^2/2,
  // exact optimum 69/128
  auto src = line_measure(Vec{-1.0, 0.0, 1.0}, Vec{0.5, 0.25, 0.25});
  auto tgt = line_measure(Vec{-0.5, 0.25, 1.5}, Vec{0.25, 0.25, 0.5});

  Vec schedule;
  for (double e = 0.5; e > 1e-4; e *= 0.4) schedule.push_back(e);
  Coupling c = epsilon_schedule_solve(src, tgt, schedule, 20000, 1e-9);
  CHECK(c.converged);
  const double lp = 69.0 / 128.0;
  CHECK(c.transport_cost() >= lp - 1e-6);
  CHECK(std::fabs(c.transport_cost() - lp) / lp < 0.01);
}

TEST_CASE("gaussian to gaussian(0.5) barycentric map recovers the linear slope") {
  const MeasureSpec src = make_standard_gaussian(2);
  const MeasureSpec tgt = make_gaussian(Vec{0.5, 0.5});
  const Box box = Box::cube(2, 8.0);
  const int n = 32;
  auto ds = std::make_shared<DiscreteMeasure>(discretize(src, box, n));
  auto dt = std::make_shared<DiscreteMeasure>(discretize(tgt, box, n));

  Coupling c = epsilon_schedule_solve(ds, dt, make_epsilon_schedule(1.0, 5e-3, 0.5), 4000, 1e-6);
  REQUIRE(c.converged);

  const GridMap map(c);
  // interior nodes: rows whose image falls mid-gap snap toward one target
  // node, so the pointwise error can reach h/4 = 0.125; the weighted slope
  // fit below averages that snapping noise away
  double worst = 0.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 8; i < n - 8; ++i)
    for (int j = 8; j < n - 8; ++j) {
      const double w = map.node_weight(i, j);
      if (w <= 0.0) continue;
      const Vec x{ds->xs[static_cast<std::size_t>(i)], ds->ys[static_cast<std::size_t>(j)]};
      worst = std::max(worst, std::fabs(map.tx(i, j) - 0.5 * x[0]));
      worst = std::max(worst, std::fabs(map.ty(i, j) - 0.5 * x[1]));
      sxy += w * (x[0] * map.tx(i, j) + x[1] * map.ty(i, j));
      sxx += w * (x[0] * x[0] + x[1] * x[1]);
    }
  CHECK(worst < 0.13);
  REQUIRE(sxx > 0.0);
  CHECK(std::fabs(sxy / sxx - 0.5) < 0.02);

  // odd symmetry of the barycentric map on the symmetric grid
  const int i = n / 4, j = n / 3;
  const int oi = n - 1 - i, oj = n - 1 - j;
  CHECK(std::fabs(map.tx(i, j) + map.tx(oi, oj)) < 1e-8);
  CHECK(std::fabs(map.ty(i, j) + map.ty(oi, oj)) < 1e-8);

  // potential consistency: grad(|x|^2/2 - f) recovers the map up to O(h)
  const Vec x0{ds->xs[10], ds->ys[12]};
  const double h = 1e-3;
  const double gx = (map.potential(Vec{x0[0] + h, x0[1]}) - map.potential(Vec{x0[0] - h, x0[1]})) / (2 * h);
  const double gy = (map.potential(Vec{x0[0], x0[1] + h}) - map.potential(Vec{x0[0], x0[1] - h})) / (2 * h);
  const Vec tx = map.forward(x0);
  CHECK(std::fabs(gx - tx[0]) < 0.6);
  CHECK(std::fabs(gy - tx[1]) < 0.6);

  // jacobian at an interior node is close to 0.5 Id
  const Mat jac = map.jacobian_at_node(n / 2, n / 2);
  CHECK(std::fabs(jac(0, 0) - 0.5) < 0.05);
  CHECK(std::fabs(jac(1, 1) - 0.5) < 0.05);
  CHECK(std::fabs(jac(0, 1)) < 0.05);
}

TEST_CASE("epsilon schedules decrease geometrically and validate") {
  const Vec s = make_epsilon_schedule(1.0, 5e-3, 0.5);
  REQUIRE(s.size() >= 2);
  CHECK(s.front() == Catch::Approx(1.0));
  CHECK(s.back() <= 5e-3 * (1.0 + 1e-12));
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] < s[i - 1]);

  auto d = line_measure(Vec{-1.0, 0.0, 1.0}, Vec{0.5, 0.25, 0.25});
  CHECK_THROWS_AS(epsilon_schedule_solve(d, d, Vec{0.1, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(sinkhorn(d, d, -1.0), std::invalid_argument);
}
