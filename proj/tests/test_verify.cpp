// Map certification diagnostics: Lipschitz and Jacobian estimators on maps
// with known constants, second-difference machinery, the Hölder modulus
// check against a multiprecision scan, L^p derivative bounds at an exact
// equality case, and the body-scaling law entries.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "ctlab/grid_ot.hpp"
#include "ctlab/measures.hpp"
#include "ctlab/rng.hpp"
#include "ctlab/transport1d.hpp"
#include "ctlab/verify.hpp"

using namespace ctlab;

namespace {

TransportMap halving_map() {
  const MonotoneMap1D t(make_standard_gaussian(1), make_gaussian1(0.5));
  return t.as_transport_map();
}

}  // namespace

TEST_CASE("pairwise lipschitz estimate is exact for a linear map") {
  const TransportMap t = halving_map();
  Rng rng(11);
  const auto sample = [&rng]() { return Vec{3.0 * rng.normal()}; };
  long skipped = -1;
  const double est = lipschitz_pairwise(t, sample, 400, &skipped);
  CHECK(std::fabs(est - 0.5) < 1e-12);
  CHECK(skipped == 0);

  // coincident pairs are skipped, not divided by zero
  const auto stuck = []() { return Vec{1.0}; };
  long all = 0;
  CHECK(lipschitz_pairwise(t, stuck, 25, &all) == 0.0);
  CHECK(all == 25);

  CHECK_THROWS_AS(lipschitz_pairwise(t, sample, 0), std::invalid_argument);
}

TEST_CASE("jacobian sup norm over grids") {
  const TransportMap t = halving_map();
  const std::vector<Vec> grid{Vec{-6.0}, Vec{-1.0}, Vec{0.0}, Vec{2.5}, Vec{6.0}};
  CHECK(std::fabs(jacobian_opnorm_sup(t, grid) - 0.5) < 1e-12);

  TransportMap lin;
  lin.dim = 2;
  lin.forward = [](const Vec& x) { return Vec{2.0 * x[0], 0.5 * x[1]}; };
  lin.jacobian = [](const Vec&) {
    Mat j(2);
    j(0, 0) = 2.0;
    j(1, 1) = 0.5;
    return j;
  };
  CHECK(std::fabs(jacobian_opnorm_sup(lin, {Vec{0.3, -0.4}}) - 2.0) < 1e-12);

  TransportMap bare;
  bare.forward = [](const Vec& x) { return x; };
  CHECK_THROWS_AS(jacobian_opnorm_sup(bare, grid), std::invalid_argument);

  TransportMap broken;
  broken.jacobian = [](const Vec&) {
    Mat j(1);
    j(0, 0) = std::numeric_limits<double>::quiet_NaN();
    return j;
  };
  CHECK_THROWS_AS(jacobian_opnorm_sup(broken, grid), std::runtime_error);
}

TEST_CASE("second differences of polynomial potentials are exact") {
  const auto sq = [](const Vec& x) { return x[0] * x[0]; };
  // (x+t)^2 + (x-t)^2 - 2x^2 = 2 t^2
  CHECK(std::fabs(second_difference_phi(sq, Vec{1.7}, Vec{1.0}, 0.3) - 2.0 * 0.09) < 1e-14);

  const auto q4 = [](const Vec& x) { return x[0] * x[0] * x[0] * x[0]; };
  // delta2 x^4 = 12 x^2 t^2 + 2 t^4
  const double x = 1.2, t = 0.4;
  CHECK(std::fabs(second_difference_phi(q4, Vec{x}, Vec{1.0}, t) -
                  (12.0 * x * x * t * t + 2.0 * t * t * t * t)) < 1e-12);

  const Vec quot = second_diff_quotient(sq, Vec{1.0}, 0.25, {Vec{-2.0}, Vec{0.0}, Vec{3.0}});
  REQUIRE(quot.size() == 3);
  for (double v : quot) CHECK(std::fabs(v - 2.0) < 1e-12);
}

TEST_CASE("incremental decay check classifies tails") {
  // log cosh has delta2 -> 0 at infinity
  const auto lc = [](const Vec& x) { return std::log(std::cosh(x[0])); };
  const CheckEntry far = incremental_decay_check(lc, 0.5, Vec{0.0, 2.0, 4.0, 8.0, 14.0}, 1e-6, true);
  CHECK(far.status == CheckStatus::passed);
  CHECK(far.name == "incremental_decay");
  CHECK(far.theorem == "second-difference-decay");

  // same potential, domain too short: still decaying when it runs out
  const CheckEntry shortd = incremental_decay_check(lc, 0.5, Vec{0.0, 0.5, 1.0, 1.5}, 1e-6, true);
  CHECK(shortd.status == CheckStatus::inconclusive);

  // quartic growth: delta2 increases, so the lemma genuinely fails
  const auto q4 = [](const Vec& x) { return std::pow(x[0], 4.0); };
  const CheckEntry grow = incremental_decay_check(q4, 0.5, Vec{0.0, 1.0, 2.0, 3.0}, 1e-6, true);
  CHECK(grow.status == CheckStatus::failed);

  const CheckEntry na = incremental_decay_check(lc, 0.5, Vec{0.0, 1.0, 2.0}, 1e-6, false);
  CHECK(na.status == CheckStatus::not_applicable);
  CHECK(na.note.find("inapplicable") != std::string::npos);

  CHECK_THROWS_AS(incremental_decay_check(lc, 0.5, Vec{0.0, 1.0}, 1e-6, true),
                  std::invalid_argument);
}

TEST_CASE("holder modulus of the gaussian-to-quartic potential") {
  const MeasureSpec src = make_standard_gaussian(1);
  const MeasureSpec tgt = make_even_quartic(0.0, 1.0);  // exp(-x^4)/Z
  const MonotoneMap1D map(src, tgt);
  const auto phi = [&map](const Vec& x) { return map.potential(x[0]); };

  HolderInputs in;
  in.source = &src.pot;
  in.target = &tgt.pot;
  in.a_p = 1.0;  // delta2 (x^2/2) = y^2 exactly
  in.p = 1.0;
  in.a_q = 2.0;  // delta2 x^4 = 12 x^2 y^2 + 2 y^4 >= 2 y^4
  in.q = 3.0;

  std::vector<Vec> axs, ays;
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) axs.push_back(Vec{x});
  for (double y : {0.25, 0.5, 1.0}) ays.push_back(Vec{y});

  Vec xg;
  for (int i = 0; i <= 12; ++i) xg.push_back(0.25 * i);
  const Vec ts{0.1, 0.5, 1.0};

  const CheckEntry e = holder_modulus_check(phi, in, xg, ts, axs, ays);
  CHECK(e.status == CheckStatus::passed);
  CHECK(std::fabs(e.bound_value - 2.0 * std::pow(0.5, 0.25)) < 1e-12);
  // independently scanned maximum of delta2 Phi / t^{3/2} is about 0.676
  CHECK(e.computed_value > 0.60);
  CHECK(e.computed_value < 0.72);

  // a falsely strong declared source modulus must abort the check
  HolderInputs bad = in;
  bad.a_p = 0.5;
  const CheckEntry pf = holder_modulus_check(phi, bad, xg, ts, axs, ays);
  CHECK(pf.status == CheckStatus::precondition_failed);
  CHECK(pf.note.find("audit") != std::string::npos);
}

TEST_CASE("ms gradient modulus check on a contraction") {
  const TransportMap t = halving_map();
  const auto delta = [](double r) { return 0.25 * r * r; };
  Rng rng(7);
  const auto sample = [&rng]() { return Vec{2.0 * rng.normal()}; };
  const CheckEntry e = ms_modulus_check(t, delta, 40.0, sample, 300, "", 7);
  CHECK(e.status == CheckStatus::passed);
  CHECK(e.computed_value <= 0.0);
  CHECK(e.seed == 7);

  // inversion outside the audited range is an error, not a silent clamp
  Rng rng2(7);
  const auto sample2 = [&rng2]() { return Vec{2.0 * rng2.normal()}; };
  CHECK_THROWS_AS(ms_modulus_check(t, delta, 0.01, sample2, 50), std::out_of_range);
}

TEST_CASE("convex gradient lemma holds with margin for the quadratic") {
  const Potential& v = make_standard_gaussian(1).pot;
  const std::vector<Vec> xs{Vec{-1.0}, Vec{0.0}, Vec{2.0}};
  const std::vector<Vec> dirs{Vec{1.0}, Vec{-1.0}};
  const double t = 0.5;
  const CheckEntry e = sodin_lemma_check(v, t, xs, dirs);
  CHECK(e.status == CheckStatus::passed);
  // lhs = t, sup second difference = 4 t^2, so worst = t - 8t exactly
  CHECK(std::fabs(e.computed_value + 3.5) < 1e-10);

  CHECK_THROWS_AS(sodin_lemma_check(v, 0.0, xs, dirs), std::invalid_argument);
}

TEST_CASE("lp derivative bounds attain equality for the gaussian pair") {
  // gaussian -> gaussian(0.5): T' = 1/2, target convexity K = 4, V'' = 1;
  // K ||T'^2||_p = 1 = ||(V'')_+||_p for every p, and the gradient form
  // is also tight at p = 1 since E x^2 = 1
  const MeasureSpec src = make_standard_gaussian(1);
  const auto tprime = [](double) { return 0.5; };
  Vec sup_grid;
  for (int i = 0; i <= 40; ++i) sup_grid.push_back(-8.0 + 0.4 * i);

  const auto entries = lp_norm_check_1d(src, 4.0, tprime, Vec{1.0, 2.0, 4.0, 0.0}, sup_grid, 1e-6);
  REQUIRE(entries.size() == 7);
  for (const auto& e : entries) CHECK(e.status == CheckStatus::passed);

  CHECK(entries[0].name == "lp_bound_p1");
  CHECK(std::fabs(entries[0].computed_value - 1.0) < 1e-10);
  CHECK(std::fabs(entries[0].bound_value - 1.0) < 1e-10);

  CHECK(entries[1].name == "lp_gradient_bound_p1");
  CHECK(std::fabs(entries[1].bound_value - 1.0) < 1e-10);

  CHECK(std::fabs(entries[2].computed_value - 1.0) < 1e-10);
  CHECK(std::fabs(entries[3].bound_value - 1.5 * std::sqrt(3.0)) < 1e-9);

  CHECK(std::fabs(entries[4].computed_value - 1.0) < 1e-10);
  // (p+1)/2 (E x^8)^{1/4} with E x^8 = 105
  CHECK(entries[5].bound_value == Catch::Approx(2.5 * std::pow(105.0, 0.25)).epsilon(1e-7));

  CHECK(entries[6].name == "lp_bound_pinf");
  CHECK(std::fabs(entries[6].computed_value - 1.0) < 1e-12);
  CHECK(std::fabs(entries[6].bound_value - 1.0) < 1e-12);

  CHECK_THROWS_AS(lp_norm_check_1d(make_standard_gaussian(2), 1.0, tprime, Vec{1.0}, sup_grid, 1e-6),
                  std::invalid_argument);
  CHECK_THROWS_AS(lp_norm_check_1d(make_uniform_interval(0.0, 1.0), 1.0, tprime, Vec{1.0},
                                   sup_grid, 1e-6),
                  std::invalid_argument);
}

TEST_CASE("operator norm lp bound is tight on the identity coupling") {
  const MeasureSpec g = make_standard_gaussian(2);
  auto d = std::make_shared<DiscreteMeasure>(discretize(g, Box::cube(2, 8.0), 16));
  const Coupling c = epsilon_schedule_solve(d, d, make_epsilon_schedule(0.5, 5e-3, 0.5), 4000, 1e-7);
  REQUIRE(c.converged);
  const GridMap map(c);

  // self-transport at small epsilon is the identity plan; with V'' = Id and
  // K = 1 both sides reduce to the interior mass to the power 1/r
  const auto entries = operator_norm_lp_check(map, g.pot, 1.0, Vec{1.0, 2.0}, 2, 1e-6);
  REQUIRE(entries.size() == 2);
  for (const auto& e : entries) {
    CHECK(e.status == CheckStatus::passed);
    CHECK(std::fabs(e.computed_value - e.bound_value) < 1e-8);
  }
  CHECK(entries[0].name == "operator_norm_lp_r1");
  CHECK(entries[1].name == "operator_norm_lp_r2");

  const auto nodes = interior_nodes(map, 2);
  CHECK(nodes.size() == 12u * 12u);

  Rng rng(3);
  auto sample = node_sampler(map, 2, rng);
  for (int k = 0; k < 200; ++k) {
    const Vec x = sample();
    CHECK(std::fabs(x[0]) <= map.node(13, 13)[0] + 1e-12);
    CHECK(std::fabs(x[1]) <= map.node(13, 13)[1] + 1e-12);
  }
}

TEST_CASE("body scaling entries demand linear growth in s") {
  const Vec s{0.5, 1.0, 2.0};
  const double base = 0.37;
  const Vec lips{0.5 * base, base, 2.0 * base};
  const auto entries = body_scaling_entries(s, lips, 0.01);
  REQUIRE(entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(entries[i].status == CheckStatus::passed);
    CHECK(std::fabs(entries[i].computed_value - s[i]) < 1e-12);
  }
  CHECK(entries[0].name == "body_scaling_s0.5");
  CHECK(entries[2].name == "body_scaling_s2");

  // violation of the scaling law is flagged
  const auto offs = body_scaling_entries(s, Vec{0.5 * base, base, 2.5 * base}, 0.01);
  CHECK(offs[2].status == CheckStatus::failed);

  CHECK_THROWS_AS(body_scaling_entries(Vec{0.5, 2.0}, Vec{1.0, 2.0}, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(body_scaling_entries(s, Vec{1.0, 2.0}, 0.01), std::invalid_argument);
}

TEST_CASE("sampling helpers: interior grid and direction sets") {
  const auto grid = interior_grid_1d(Interval{-4.0, 4.0}, 5, 1.0);
  REQUIRE(grid.size() == 5);
  CHECK(std::fabs(grid.front()[0] + 3.0) < 1e-12);
  CHECK(std::fabs(grid.back()[0] - 3.0) < 1e-12);

  Rng rng(5);
  const auto dirs = direction_set(2, 3, rng);
  REQUIRE(dirs.size() == 5);
  CHECK(dirs[0] == Vec{1.0, 0.0});
  CHECK(dirs[1] == Vec{0.0, 1.0});
  for (const auto& v : dirs) CHECK(std::fabs(norm2(v) - 1.0) < 1e-12);
}
