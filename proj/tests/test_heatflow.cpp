// Heat-flow transport with Gaussian reference: Mehler semigroup closed forms,
// linear flows solved exactly, cross-route agreement with the 1-D monotone
// map, and the log-concavity probe over (t, x) grids.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ctlab/heatflow.hpp"
#include "ctlab/measures.hpp"
#include "ctlab/transport1d.hpp"

using namespace ctlab;

namespace {

// for U = a x^2 the semigroup stays in the gaussian family:
// -log P_t e^{-U} = a_t x^2 + const with the slope below
double gaussian_flow_coeff(double a, double t) {
  const double d2 = std::exp(-2.0 * t);
  return a * d2 / (1.0 + 2.0 * a * (1.0 - d2));
}

// closed-form flow map for U = a x^2: S_t(x) = x sqrt(1 + 2a(1 - e^{-2t}))
double gaussian_flow_map(double a, double t, double x) {
  return x * std::sqrt(1.0 + 2.0 * a * (1.0 - std::exp(-2.0 * t)));
}

Vec linspace(double lo, double hi, int n) {
  Vec v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("ou semigroup: identity at t = 0, exact moments, ergodic limit") {
  const auto sq = [](double w) { return w * w; };
  // P_t[x^2](x) = e^{-2t} x^2 + (1 - e^{-2t}); quadrature is exact here
  const double t = 0.3, x = 1.2;
  const double exact = std::exp(-2.0 * t) * x * x + (1.0 - std::exp(-2.0 * t));
  CHECK(std::fabs(exact - 1.2414771198813716) < 1e-15);
  CHECK(std::fabs(ou_apply(sq, t, x) - exact) < 1e-13);

  const auto cosf = [](double w) { return std::cos(w); };
  CHECK(std::fabs(ou_apply(cosf, 0.0, 0.9) - std::cos(0.9)) < 1e-14);

  // t large: P_t h -> E_gamma h = e^{-1/2} for h = cos, independent of x
  const double limit = std::exp(-0.5);
  CHECK(std::fabs(ou_apply(cosf, 40.0, 0.0) - limit) < 1e-12);
  CHECK(std::fabs(ou_apply(cosf, 40.0, 3.0) - limit) < 1e-12);

  CHECK_THROWS_AS(ou_apply(sq, -0.1, 0.0), std::invalid_argument);
}

TEST_CASE("ou semigroup: gaussian integrand closed form and semigroup law") {
  const double a = 0.8, b = 0.3;
  const auto h = [=](double w) { return std::exp(-a * w * w - b); };

  // P_t[e^{-a w^2 - b}](x) = e^{-b} (1 + 2 a s^2)^{-1/2} exp(-a d^2 x^2 / (1 + 2 a s^2))
  // with d = e^{-t}, s^2 = 1 - d^2
  const double t = 0.5, x = 1.1;
  const double d = std::exp(-t), s2 = 1.0 - d * d;
  const double den = 1.0 + 2.0 * a * s2;
  const double exact = std::exp(-b) / std::sqrt(den) * std::exp(-a * d * d * x * x / den);
  CHECK(std::fabs(ou_apply(h, t, x) - exact) < 1e-10);

  // P_s P_t = P_{s+t}
  const double s = 0.3;
  const auto inner = [&](double w) { return ou_apply(h, t, w); };
  CHECK(std::fabs(ou_apply(inner, s, 0.7) - ou_apply(h, s + t, 0.7)) < 1e-8);
}

TEST_CASE("flow velocity: constant, initial-time, and gaussian closed forms") {
  const EvenPoly1 flat{0.7, 0.0, 0.0};
  CHECK(std::fabs(flow_velocity1(flat, 0.8, 1.3)) < 1e-14);
  CHECK(std::fabs(flow_velocity1(flat, 0.0, -2.0)) < 1e-14);

  // t = 0: velocity is U'(x); for U = x^4/4 that is x^3
  const EvenPoly1 quart{0.0, 0.0, 0.25};
  CHECK(std::fabs(flow_velocity1(quart, 0.0, 1.3) - 1.3 * 1.3 * 1.3) < 1e-12);

  // U = 1.5 x^2: velocity is 2 a_t x
  const EvenPoly1 quad{0.0, 1.5, 0.0};
  const double at = gaussian_flow_coeff(1.5, 0.7);
  CHECK(std::fabs(at - 0.11345758313013527) < 1e-15);
  CHECK(std::fabs(flow_velocity1(quad, 0.7, 1.0) - 0.22691516626027054) < 1e-10);
  CHECK(std::fabs(flow_velocity1(quad, 0.7, -2.0) + 2.0 * 2.0 * at) < 1e-10);

  // second derivative of U_t is 2 a_t, constant in x
  CHECK(std::fabs(flow_convexity1(quad, 0.7, 0.4) - 2.0 * at) < 1e-8);
}

TEST_CASE("flow integration: gaussian target follows the closed-form path") {
  const EvenPoly1 quad{0.0, 1.5, 0.0};
  const Vec seeds{-2.0, -1.0, -0.3, 0.4, 1.0, 1.7};

  const FlowResult1 r = integrate_flow1(quad, seeds, 1.0, 1e-2);
  REQUIRE(r.positions.size() == seeds.size());
  CHECK(r.halvings == 0);
  for (std::size_t i = 0; i < seeds.size(); ++i)
    CHECK(std::fabs(r.positions[i] - gaussian_flow_map(1.5, 1.0, seeds[i])) < 1e-7);
  CHECK(std::fabs(gaussian_flow_map(1.5, 1.0, 1.0) - 1.8957832550927761) < 1e-15);

  // by t = 20 the flow has settled onto S(x) = 2x
  const FlowResult1 rr = integrate_flow1(quad, seeds, 20.0, 1e-2);
  for (std::size_t i = 0; i < seeds.size(); ++i)
    CHECK(std::fabs(rr.positions[i] - 2.0 * seeds[i]) < 1e-7);

  CHECK_THROWS_AS(integrate_flow1(quad, Vec{}, 1.0, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(integrate_flow1(quad, Vec{0.5, 0.5}, 1.0, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(integrate_flow1(quad, Vec{1.0, 0.0}, 1.0, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(integrate_flow1(quad, seeds, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(integrate_flow1(quad, seeds, -1.0, 1e-2), std::invalid_argument);
}

TEST_CASE("flow integration: constant potential holds every seed fixed") {
  const EvenPoly1 flat{0.3, 0.0, 0.0};
  const Vec seeds{-1.5, 0.2, 2.0};
  const FlowResult1 r = integrate_flow1(flat, seeds, 2.0, 5e-2);
  for (std::size_t i = 0; i < seeds.size(); ++i)
    CHECK(std::fabs(r.positions[i] - seeds[i]) < 1e-13);
}

TEST_CASE("flow transports the interpolation quantiles consistently") {
  // U = a x^2: nu_0 = N(0, 1/(1+2a)) flows to nu_t = N(0, 1/(1+2a_t)); the
  // integrated map must carry nu_0 quantiles onto nu_t quantiles
  const double a = 1.5, t = 0.4;
  const EvenPoly1 quad{0.0, a, 0.0};
  const double sig0 = 1.0 / std::sqrt(1.0 + 2.0 * a);
  const double sigt = 1.0 / std::sqrt(1.0 + 2.0 * gaussian_flow_coeff(a, t));

  Vec seeds;
  for (int i = 1; i < 20; ++i) seeds.push_back(sig0 * gaussian_quantile(i / 20.0));
  const FlowResult1 r = integrate_flow1(quad, seeds, t, 1e-2);
  for (int i = 1; i < 20; ++i) {
    const double want = sigt * gaussian_quantile(i / 20.0);
    CHECK(std::fabs(r.positions[static_cast<std::size_t>(i - 1)] - want) < 1e-6);
  }
}

TEST_CASE("inverse flow map: gaussian case recovers the halving map") {
  const EvenPoly1 quad{0.0, 1.5, 0.0};
  const FlowResult1 r = integrate_flow1(quad, linspace(-5.0, 5.0, 21), 20.0, 2e-2);
  const TransportMap t = inverse_flow_map1(r);

  CHECK(t.kind == MapKind::flow);
  CHECK(t.dim == 1);
  const MonotoneMap1D mono(make_standard_gaussian(1), make_gaussian1(0.5));
  for (double y : {-4.0, -2.7, -1.0, 0.0, 0.33, 2.0, 4.0}) {
    CHECK(std::fabs(t.forward(Vec{y})[0] - 0.5 * y) < 1e-6);
    CHECK(std::fabs(t.forward(Vec{y})[0] - mono.forward(y)) < 1e-6);
    CHECK(std::fabs(t.jacobian(Vec{y})(0, 0) - 0.5) < 1e-5);
    CHECK(std::fabs(t.inverse(t.forward(Vec{y}))[0] - y) < 1e-8);
  }
}

TEST_CASE("inverse flow map: quartic target agrees with the monotone route") {
  // target exp(-x^2/2 - x^4/4), i.e. U = x^4/4 against the gaussian reference
  const EvenPoly1 quart{0.0, 0.0, 0.25};
  const FlowResult1 r = integrate_flow1(quart, linspace(-4.8, 4.8, 97), 12.0, 2e-2);
  const TransportMap t = inverse_flow_map1(r);

  const MonotoneMap1D mono(make_standard_gaussian(1), make_even_quartic(0.5, 0.25));
  double sup = 0.0, slope = 0.0;
  for (int i = 0; i <= 80; ++i) {
    const double y = -4.0 + 0.1 * i;
    sup = std::max(sup, std::fabs(t.forward(Vec{y})[0] - mono.forward(y)));
    slope = std::max(slope, t.jacobian(Vec{y})(0, 0));
  }
  CHECK(sup < 1e-4);
  // the target is more log-concave than the reference, so T is a contraction
  CHECK(slope <= 1.0 + 1e-4);
}

TEST_CASE("log-concavity probe: quadratic, quartic, constant, rejection") {
  const Vec tg{0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
  const Vec xg = linspace(-3.0, 3.0, 13);

  const EvenPoly1 quad{0.0, 1.5, 0.0};
  const ProbeResult pq = logconcavity_probe1(quad, tg, xg);
  CHECK(pq.passed());
  CHECK(pq.min_second > 0.0);

  const EvenPoly1 quart{0.0, 0.0, 0.25};
  const ProbeResult p4 = logconcavity_probe1(quart, tg, xg);
  CHECK(p4.passed(1e-6));

  const EvenPoly1 flat{0.3, 0.0, 0.0};
  const ProbeResult pf = logconcavity_probe1(flat, tg, xg);
  CHECK(std::fabs(pf.min_second) < 1e-12);

  const EvenPoly1 bad{0.0, -0.2, 0.0};
  CHECK_THROWS_AS(logconcavity_probe1(bad, tg, xg), std::invalid_argument);

  const SeparablePotential sep{{quad, quart}};
  const ProbeResult ps = logconcavity_probe(sep, tg, xg);
  CHECK(ps.passed(1e-6));
  CHECK(ps.min_second <= pq.min_second + 1e-12);
  CHECK(ps.min_second <= p4.min_second + 1e-12);
}

TEST_CASE("flow interpolation density stays in the gaussian family") {
  const double a = 1.5, t = 0.4;
  const EvenPoly1 quad{0.0, a, 0.0};
  const double coef = 0.5 + gaussian_flow_coeff(a, t);
  const double f0 = flow_interpolation_density1(quad, t, 0.0);
  for (double x : {0.5, 1.0, 2.0}) {
    const double f = flow_interpolation_density1(quad, t, x);
    CHECK(std::fabs(std::log(f / f0) + coef * x * x) < 1e-10);
  }
}
