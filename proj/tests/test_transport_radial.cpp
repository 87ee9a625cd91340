// Radial transport of Lebesgue volume onto Psi(|x|) dx: closed-form cases,
// the cubic-root example, mass matching, implicit derivatives, and the
// sufficient contraction criterion with its counterexample.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ctlab/transport_radial.hpp"

using namespace ctlab;

TEST_CASE("constant density gives closed-form profiles") {
  // Psi = 1 in any dimension: identity
  const RadialMap id2([](double) { return 1.0; }, 2, 3.0);
  for (double r : {0.1, 0.5, 1.7, 2.9})
    CHECK(std::fabs(id2.phi(r) - r) < 1e-11);
  CHECK(std::fabs(id2.phi_prime(1.0) - 1.0) < 1e-10);

  // d = 1, Psi = 2: phi(r) = r/2
  const RadialMap half([](double) { return 2.0; }, 1, 3.0);
  for (double r : {0.2, 1.0, 2.4})
    CHECK(std::fabs(half.phi(r) - 0.5 * r) < 1e-11);
}

TEST_CASE("d=2 linear density: phi solves the cubic phi^2/2 + phi^3/3 = r^2/2") {
  const RadialMap m([](double s) { return 1.0 + s; }, 2, 3.0);
  // offline root of the cubic at r = 1
  CHECK(std::fabs(m.phi(1.0) - 0.806443932358772) < 1e-10);
  // implicit derivative phi' = r / (phi * Psi(phi))
  const double p = m.phi(1.0);
  CHECK(std::fabs(m.phi_prime(1.0) - 1.0 / (p * (1.0 + p))) < 1e-9);
  // both eigenvalues at r = 1 are below 1 (the density exceeds 1)
  CHECK(m.eig_radial(1.0) <= 1.0);
  CHECK(m.eig_tangential(1.0) <= 1.0);
}

TEST_CASE("mass matching identity holds along the whole profile") {
  const RadialMap m([](double s) { return std::exp(s); }, 2, 4.0);
  double worst = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double r = m.source_radius() * i / 200.0;
    const double p = m.phi(r);
    // 2 * int_0^p s e^s ds = r^2, closed form of the incomplete integral
    const double mass = 2.0 * (std::exp(p) * (p - 1.0) + 1.0);
    worst = std::max(worst, std::fabs(mass - r * r));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("inverse profile equals the d-th root of the shell mass") {
  const RadialMap m([](double s) { return 1.0 + s; }, 2, 3.0);
  for (double u : {0.3, 1.0, 2.0, 2.8}) {
    const double psi = std::sqrt(2.0 * (u * u / 2.0 + u * u * u / 3.0));
    CHECK(std::fabs(m.inverse_profile(u) - psi) < 1e-8);
    // round trip
    CHECK(std::fabs(m.phi(m.inverse_profile(u)) - u) < 1e-9);
  }
}

TEST_CASE("small-r limit: phi'(0) = Psi(0)^(-1/d)") {
  const RadialMap a([](double s) { return std::exp(s); }, 2, 4.0);
  CHECK(std::fabs(a.phi_prime(0.0) - 1.0) < 1e-12);
  CHECK(std::fabs(a.phi(1e-9) / 1e-9 - 1.0) < 1e-6);

  const RadialMap b([](double) { return 4.0; }, 2, 4.0);
  CHECK(std::fabs(b.phi_prime(0.0) - 0.5) < 1e-12);
}

TEST_CASE("exponential density on [0,4] satisfies the sufficient criterion") {
  const RadialMap m([](double s) { return std::exp(s); }, 2, 4.0);
  // (r Psi(r))' = e^r (1 + r) >= 1 for r >= 0
  double crit_min = kInf, eig_max = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double rt = 4.0 * i / 400.0;
    crit_min = std::min(crit_min, m.criterion_slope(rt));
    const double rs = m.source_radius() * std::max(i, 1) / 400.0;
    eig_max = std::max(eig_max, std::max(m.eig_radial(rs), m.eig_tangential(rs)));
  }
  CHECK(crit_min >= 1.0 - 1e-9);
  CHECK(eig_max <= 1.0 + 1e-6);
  // spot check the analytic criterion value
  CHECK(std::fabs(m.criterion_slope(1.0) - std::exp(1.0) * 2.0) < 1e-5);
}

TEST_CASE("decaying density violates the criterion and expands somewhere") {
  const RadialMap m([](double s) { return 1.0 / (1.0 + s); }, 2, 3.0);
  double crit_min = kInf, eig_max = 0.0;
  for (int i = 0; i <= 300; ++i) {
    const double rt = 3.0 * i / 300.0;
    crit_min = std::min(crit_min, m.criterion_slope(rt));
    const double rs = m.source_radius() * std::max(i, 1) / 300.0;
    eig_max = std::max(eig_max, std::max(m.eig_radial(rs), m.eig_tangential(rs)));
  }
  // (r/(1+r))' = 1/(1+r)^2 < 1 away from 0
  CHECK(crit_min < 1.0);
  CHECK(eig_max > 1.0);
}

TEST_CASE("positivity is enforced and out-of-range profile queries throw") {
  CHECK_THROWS_AS(RadialMap([](double s) { return 1.0 - s; }, 2, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(radial_profile([](double) { return 1.0; }, 2, 10.0, 2.0),
                  std::out_of_range);
}

TEST_CASE("the free profile function agrees with the tabulated map") {
  auto psi = [](double s) { return 1.0 + 0.5 * std::sin(s) + s; };
  const RadialMap m(psi, 2, 3.0);
  for (double r : {0.3, 0.9, 1.6})
    CHECK(std::fabs(radial_profile(psi, 2, r, 3.0) - m.phi(r)) < 1e-9);
}

TEST_CASE("as_transport_map exposes the radial structure in 2-D") {
  const RadialMap m([](double s) { return 1.0 + s; }, 2, 3.0);
  const TransportMap t = m.as_transport_map();

  const Vec x{0.6, 0.8};  // |x| = 1
  const Vec y = t(x);
  const double p = m.phi(1.0);
  CHECK(std::fabs(y[0] - 0.6 * p) < 1e-10);
  CHECK(std::fabs(y[1] - 0.8 * p) < 1e-10);

  // jacobian eigenvalues in the radial frame
  REQUIRE(t.has_jacobian());
  const Mat j = t.jacobian(x);
  const Vec eigs = jacobi_eigen(sym_part(j));
  const double lo = std::min(eigs[0], eigs[1]), hi = std::max(eigs[0], eigs[1]);
  const double er = m.eig_radial(1.0), et = m.eig_tangential(1.0);
  CHECK(std::fabs(lo - std::min(er, et)) < 1e-9);
  CHECK(std::fabs(hi - std::max(er, et)) < 1e-9);

  // inverse round trip
  REQUIRE(t.has_inverse());
  const Vec back = t.inverse(y);
  CHECK(std::fabs(back[0] - x[0]) < 1e-9);
  CHECK(std::fabs(back[1] - x[1]) < 1e-9);
}

TEST_CASE("sample table carries the export columns") {
  const RadialMap m([](double s) { return std::exp(s); }, 2, 4.0);
  Vec rs{0.5, 1.0, 2.0};
  const auto rows = m.sample_table(rs);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    REQUIRE(row.size() == 5);
    CHECK(std::fabs(row[1] - m.phi(row[0])) < 1e-12);
    CHECK(std::fabs(row[2] - m.phi_prime(row[0])) < 1e-12);
  }
}
