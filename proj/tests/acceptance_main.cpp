// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its own tolerances and runtime budget; a
// thrown exception fails the criterion without stopping the rest.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "ctlab/ctlab.hpp"

using namespace ctlab;

namespace {

int g_failed = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void run_criterion(int idx, const char* title, double time_budget,
                   const std::function<bool(std::string&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
    ok = false;
  }
  const double secs = seconds_since(t0);
  if (secs >= time_budget) {
    ok = false;
    detail += (detail.empty() ? "" : "; ") + std::string("over time budget");
  }
  if (!ok) ++g_failed;
  std::printf("criterion %2d  %-36s %s  %6.2fs  %s\n", idx, title, ok ? "pass" : "FAIL", secs,
              detail.c_str());
  std::fflush(stdout);
}

// shared defaults: mirror the command-line pipeline
constexpr std::uint64_t kSeed = 1729;
constexpr long kNPairs = 100000;
constexpr int kGridN = 64;
constexpr double kEpsStart = 1.0;
constexpr double kEpsEnd = 5e-3;
constexpr double kSinkhornTol = 1e-6;
constexpr int kMaxIter = 4000;
constexpr double kBudget = 0.05;  // entropic (h + eps) certification budget

Box common_box(const Box& a, const Box& b) {
  Box h = a;
  for (std::size_t i = 0; i < h.ax.size(); ++i) {
    h.ax[i].lo = std::min(h.ax[i].lo, b.ax[i].lo);
    h.ax[i].hi = std::max(h.ax[i].hi, b.ax[i].hi);
  }
  return h;
}

struct EntropicRun {
  bool converged = false;
  PairwiseScan scan;
};

EntropicRun entropic_run(const MeasureSpec& src, const MeasureSpec& tgt) {
  const Box box = common_box(src.support, tgt.support);
  auto dsrc = std::make_shared<DiscreteMeasure>(discretize(src, box, kGridN));
  auto dtgt = std::make_shared<DiscreteMeasure>(discretize(tgt, box, kGridN));
  const Coupling c = epsilon_schedule_solve(dsrc, dtgt, make_epsilon_schedule(kEpsStart, kEpsEnd),
                                            kMaxIter, kSinkhornTol);
  EntropicRun r;
  r.converged = c.converged;
  if (c.converged) {
    const GridMap map(c);
    Rng rng = derive_stream(kSeed, "verify/pairs");
    r.scan = entropic_pairwise_scan(map, *dsrc, *dtgt, kNPairs, rng);
  }
  return r;
}

double sup_derivative(const MonotoneMap1D& m, double lo, double hi, int n) {
  double sup = 0.0;
  for (int i = 0; i < n; ++i) sup = std::max(sup, m.derivative(lo + (hi - lo) * i / (n - 1)));
  return sup;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

void criterion_1() {
  run_criterion(1, "caffarelli 1-d quartic family", 15.0, [](std::string& d) {
    bool ok = true;
    char buf[160];
    for (const double lam : {0.1, 1.0, 10.0}) {
      const MonotoneMap1D m(make_gaussian1(1.0), make_quartic_tilted(lam));
      const double sup = sup_derivative(m, -8.0, 8.0, 4001);
      ok = ok && sup <= 1.0 + 1e-6;
      std::snprintf(buf, sizeof buf, "%ssup T'=%.6f (lambda %g)", d.empty() ? "" : "; ", sup, lam);
      d += buf;
    }
    d += "; bound 1+1e-6";
    return ok;
  });
}

void criterion_2() {
  run_criterion(2, "sharpness of the halved gaussian", 1.0, [](std::string& d) {
    const MeasureSpec src = make_gaussian1(1.0), tgt = make_gaussian1(0.5);
    const MonotoneMap1D m(src, tgt);
    const double sup = sup_derivative(m, -8.0, 8.0, 4001);
    bool ok = std::fabs(sup - 0.5) <= 1e-10;

    Vec grid(4001);
    for (int i = 0; i < 4001; ++i) grid[static_cast<std::size_t>(i)] = -8.0 + 16.0 * i / 4000.0;
    const auto entries = lp_norm_check_1d(
        src, tgt.pot.convexity_lower_bound, [&m](double x) { return m.derivative(x); },
        Vec{1.0, 2.0, 4.0, -1.0}, grid, 1e-6);
    // equality case: LHS = RHS = 1 for every p
    for (const auto& e : entries) {
      if (e.name.rfind("lp_bound_", 0) != 0) continue;
      ok = ok && std::fabs(e.computed_value - 1.0) <= 1e-8 &&
           std::fabs(e.bound_value - 1.0) <= 1e-8;
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "sup T'-0.5 = %.2e (tol 1e-10); Lp LHS=RHS=1 +- 1e-8", sup - 0.5);
    d = buf;
    return ok;
  });
}

void criterion_3() {
  run_criterion(3, "entropic caffarelli in 2-d", 60.0, [](std::string& d) {
    const EntropicRun quart = entropic_run(
        make_standard_gaussian(2),
        make_product2d(make_quartic_tilted(0.25), make_quartic_tilted(0.25)));
    const EntropicRun gauss = entropic_run(make_standard_gaussian(2),
                                           make_gaussian(Vec{0.5, 0.5}));
    const bool ok = quart.converged && quart.scan.pairwise <= 1.05 && gauss.converged &&
                    std::fabs(gauss.scan.pairwise - 0.5) <= 0.03;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "quartic pairwise %.4f <= 1.05; gaussian pairwise %.4f = 0.5 +- 0.03",
                  quart.scan.pairwise, gauss.scan.pairwise);
    d = buf;
    return ok;
  });
}

void criterion_4() {
  run_criterion(4, "anisotropic-to-quartic contraction", 60.0, [](std::string& d) {
    // source e^{-Q} with Q = diag(1,4) x.x / 2; target e^{-Q-P} with the
    // convex perturbation P = |x|^4 / 8
    Potential p;
    p.dim = 2;
    p.even = true;
    p.value = [](const Vec& x) {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      return 0.5 * x[0] * x[0] + 2.0 * x[1] * x[1] + r2 * r2 / 8.0;
    };
    p.grad = [](const Vec& x) {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      return Vec{x[0] + 0.5 * r2 * x[0], 4.0 * x[1] + 0.5 * r2 * x[1]};
    };
    p.hess = [](const Vec& x) {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      Mat h(2);
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
          h(i, k) = x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(k)] +
                    (i == k ? (i == 0 ? 1.0 : 4.0) + 0.5 * r2 : 0.0);
      return h;
    };
    const MeasureSpec src = make_gaussian(Vec{1.0, 0.5});
    const MeasureSpec tgt = make_density2d(p, Box::cube(2, 4.0), "tilted_anisotropic");
    const EntropicRun r = entropic_run(src, tgt);
    const bool ok = r.converged && r.scan.jacobian_sup <= 1.0 + kBudget &&
                    r.scan.pairwise <= 1.0 + kBudget;
    char buf[160];
    std::snprintf(buf, sizeof buf, "opnorm sup %.4f, pairwise %.4f <= 1 + %.2f",
                  r.scan.jacobian_sup, r.scan.pairwise, kBudget);
    d = buf;
    return ok;
  });
}

void criterion_5() {
  run_criterion(5, "heat-flow vs monotone rearrangement", 30.0, [](std::string& d) {
    const MeasureSpec tgt = make_quartic_tilted(0.25);
    EvenPoly1 u;
    u.a4 = tgt.lambda;  // U = W - V relative to the standard gaussian

    const double r = 0.9 * tgt.support1().hi;
    Vec seeds(97);
    for (int i = 0; i < 97; ++i) seeds[static_cast<std::size_t>(i)] = -r + 2.0 * r * i / 96.0;
    const FlowResult1 fs = integrate_flow1(u, seeds);
    const TransportMap tf = inverse_flow_map1(fs);
    const MonotoneMap1D mono(make_gaussian1(1.0), tgt);

    double sup_diff = 0.0, sup_prime = 0.0;
    for (int i = 0; i <= 800; ++i) {
      const double y = -4.0 + 8.0 * i / 800.0;
      sup_diff = std::max(sup_diff, std::fabs(tf.forward(Vec{y})[0] - mono.forward(y)));
      sup_prime = std::max(sup_prime, tf.jacobian(Vec{y})(0, 0));
    }
    Vec tg{0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2};
    Vec xg(41);
    for (int i = 0; i < 41; ++i) xg[static_cast<std::size_t>(i)] = -4.0 + 8.0 * i / 40.0;
    const ProbeResult probe = logconcavity_probe1(u, tg, xg);

    const bool ok = sup_diff <= 1e-4 && probe.min_second >= -1e-6 && sup_prime <= 1.0 + 1e-4;
    char buf[160];
    std::snprintf(buf, sizeof buf, "sup|T_flow - T_1d| = %.2e <= 1e-4; probe %.2e >= -1e-6; sup T' = %.6f",
                  sup_diff, probe.min_second, sup_prime);
    d = buf;
    return ok;
  });
}

void criterion_6() {
  run_criterion(6, "radial criterion for exp(r)", 2.0, [](std::string& d) {
    const RadialMap map([](double s) { return std::exp(s); }, 2, 4.0);
    double min_slope = kInf, max_eig = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double s = 4.0 * i / 400.0;
      min_slope = std::min(min_slope, map.criterion_slope(s));
      max_eig = std::max(max_eig, std::max(map.eig_radial(s), map.eig_tangential(s)));
    }
    const bool ok = min_slope >= 1.0 - 1e-9 && max_eig <= 1.0 + 1e-6;
    char buf[120];
    std::snprintf(buf, sizeof buf, "min (r Psi)' = %.6f >= 1; max(phi', phi/r) = %.8f <= 1+1e-6",
                  min_slope, max_eig);
    d = buf;
    return ok;
  });
}

void criterion_7() {
  run_criterion(7, "model measure profile", 5.0, [](std::string& d) {
    const MeasureSpec nu = make_nu_model(1.0);
    bool ok = true;
    char buf[120];
    for (const double t : {0.5, 1.0, 2.0}) {
      const double closed = std::exp(0.5 * t) + std::exp(-0.5 * t);
      const double brute = isoperimetric_profile_1d(nu, t);
      ok = ok && std::fabs(brute - closed) <= 1e-6;
      std::snprintf(buf, sizeof buf, "%sI(%g)=%.10f (closed %.10f)", d.empty() ? "" : "; ", t,
                    brute, closed);
      d += buf;
    }
    d += "; tol 1e-6";
    return ok;
  });
}

void criterion_8() {
  run_criterion(8, "model measure comparison map", 2.0, [](std::string& d) {
    const MonotoneMap1D m(make_nu_model(1.0), make_nu_model(2.0));
    const double sup = sup_derivative(m, -1.5707, 1.5707, 4001);
    char buf[120];
    std::snprintf(buf, sizeof buf, "sup T' = %.10f <= 1+1e-6; T'(0) = %.10f", sup,
                  m.derivative(0.0));
    d = buf;
    return sup <= 1.0 + 1e-6;
  });
}

void criterion_9() {
  run_criterion(9, "exponential tilt band", 1.0, [](std::string& d) {
    // g(x) = +cx tilt saturates the top of [1-c, 1+c], g(x) = -cx the bottom:
    // its inverse has slope 1/(1-c) = 2
    const MonotoneMap1D top(make_exponential(1.5), make_exponential(1.0));
    const MonotoneMap1D bottom(make_exponential(0.5), make_exponential(1.0));
    const MonotoneMap1D inv = bottom.inverse_map();
    double dev_top = 0.0, dev_inv = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double x = 8.0 * i / 400.0;
      dev_top = std::max(dev_top, std::fabs(top.derivative(x) - 1.5));
      dev_inv = std::max(dev_inv, std::fabs(inv.derivative(x) - 2.0));
    }
    const bool ok = dev_top <= 1e-8 && 1.5 <= 1.5 + 1e-12 && dev_inv <= 1e-8;
    char buf[120];
    std::snprintf(buf, sizeof buf, "|T'-1.5| = %.2e, |S'-2| = %.2e (tol 1e-8)", dev_top, dev_inv);
    d = buf;
    return ok;
  });
}

void criterion_10() {
  run_criterion(10, "hoelder modulus of the potential", 5.0, [](std::string& d) {
    const MeasureSpec src = make_gaussian1(1.0);
    const MeasureSpec tgt = make_even_quartic(0.0, 1.0);  // W = x^4
    const MonotoneMap1D m(src, tgt);
    HolderInputs in;
    in.source = &src.pot;  // delta2 <= 1 * t^2
    in.target = &tgt.pot;  // delta2 >= 2 * t^4
    in.a_p = 1.0;
    in.p = 1.0;
    in.a_q = 2.0;
    in.q = 3.0;
    Vec xg(81);
    for (int i = 0; i < 81; ++i) xg[static_cast<std::size_t>(i)] = -2.0 + 4.0 * i / 80.0;
    std::vector<Vec> audit;
    for (int i = 0; i <= 60; ++i) audit.push_back(Vec{-3.0 + 6.0 * i / 60.0});
    const CheckEntry e = holder_modulus_check([&m](const Vec& x) { return m.potential(x[0]); }, in,
                                              xg, Vec{0.1, 0.5, 1.0}, audit, audit);
    char buf[120];
    std::snprintf(buf, sizeof buf, "max delta2/t^{3/2} = %.6f <= 2*(1/2)^{1/4} = %.6f",
                  e.computed_value, e.bound_value);
    d = buf;
    return e.passed();
  });
}

void criterion_11() {
  run_criterion(11, "strong poincare equality", 1.0, [](std::string& d) {
    const TestFunction h2{"h2", 1, [](const Vec& x) { return x[0] * x[0] - 1.0; },
                          [](const Vec& x) { return Vec{2.0 * x[0]}; }};
    const TestFunction h3{"h3", 1, [](const Vec& x) { return x[0] * x[0] * x[0] - 3.0 * x[0]; },
                          [](const Vec& x) { return Vec{3.0 * x[0] * x[0] - 3.0}; }};
    const CheckEntry e2 = strong_poincare_check(h2);
    const CheckEntry e3 = strong_poincare_check(h3);
    const bool ok = std::fabs(e2.computed_value - 2.0) <= 1e-8 &&
                    std::fabs(e2.bound_value - 2.0) <= 1e-8 && e2.passed() &&
                    std::fabs(e3.computed_value - 6.0) <= 1e-6 &&
                    std::fabs(e3.bound_value - 9.0) <= 1e-6 && e3.passed();
    char buf[120];
    std::snprintf(buf, sizeof buf, "x^2-1: %.9f = %.9f (tol 1e-8); x^3-3x: %.6f <= %.6f",
                  e2.computed_value, e2.bound_value, e3.computed_value, e3.bound_value);
    d = buf;
    return ok;
  });
}

std::vector<CheckEntry> mc_suite(long n) {
  std::vector<CheckEntry> out;
  {
    const ordered_json in{{"check", "correlation"}, {"a", "strip"}, {"b", "disk"}, {"n", n}};
    out.push_back(correlation_check(make_strip(0.8), make_disk(1.0), 2, n, kSeed,
                                    inputs_digest(in)));
  }
  {
    const ordered_json in{
        {"check", "b_inequality"}, {"body", "square"}, {"a", 0.5}, {"b", 2.0}, {"n", n}};
    for (auto& e : b_inequality_check(make_square(1.0), 0.5, 2.0, 2, n, kSeed, inputs_digest(in)))
      out.push_back(std::move(e));
  }
  {
    const ordered_json in{{"check", "harge"}, {"f", "exp(-x^4)"}, {"g", "x^2"}, {"n", n}};
    const auto f = [](const Vec& x) {
      const double s = x[0] * x[0];
      return std::exp(-s * s);
    };
    const auto g = [](const Vec& x) { return x[0] * x[0]; };
    out.push_back(harge_check(f, g, 1, n, kSeed, inputs_digest(in)));
  }
  return out;
}

void criterion_12() {
  run_criterion(12, "monte carlo inequality suite", 30.0, [](std::string& d) {
    constexpr long n = 1000000;
    auto report_text = [&]() {
      VerificationReport rep;
      rep.command = "inequalities";
      rep.seed = kSeed;
      rep.config["n_samples"] = n;
      rep.entries = mc_suite(n);
      return rep.to_json_text();
    };
    const std::string r1 = report_text();
    const std::string r2 = report_text();  // fresh streams, same bytes

    bool all_passed = true;
    int count = 0;
    for (const auto& e : mc_suite(n)) {
      all_passed = all_passed && e.passed();
      ++count;
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "%d checks at 3 sigma, n=1e6; rerun %s", count,
                  r1 == r2 ? "byte-identical" : "DIFFERS");
    d = buf;
    return all_passed && r1 == r2;
  });
}

void criterion_13() {
  run_criterion(13, "profile domination over gaussian", 10.0, [](std::string& d) {
    const auto entries = bakry_ledoux_check(make_quartic_tilted(1.0), Vec{0.1, 0.25, 0.5});
    bool ok = true;
    char buf[100];
    for (const auto& e : entries) {
      const double margin = e.computed_value - e.bound_value;
      ok = ok && e.passed() && margin > 0.0;
      std::snprintf(buf, sizeof buf, "%smargin %.4f", d.empty() ? "" : ", ", margin);
      d += buf;
    }
    d += " (all > 0)";
    return ok;
  });
}

void criterion_14() {
  run_criterion(14, "lipschitz scaling onto dilated squares", 90.0, [](std::string& d) {
    const Vec s_list{0.5, 1.0, 2.0};
    Vec lip;
    bool converged = true;
    for (const double s : s_list) {
      const EntropicRun r = entropic_run(make_standard_gaussian(2),
                                         make_uniform_on_body(make_square(s)));
      converged = converged && r.converged;
      // jacobian sup: the shared discretization bias is multiplicative and
      // cancels in the scaling ratios; the pairwise floor bias does not
      lip.push_back(r.scan.jacobian_sup);
    }
    bool ok = converged;
    char buf[160];
    std::snprintf(buf, sizeof buf, "L = {%.4f, %.4f, %.4f}", lip[0], lip[1], lip[2]);
    d = buf;
    for (const auto& e : body_scaling_entries(s_list, lip, kBudget)) {
      ok = ok && e.passed();
      std::snprintf(buf, sizeof buf, "; ratio %.4f = %g +- 5%%", e.computed_value, e.bound_value);
      d += buf;
    }
    return ok;
  });
}

}  // namespace

int main() {
  std::printf("acceptance gate: 14 criteria\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  criterion_13();
  criterion_14();
  if (g_failed == 0)
    std::printf("acceptance gate: all 14 criteria passed\n");
  else
    std::printf("acceptance gate: %d criteria FAILED\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
