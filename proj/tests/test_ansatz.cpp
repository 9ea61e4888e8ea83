#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wakefar/ansatz.hpp"
#include "wakefar/errors.hpp"
#include "wakefar/suites.hpp"

using namespace wakefar;

namespace {

std::vector<double> radii() {
  std::vector<double> r;
  for (int i = 0; i <= 20; ++i) r.push_back(0.5 + 0.1 * i);
  return r;
}

RadialFn poly(double c0, double c1, double c2) {
  return [=](double r) {
    return std::array<double, 3>{c0 + c1 * r + c2 * r * r, c1 + 2 * c2 * r, 2 * c2};
  };
}

}  // namespace

TEST_SUITE("ansatz") {

TEST_CASE("sin split exact on manufactured radial solutions") {
  const RadialFn h1 = poly(0.2, 1.0, -0.3);
  const RadialFn h2 = poly(1.5, -0.2, 0.1);
  AnsatzCoefficients co;
  co.A = [](double r) { return 1.0 + r; };
  co.B = [=](double r) {
    const auto v = h2(r);
    return -(r * r * v[2] + (1.0 + r) * v[1]) / v[0];
  };
  co.C = [=](double r) {
    const auto v = h1(r);
    return -(r * r * v[2] + (1.0 + r) * v[1] + (co.B(r) - 1.0) * v[0]);
  };
  const SplitReport rep = split_sin_ansatz(co, h1, h2, radii());
  CHECK(rep.max_full <= 1e-12);
  for (double s : rep.s1) CHECK(std::abs(s) <= 1e-12);
  for (double s : rep.s0) CHECK(std::abs(s) <= 1e-12);
}

TEST_CASE("sin split identity on arbitrary radial functions") {
  AnsatzCoefficients co;
  co.A = [](double r) { return std::sin(r); };
  co.B = [](double r) { return 0.3 * r; };
  co.C = [](double r) { return std::exp(-r); };
  const RadialFn h1 = poly(0.7, -0.4, 0.9);
  const RadialFn h2 = poly(-0.1, 0.3, 0.2);
  const SplitReport rep = split_sin_ansatz(co, h1, h2, radii());
  CHECK(rep.max_full > 1e-3);
  CHECK(rep.max_identity <= 1e-12);
  for (std::size_t i = 0; i < rep.r.size(); ++i) {
    const double r = rep.r[i];
    PolarJet up, down;
    const auto a = h1(r), b = h2(r);
    up = {a[0] + b[0], a[1] + b[1], a[2] + b[2], 0.0, -a[0]};
    down = {-a[0] + b[0], -a[1] + b[1], -a[2] + b[2], 0.0, a[0]};
    const double diff = sin_equation_residual(co, r, std::numbers::pi / 2, up) -
                        sin_equation_residual(co, r, -std::numbers::pi / 2, down);
    CHECK(diff == doctest::Approx(2.0 * rep.s1[i]).epsilon(1e-12));
  }
}

TEST_CASE("H1 = 0 leaves an angle independent residual") {
  AnsatzCoefficients co;
  co.A = [](double r) { return r; };
  co.B = [](double) { return 0.5; };
  const RadialFn h2 = poly(1.0, 0.2, 0.0);
  for (double r : {0.7, 1.3}) {
    const auto v = h2(r);
    const PolarJet j{v[0], v[1], v[2], 0.0, 0.0};
    const double base = sin_equation_residual(co, r, 0.1, j);
    for (double p : {0.5, 1.9, -2.2}) CHECK(sin_equation_residual(co, r, p, j) == doctest::Approx(base));
    CHECK(base == doctest::Approx(r * r * v[2] + r * v[1] + 0.5 * v[0]));
  }
}

TEST_CASE("sin^2 split exact and N guard") {
  const RadialFn r1 = poly(0.4, 0.1, 0.05);
  const RadialFn r2 = poly(2.0, -0.3, 0.02);
  AnsatzCoefficients co;
  co.K = [](double r) { return 2.0 - 0.1 * r; };
  co.L = [](double r) { return -1.0 - 0.2 * r; };
  co.M = [=](double r) {
    const auto v = r1(r);
    return -(r * r * v[2] + co.K(r) * v[1] + (co.L(r) - 4.0) * v[0]);
  };
  co.P = [=](double r) {
    const auto v = r2(r);
    return -(r * r * v[2] + co.K(r) * v[1] + co.L(r) * v[0] + 2.0 * r1(r)[0]);
  };
  const SplitReport rep = split_sin2_ansatz(co, r1, r2, radii());
  CHECK(rep.max_full <= 1e-12);
  co.N = [](double r) { return 0.01 * r; };
  CHECK_THROWS_AS(split_sin2_ansatz(co, r1, r2, radii()), NonzeroN);
}

TEST_CASE("R1 = 0 and M = 0 leave an angle independent residual") {
  AnsatzCoefficients co;
  co.K = [](double) { return 1.0; };
  co.L = [](double) { return -2.0; };
  co.P = [](double r) { return r; };
  const PolarJet j{0.8, 0.1, -0.2, 0.0, 0.0};
  const double base = sin2_equation_residual(co, 1.1, 0.0, j);
  for (double p : {0.4, 2.0, 3.0}) CHECK(sin2_equation_residual(co, 1.1, p, j) == doctest::Approx(base));
}

TEST_CASE("riccati partial solution") {
  auto tan_fn = [](double p) {
    const double c = std::cos(p);
    return std::array<double, 2>{std::tan(p), 1.0 / (c * c)};
  };
  for (double p : {0.3, 1.0, 2.5}) CHECK(std::abs(riccati_check(tan_fn, 0.5, p)) < 1e-13);
  CHECK(riccati_check(tan_fn, 0.4, 1.0) == doctest::Approx(0.2));
  auto zero = [](double) { return std::array<double, 2>{0.0, 0.0}; };
  CHECK(riccati_check(zero, 1.0, 0.8) == 0.0);
}

TEST_CASE("pole proximity") {
  CHECK_THROWS_AS(require_off_pole(std::numbers::pi / 2 + 0.01, BdeKind::sin_constraint), PoleProximity);
  CHECK_THROWS_AS(require_off_pole(0.02, BdeKind::sin2_constraint), PoleProximity);
  CHECK_NOTHROW(require_off_pole(0.7, BdeKind::sin_constraint));
}

TEST_CASE("BDE residual converges at the scheme order") {
  const RefinementStudy s = bde_refinement(BdeKind::sin_constraint, {17, 33, 65, 129});
  CHECK(s.order == doctest::Approx(4.0).epsilon(0.125));
  const RefinementStudy c = bde_refinement(BdeKind::sin2_constraint, {17, 33, 65, 129});
  CHECK(c.order == doctest::Approx(4.0).epsilon(0.125));
  const RefinementStudy bad = bde_refinement(BdeKind::sin_constraint, {17, 33, 65, 129}, 32, 0.1);
  CHECK(bad.order < 0.5);
}

TEST_CASE("collapse ratio of arbitrary smooth profiles") {
  const ModelConstants k;
  const AnalyticProfiles prof = smooth_test_profiles();
  const CollapseReport rep =
      reduction_collapse_check(prof, k, {1.0, 2.0, 5.0, 10.0}, {0.1, 0.3, 0.5, 0.7, 0.9});
  CHECK(rep.samples.size() > 0);
  CHECK(rep.max_deviation <= 1e-10);
  CHECK(rep.max_x_spread <= 1e-10);
  const CollapseReport cosf = reduction_collapse_check(prof, k, {1.0, 2.0, 5.0, 10.0},
                                                       {0.1, 0.3, 0.5, 0.7, 0.9}, 0.7,
                                                       AngularForm::cos);
  CHECK(cosf.max_deviation > 1e-3);
}

TEST_CASE("every verification suite passes") {
  for (const auto& row : run_suite("all")) {
    INFO(row.suite << "/" << row.name << " = " << row.value);
    CHECK(row.pass);
  }
  CHECK_THROWS_AS(run_suite("nope"), ConfigError);
}

TEST_CASE("report csv") {
  const auto rows = riccati_suite();
  const std::string csv = report_csv(rows);
  CHECK(csv.rfind("suite,check,value,threshold,pass,detail\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(rows.size()) + 1);
}

}
