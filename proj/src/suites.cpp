#include "wakefar/suites.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "wakefar/errors.hpp"
#include "wakefar/io.hpp"
#include "wakefar/march.hpp"

namespace wakefar {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> radii(double lo, double hi, int n) {
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) r[i] = lo + (hi - lo) * i / (n - 1);
  return r;
}

CheckResult make(const std::string& suite, const std::string& name, double value, double threshold,
                 bool pass, const std::string& detail) {
  return {suite, name, value, threshold, pass, detail};
}

// Coefficients and radial functions shared by the manufactured checks.
double coefA(double r) { return 1.0 + 0.5 * r; }
double coefK(double r) { return 2.0 + r; }

std::array<double, 3> h1_fn(double r) {
  const double e = std::exp(-0.5 * r);
  return {r * e, e * (1.0 - 0.5 * r), e * (-1.0 + 0.25 * r)};
}
std::array<double, 3> h2_fn(double r) {
  return {1.0 + 0.3 * std::sin(r), 0.3 * std::cos(r), -0.3 * std::sin(r)};
}
std::array<double, 3> r1_fn(double r) {
  const double e = std::exp(-r);
  return {e, -e, e};
}
std::array<double, 3> r2_fn(double r) {
  return {2.0 + std::cos(0.5 * r), -0.5 * std::sin(0.5 * r), -0.25 * std::cos(0.5 * r)};
}

AnsatzCoefficients manufactured_sin() {
  AnsatzCoefficients co;
  co.A = coefA;
  co.B = [](double r) {
    const auto b = h2_fn(r);
    return -(r * r * b[2] + coefA(r) * b[1]) / b[0];
  };
  const CoefFn B = co.B;
  co.C = [B](double r) {
    const auto a = h1_fn(r);
    return -(r * r * a[2] + coefA(r) * a[1] + (B(r) - 1.0) * a[0]);
  };
  return co;
}

AnsatzCoefficients manufactured_sin2() {
  AnsatzCoefficients co;
  co.K = coefK;
  co.L = [](double r) { return -1.0 - 0.2 * r; };
  const CoefFn L = co.L;
  co.M = [L](double r) {
    const auto a = r1_fn(r);
    return -(r * r * a[2] + coefK(r) * a[1] + (L(r) - 4.0) * a[0]);
  };
  co.P = [L](double r) {
    const auto a = r1_fn(r), b = r2_fn(r);
    return -(r * r * b[2] + coefK(r) * b[1] + L(r) * b[0] + 2.0 * a[0]);
  };
  return co;
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& res) {
  return loglog_slope(h, res);
}

}  // namespace

AnalyticProfiles smooth_test_profiles() {
  return AnalyticProfiles(
      [](double t) {
        ProfileJets j;
        j[0] = {1.1 - 0.6 * t * t + 0.1 * t * t * t, -1.2 * t + 0.3 * t * t, -1.2 + 0.6 * t};
        j[1] = {0.9 + 0.05 * t - 0.5 * t * t, 0.05 - 1.0 * t, -1.0};
        j[2] = {0.4 - 0.3 * t * t + 0.1 * t * t * t, -0.6 * t + 0.3 * t * t, -0.6 + 0.6 * t};
        j[3] = {0.05 + 0.02 * t, 0.02, 0.0};
        j[4] = {0.06 - 0.04 * t * t, -0.08 * t, -0.08};
        return j;
      },
      1.0);
}

PolarField cos_mode_field(int n_r, int n_phi, AnsatzCoefficients& co) {
  auto h3 = [](double r) -> std::array<double, 3> {
    return {2.0 + std::sin(1.3 * r), 1.3 * std::cos(1.3 * r), -1.69 * std::sin(1.3 * r)};
  };
  co = AnsatzCoefficients{};
  co.A = coefA;
  co.B = [h3](double r) {
    const auto f = h3(r);
    return 1.0 - (r * r * f[2] + coefA(r) * f[1]) / f[0];
  };
  PolarField pf;
  pf.r = radii(1.0, 2.0, n_r);
  pf.n_phi = n_phi;
  for (double r : pf.r) {
    std::vector<double> row(n_phi);
    for (int j = 0; j < n_phi; ++j) row[j] = h3(r)[0] * std::cos(2.0 * kPi * j / n_phi);
    pf.values.push_back(row);
  }
  return pf;
}

PolarField cos4_mode_field(int n_r, int n_phi, AnsatzCoefficients& co) {
  auto r3 = [](double r) -> std::array<double, 3> {
    return {1.5 + std::cos(0.9 * r), -0.9 * std::sin(0.9 * r), -0.81 * std::cos(0.9 * r)};
  };
  co = AnsatzCoefficients{};
  co.K = coefK;
  co.L = [r3](double r) {
    const auto f = r3(r);
    return 16.0 - (r * r * f[2] + coefK(r) * f[1]) / f[0];
  };
  PolarField pf;
  pf.r = radii(1.0, 2.0, n_r);
  pf.n_phi = n_phi;
  for (double r : pf.r) {
    std::vector<double> row(n_phi);
    for (int j = 0; j < n_phi; ++j) row[j] = r3(r)[0] * std::cos(4.0 * 2.0 * kPi * j / n_phi);
    pf.values.push_back(row);
  }
  return pf;
}

RefinementStudy bde_refinement(BdeKind kind, const std::vector<int>& n_r, int n_phi,
                               double b2_shift) {
  RefinementStudy st;
  std::vector<double> h;
  for (int n : n_r) {
    AnsatzCoefficients co;
    const PolarField f = kind == BdeKind::sin_constraint ? cos_mode_field(n, n_phi, co)
                                                         : cos4_mode_field(n, n_phi, co);
    const BdeReport rep = bde_residual_check(f, co, kind, 0.1, b2_shift);
    st.n_r.push_back(n);
    st.residual.push_back(rep.max_residual);
    h.push_back(1.0 / (n - 1));
  }
  st.order = fitted_order(h, st.residual);
  return st;
}

std::vector<CheckResult> ansatz_suite() {
  const std::string s = "ansatz";
  std::vector<CheckResult> out;
  const auto grid = radii(0.5, 3.0, 26);

  {
    const AnsatzCoefficients co = manufactured_sin();
    const SplitReport rep = split_sin_ansatz(co, h1_fn, h2_fn, grid);
    out.push_back(make(s, "sin_split_manufactured", rep.max_full, 1e-12, rep.max_full <= 1e-12,
                       "max full residual with exact split solutions"));
    out.push_back(make(s, "sin_split_identity", rep.max_identity, 1e-12, rep.max_identity <= 1e-12,
                       "max |full - (sin S1 + S0)|"));
  }
  {
    AnsatzCoefficients co = manufactured_sin();
    co.C = [](double r) { return 0.2 * r; };
    auto g1 = [](double r) -> std::array<double, 3> {
      return {std::cos(0.7 * r) + 0.5 * r, -0.7 * std::sin(0.7 * r) + 0.5, -0.49 * std::cos(0.7 * r)};
    };
    auto g2 = [](double r) -> std::array<double, 3> {
      const double e = std::exp(-0.3 * r);
      return {e + r * r, -0.3 * e + 2.0 * r, 0.09 * e + 2.0};
    };
    const SplitReport rep = split_sin_ansatz(co, g1, g2, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r = grid[i];
      auto at = [&](double p) {
        const auto a = g1(r), b = g2(r);
        PolarJet j{a[0] * std::sin(p) + b[0], a[1] * std::sin(p) + b[1], a[2] * std::sin(p) + b[2],
                   a[0] * std::cos(p), -a[0] * std::sin(p)};
        return sin_equation_residual(co, r, p, j);
      };
      worst = std::max(worst, std::abs(at(kPi / 2) - at(-kPi / 2) - 2.0 * rep.s1[i]));
    }
    out.push_back(make(s, "sin_split_antipodal", worst, 1e-12, worst <= 1e-12,
                       "res(pi/2) - res(-pi/2) - 2 S1 for non-solutions"));

    auto zero = [](double) -> std::array<double, 3> { return {0.0, 0.0, 0.0}; };
    const SplitReport r0 = split_sin_ansatz(co, zero, g2, grid);
    double dev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (double p : {-2.0, -0.4, 0.9, 2.7}) {
        const auto b = g2(grid[i]);
        PolarJet j{b[0], b[1], b[2], 0.0, 0.0};
        dev = std::max(dev, std::abs(sin_equation_residual(co, grid[i], p, j) - 0.2 * grid[i] * std::sin(p) -
                                     r0.s0[i]));
      }
    }
    out.push_back(make(s, "sin_split_h1_zero", dev, 1e-12, dev <= 1e-12,
                       "with H1 = 0 the H part of the residual is S0 at every angle"));
  }
  {
    const AnsatzCoefficients co = manufactured_sin2();
    const SplitReport rep = split_sin2_ansatz(co, r1_fn, r2_fn, grid);
    out.push_back(make(s, "sin2_split_manufactured", rep.max_full, 1e-12, rep.max_full <= 1e-12,
                       "max full residual with exact split solutions"));
    out.push_back(make(s, "sin2_split_identity", rep.max_identity, 1e-12,
                       rep.max_identity <= 1e-12, "max |full - (sin^2 T1 + T0)|"));

    AnsatzCoefficients bad = co;
    bad.N = [](double r) { return 0.1 * r; };
    bool rejected = false;
    try {
      split_sin2_ansatz(bad, r1_fn, r2_fn, grid);
    } catch (const NonzeroN&) {
      rejected = true;
    }
    out.push_back(make(s, "sin2_split_nonzero_n_rejected", rejected ? 1.0 : 0.0, 1.0, rejected,
                       "NonzeroN raised for N = 0.1 r"));

    AnsatzCoefficients flat = co;
    flat.M = nullptr;
    auto zero = [](double) -> std::array<double, 3> { return {0.0, 0.0, 0.0}; };
    const SplitReport r0 = split_sin2_ansatz(flat, zero, r2_fn, grid);
    double spread = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto b = r2_fn(grid[i]);
      PolarJet j{b[0], b[1], b[2], 0.0, 0.0};
      double lo = INFINITY, hi = -INFINITY;
      for (double p : {-2.0, -0.4, 0.9, 2.7}) {
        const double v = sin2_equation_residual(flat, grid[i], p, j);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      spread = std::max(spread, hi - lo);
    }
    out.push_back(make(s, "sin2_split_r1_zero", spread, 1e-12, spread <= 1e-12,
                       "with R1 = 0 and M = 0 the residual does not depend on the angle"));
  }
  return out;
}

std::vector<CheckResult> bde_suite() {
  const std::string s = "bde";
  std::vector<CheckResult> out;
  const int np = 32;
  {
    const AnsatzCoefficients co = manufactured_sin();
    PolarField f;
    f.r = radii(1.0, 2.0, 41);
    f.n_phi = np;
    for (double r : f.r) {
      std::vector<double> row(np);
      for (int j = 0; j < np; ++j) row[j] = h1_fn(r)[0] * std::sin(2 * kPi * j / np) + h2_fn(r)[0];
      f.values.push_back(row);
    }
    const BdeReport rep = bde_residual_check(f, co, BdeKind::sin_constraint);
    out.push_back(make(s, "sin_constraint_on_manifold", rep.max_residual, 1e-9,
                       rep.max_residual <= 1e-9, "H = H1 sin + H2 gives h = 0"));
  }
  {
    const AnsatzCoefficients co = manufactured_sin2();
    PolarField f;
    f.r = radii(1.0, 2.0, 41);
    f.n_phi = np;
    for (double r : f.r) {
      std::vector<double> row(np);
      for (int j = 0; j < np; ++j) {
        const double sp = std::sin(2 * kPi * j / np);
        row[j] = r1_fn(r)[0] * sp * sp + r2_fn(r)[0];
      }
      f.values.push_back(row);
    }
    const BdeReport rep = bde_residual_check(f, co, BdeKind::sin2_constraint);
    out.push_back(make(s, "sin2_constraint_on_manifold", rep.max_residual, 1e-9,
                       rep.max_residual <= 1e-9, "R = R1 sin^2 + R2 gives h = 0"));
  }
  const std::vector<int> levels{21, 41, 81};
  for (BdeKind kind : {BdeKind::sin_constraint, BdeKind::sin2_constraint}) {
    const std::string tag = kind == BdeKind::sin_constraint ? "sin" : "sin2";
    const RefinementStudy st = bde_refinement(kind, levels, np);
    out.push_back(make(s, tag + "_refinement_order", st.order, 4.0, std::abs(st.order - 4.0) <= 0.5,
                       "fitted order of the residual for a mode off the constraint; scheme order 4 +- 0.5"));
    const RefinementStudy neg = bde_refinement(kind, levels, np, 0.1);
    const bool flagged = neg.order < 0.5 && neg.residual.back() > 1e-3;
    out.push_back(make(s, tag + "_negative_control", neg.order, 0.5, flagged,
                       "b2 + 0.1: residual must not converge (order below 0.5)"));
  }
  {
    bool thrown = false;
    try {
      require_off_pole(kPi / 2 + 0.05, BdeKind::sin_constraint);
    } catch (const PoleProximity&) {
      thrown = true;
    }
    out.push_back(make(s, "pole_proximity_rejected", thrown ? 1.0 : 0.0, 1.0, thrown,
                       "angle 0.05 from a pole of tan"));
  }
  return out;
}

std::vector<CheckResult> riccati_suite() {
  const std::string s = "riccati";
  std::vector<CheckResult> out;
  auto tan_fn = [](double p) -> std::array<double, 2> {
    const double c = std::cos(p);
    return {std::tan(p), 1.0 / (c * c)};
  };
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> u(0.0, kPi);
  double worst = 0.0;
  int n = 0;
  while (n < 100) {
    const double p = u(rng);
    if (std::abs(std::cos(p)) < 0.1 || std::abs(std::sin(p)) < 0.1) continue;
    worst = std::max(worst, std::abs(riccati_check(tan_fn, 0.5, p)));
    ++n;
  }
  for (double p : {0.3, 1.0, 2.5}) worst = std::max(worst, std::abs(riccati_check(tan_fn, 0.5, p)));
  out.push_back(make(s, "tan_h4_half", worst, 1e-12, worst <= 1e-12,
                     "max |residual| on 103 angles off the poles"));
  double off = 0.0;
  for (double p : {0.3, 1.0, 2.5}) off = std::max(off, std::abs(riccati_check(tan_fn, 0.4, p) - 0.2));
  out.push_back(make(s, "tan_h4_0.4_offset", off, 1e-12, off <= 1e-12, "residual equals 0.2"));
  auto zero = [](double) -> std::array<double, 2> { return {0.0, 0.0}; };
  double z = 0.0;
  for (double p : {0.3, 1.0, 2.5}) z = std::max(z, std::abs(riccati_check(zero, 1.0, p)));
  out.push_back(make(s, "zero_h4_one", z, 1e-15, z <= 1e-15, "h2 = 0 with h4 = 1"));
  return out;
}

std::vector<CheckResult> collapse_suite() {
  const std::string s = "collapse";
  std::vector<CheckResult> out;
  const ModelConstants k;
  const AnalyticProfiles prof = smooth_test_profiles();
  const std::vector<double> xs{1.0, 2.0, 5.0, 10.0};
  const std::vector<double> taus{0.15, 0.35, 0.55, 0.75, 0.9};
  const CollapseReport rep = reduction_collapse_check(prof, k, xs, taus);
  out.push_back(make(s, "ratio_is_one", rep.max_deviation, 1e-10,
                     rep.max_deviation <= 1e-10 && rep.skipped == 0,
                     "max |full / scaled ode - 1| over x in {1,2,5,10}"));
  out.push_back(make(s, "ratio_x_spread", rep.max_x_spread, 1e-10, rep.max_x_spread <= 1e-10,
                     "spread of the ratio across x"));
  const CollapseReport neg = reduction_collapse_check(prof, k, xs, taus, 0.7, AngularForm::cos);
  // Every term of the y H residual carries the same power of x at fixed
  // (tau, theta), so the violation shows up as a ratio away from 1.
  const bool flagged = neg.max_deviation > 1e-6;
  out.push_back(make(s, "cos_form_flagged", neg.max_deviation, 1e-6, flagged,
                     "density defect y H: the ratio must leave 1"));
  return out;
}

std::vector<CheckResult> run_suite(const std::string& suite) {
  if (suite == "ansatz") return ansatz_suite();
  if (suite == "bde") return bde_suite();
  if (suite == "riccati") return riccati_suite();
  if (suite == "collapse") return collapse_suite();
  if (suite == "all") {
    std::vector<CheckResult> all;
    for (auto* f : {&ansatz_suite, &bde_suite, &riccati_suite, &collapse_suite}) {
      auto part = f();
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  throw ConfigError("suite: unknown value '" + suite + "' (ansatz, bde, riccati, collapse, all)");
}

std::string report_csv(const std::vector<CheckResult>& rows) {
  std::string out = "suite,check,value,threshold,pass,detail\n";
  for (const auto& r : rows) {
    std::string d = r.detail;
    for (char& c : d)
      if (c == '"') c = '\'';
    out += r.suite + ',' + r.name + ',' + format_number(r.value) + ',' + format_number(r.threshold) +
           ',' + (r.pass ? "pass" : "fail") + ",\"" + d + "\"\n";
  }
  return out;
}

}  // namespace wakefar
