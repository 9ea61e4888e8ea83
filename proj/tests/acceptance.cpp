// Acceptance gates 1-10. Prints one PASS/FAIL line per criterion; exit code
// is the number of failed criteria. `--only N` runs a single criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "wakefar/ansatz.hpp"
#include "wakefar/bvp.hpp"
#include "wakefar/edge.hpp"
#include "wakefar/errors.hpp"
#include "wakefar/march.hpp"
#include "wakefar/suites.hpp"
#include "wakefar/system.hpp"

using namespace wakefar;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Solved {
  FullSolution fs;
  double seconds = 0.0;
};

const Solved& solved() {
  static const Solved s = [] {
    const auto t0 = Clock::now();
    Solved out{solve_profiles(ShootingSpec{}, ModelConstants{}), 0.0};
    out.seconds = seconds_since(t0);
    return out;
  }();
  return s;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  return loglog_slope(x, y);
}

// ---------------------------------------------------------------- 1

Verdict mixing_maximum() {
  const Solved& s = solved();
  const ProfileMeta& m = s.fs.profiles.meta();
  const double target = 0.258;
  const double rel = std::abs(m.h0 - target) / target;
  Verdict v;
  v.pass = rel <= 0.05 && s.seconds <= 120.0;
  v.detail = "H(0) = " + fmt("%.4f", m.h0) + " vs 0.258 +/- 5% (off by " + fmt("%.1f", 100 * rel) +
             "%), " + s.fs.eg.report.status + ", mismatch " + fmt("%.4e", m.mismatch) +
             ", solve " + fmt("%.2f", s.seconds) + " s";
  return v;
}

// ---------------------------------------------------------------- 2

Verdict edge_exponents() {
  const FullSolution& fs = solved().fs;
  const double a = fs.unit.support();
  std::vector<double> s, e, g;
  for (int i = 0; i <= 20; ++i) {
    const double si = a * 1e-5 * std::pow(100.0, i / 20.0);
    const SimilarityState st = fs.eval(a - si);
    s.push_back(si);
    e.push_back(st.e_val);
    g.push_back(st.g_val);
  }
  const double pe = slope(s, e), pg = slope(s, g);
  const double re = std::abs(pe - 10.0 / 7.0) / (10.0 / 7.0);
  const double rg = std::abs(pg - 13.0 / 7.0) / (13.0 / 7.0);
  return {re <= 0.01 && rg <= 0.01,
          "dlnE/dln(a-tau) = " + fmt("%.5f", pe) + " (10/7), dlnG/dln(a-tau) = " +
              fmt("%.5f", pg) + " (13/7) over a-tau in [1e-5, 1e-3] a"};
}

// ---------------------------------------------------------------- 3

Verdict series_residual() {
  const ModelConstants k;
  std::vector<double> taus;
  for (int i = 0; i <= 12; ++i) taus.push_back(1.0 - std::pow(10.0, -4.0 + 2.0 * i / 12.0));
  const auto good = series_residual_order(make_edge_expansion(1.0, 1.0, k), k, taus);
  const auto bad =
      series_residual_order(make_edge_expansion(1.0, 1.0, k, GCoefficient::as_printed), k, taus);
  double worst = 1e300;
  for (double o : good.fitted_order) worst = std::min(worst, o);
  const bool printed_fails = bad.fitted_order[0] < 0.5;
  return {worst >= 0.5 && printed_fails,
          "min fitted order " + fmt("%.3f", worst) + " (>= 0.5); printed g1 order " +
              fmt("%.3f", bad.fitted_order[0]) + " (must fail)"};
}

// ---------------------------------------------------------------- 4

Verdict exact_solution() {
  const ModelConstants k = constant_solution_constants();
  SimilarityState c;
  c.tau = 0.5;
  c.e_val = 1.0;
  c.g_val = 2.0 * (1.0 - k.alpha);
  c.h_val = 1.0;
  double ode = 0.0;
  for (double r : ode_residual(c, SecondDerivs{}, k)) ode = std::max(ode, std::abs(r));
  const SecondDerivs d2 = ode_rhs(c, k);
  ode = std::max({ode, std::abs(d2.d2e), std::abs(d2.d2g), std::abs(d2.d2h), std::abs(d2.d2r1),
                  std::abs(d2.d2r2)});

  c.tau = 0.1;
  const Vec y0 = pack_state(c, kFullDim);
  const auto run =
      DormandPrince({1e-10, 1e-12}).integrate(similarity_rhs(k, kFullDim), 0.1, 0.9, y0);
  const double drift = (run.trajectory.y_end() - y0).lpNorm<Eigen::Infinity>();

  MarchMesh mesh;
  mesh.ny = mesh.nz = 21;
  MarchState s;
  s.mesh = mesh;
  s.resize();
  const double pe = 2 * k.alpha - 2, pg = 2 * k.alpha - 3;
  for (int j = 0; j < mesh.nz; ++j)
    for (int i = 0; i < mesh.ny; ++i) {
      const std::size_t n = s.at(i, j);
      s.e[n] = 1.0;
      s.eps[n] = c.g_val;
      s.rho1[n] = mesh.z(j);
    }
  std::vector<double> err;
  for (double h : {4e-3, 2e-3, 1e-3}) {
    const MarchState t = march_step(s, k, MarchConfig{}, h);
    const std::size_t m = t.at(10, 10);
    err.push_back(std::max(std::abs(t.e[m] - std::pow(1 + h, pe)),
                           std::abs(t.eps[m] - c.g_val * std::pow(1 + h, pg))));
  }
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  const bool second = std::abs(r1 - 4.0) < 0.2 && std::abs(r2 - 4.0) < 0.2;
  return {ode <= 1e-13 && drift <= 1e-10 && second,
          "ODE residual " + fmt("%.2e", ode) + ", drift " + fmt("%.2e", drift) +
              ", march step error ratios " + fmt("%.3f", r1) + ", " + fmt("%.3f", r2) +
              " (4 for O(dx^2))"};
}

// ---------------------------------------------------------------- 5

Verdict identities() {
  const ModelConstants k;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  double h_res = 0.0, pde3 = 0.0, pde4 = 0.0;
  for (int n = 0; n < 100; ++n) {
    SimilarityState s;
    s.tau = 0.5 * u(rng);
    s.e_val = u(rng);
    s.g_val = u(rng);
    s.de = u(rng) - 1;
    s.dg = u(rng) - 1;
    s.h_val = 1.0;
    h_res = std::max(h_res, std::abs(ode_residual(s, SecondDerivs{}, k)[2]));

    PhysicalPoint p;
    p.x = 0.5 + u(rng);
    p.y = u(rng) - 1;
    p.z = u(rng) - 1;
    p.e = {u(rng), u(rng) - 1, u(rng) - 1, u(rng) - 1, u(rng) - 1, u(rng) - 1};
    p.eps = {u(rng), u(rng) - 1, u(rng) - 1, u(rng) - 1, u(rng) - 1, u(rng) - 1};
    p.rho1.value = p.z;
    p.rho1.dz = 1.0;
    const Residual4 r = full_pde_residual(p, k);
    pde3 = std::max(pde3, std::abs(r[2]));
    pde4 = std::max(pde4, std::abs(r[3]));
  }

  MarchMesh mesh;
  mesh.ny = 49;
  mesh.nz = 41;
  mesh.ly = 1.6;
  mesh.lz = 1.3;
  MarchState s;
  s.mesh = mesh;
  s.resize();
  for (int j = 0; j < mesh.nz; ++j)
    for (int i = 0; i < mesh.ny; ++i) {
      const double y = mesh.y(i), z = mesh.z(j);
      const double b = std::exp(-1.5 * (y * y + 2.0 * z * z));
      const std::size_t n = s.at(i, j);
      s.e[n] = 0.02 + b;
      s.eps[n] = 0.03 + 0.8 * b;
      s.rho1[n] = z;
    }
  double step3 = 0.0, step4 = 0.0;
  MarchState t = s;
  for (int step = 0; step < 3; ++step) {
    const MarchState nxt = march_step(t, k, MarchConfig{});
    for (int j = 1; j < mesh.nz - 1; ++j)
      for (int i = 1; i < mesh.ny - 1; ++i) {
        step3 = std::max(step3, std::abs(nxt.rho1[nxt.at(i, j)] - mesh.z(j)));
        step4 = std::max(step4, std::abs(nxt.rho2[nxt.at(i, j)]));
      }
    // restore the exact boundary values before the next step
    t = nxt;
    for (int j = 0; j < mesh.nz; ++j)
      for (int i = 0; i < mesh.ny; ++i)
        if (i == 0 || j == 0 || i == mesh.ny - 1 || j == mesh.nz - 1) t.rho1[t.at(i, j)] = mesh.z(j);
  }
  return {h_res == 0.0 && pde3 == 0.0 && pde4 == 0.0 && step3 <= 1e-12 && step4 <= 1e-12,
          "H=1 residual " + fmt("%.1e", h_res) + "; rho1=z PDE " + fmt("%.1e", pde3) +
              ", rho2 PDE " + fmt("%.1e", pde4) + "; per step " + fmt("%.1e", step3) + " / " +
              fmt("%.1e", step4)};
}

// ---------------------------------------------------------------- 6

Verdict reduction_collapse() {
  const ModelConstants k;
  std::vector<double> taus;
  for (int i = 1; i <= 19; ++i) taus.push_back(i / 20.0);
  const CollapseReport r =
      reduction_collapse_check(smooth_test_profiles(), k, {1.0, 2.0, 5.0, 10.0}, taus);
  return {r.max_deviation <= 1e-10 && !r.samples.empty(),
          "max |ratio - 1| = " + fmt("%.2e", r.max_deviation) + " over " +
              std::to_string(r.samples.size()) + " samples, x in {1,2,5,10}"};
}

// ---------------------------------------------------------------- 7

Verdict ansatz_splits() {
  int failed = 0, total = 0;
  std::string bad;
  for (const auto& suite : {ansatz_suite(), riccati_suite()})
    for (const auto& row : suite) {
      ++total;
      if (!row.pass) {
        ++failed;
        bad += " " + row.name;
      }
    }
  auto tan_fn = [](double p) {
    const double c = std::cos(p);
    return std::array<double, 2>{std::tan(p), 1.0 / (c * c)};
  };
  double ric = 0.0;
  for (double p : {0.3, 1.0, 2.5}) ric = std::max(ric, std::abs(riccati_check(tan_fn, 0.5, p)));
  return {failed == 0 && ric <= 1e-14,
          std::to_string(total - failed) + "/" + std::to_string(total) +
              " split and riccati checks pass" + (failed ? " (failed:" + bad + ")" : "") +
              "; riccati(tan, 1/2) = " + fmt("%.1e", ric)};
}

// ---------------------------------------------------------------- 8

Verdict cross_validation() {
  const FullSolution& fs = solved().fs;
  const CollocationResult cr = collocation_oracle(CollocationSpec{}, ModelConstants{});
  std::vector<double> taus;
  for (const auto& n : cr.unit.nodes())
    if (n.tau <= 0.9) taus.push_back(n.tau);
  const double d = profile_distance([&](double t) { return fs.eval(t); },
                                    [&](double t) { return cr.unit.at(t); }, taus);
  return {d <= 1e-4, "relative sup-norm distance " + fmt("%.3e", d) + " on [0, 0.9a] (" +
                         std::to_string(taus.size()) + " oracle nodes)"};
}

// ---------------------------------------------------------------- 9

Verdict self_similar_decay() {
  const ModelConstants k;
  const SolutionProfiles& p = solved().fs.profiles;
  MarchConfig cfg;
  MarchMesh mesh;
  mesh.ny = mesh.nz = 257;
  mesh.ly = mesh.lz = required_half_width(p.support(), cfg.x1, k.alpha);
  const auto t0 = Clock::now();
  const MarchResult r =
      run_march(init_from_similarity(p, cfg.x0, mesh, k, cfg), k, cfg, ExplicitStepper());
  const double secs = seconds_since(t0);
  const DecayFit f = fit_decay_exponents(r.diagnostics.axis, cfg.x0, cfg.x1);
  const double se = 2 * k.alpha - 2, sg = 2 * k.alpha - 3;
  const bool slopes = std::abs(f.slope_e - se) <= 0.05 * std::abs(se) &&
                      std::abs(f.slope_eps - sg) <= 0.05 * std::abs(sg);
  // After the first interval each collapse error may exceed its predecessor
  // by at most 1% (the front-resolution noise floor).
  const auto& c = r.diagnostics.collapse;
  bool settled = c.size() >= 3;
  for (std::size_t i = 2; i < c.size(); ++i) settled = settled && c[i] <= 1.01 * c[i - 1];
  std::string list;
  for (double v : c) list += (list.empty() ? "" : ", ") + fmt("%.3e", v);
  return {slopes && settled && secs <= 600.0,
          "slopes " + fmt("%.4f", f.slope_e) + " / " + fmt("%.4f", f.slope_eps) +
              " vs -1.54 / -2.54 on [1, 10]; collapse [" + list + "]; " + fmt("%.0f", secs) +
              " s at 257^2"};
}

// ---------------------------------------------------------------- 10

Verdict shape() {
  const SolutionProfiles& p = solved().fs.profiles;
  const auto& n = p.nodes();
  bool mono = true;
  for (std::size_t i = 1; i < n.size(); ++i)
    mono = mono && n[i].e_val <= n[i - 1].e_val && n[i].g_val <= n[i - 1].g_val;
  const double h0 = p.meta().h0;
  return {mono && h0 > 0.0 && h0 < 1.0,
          std::string("E/E0, G/G0 ") + (mono ? "monotone" : "NOT monotone") + " over " +
              std::to_string(n.size()) + " nodes; H(0) = " + fmt("%.4f", h0)};
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
      return 64;
    }
  }
  const std::function<Verdict()> gates[] = {
      mixing_maximum, edge_exponents,   series_residual,  exact_solution,     identities,
      reduction_collapse, ansatz_splits, cross_validation, self_similar_decay, shape};
  int failed = 0;
  for (int i = 0; i < 10; ++i) {
    if (only && *only != i + 1) continue;
    Verdict v;
    try {
      v = gates[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s\n", i + 1, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed;
}
