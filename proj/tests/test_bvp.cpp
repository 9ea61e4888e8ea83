#include <doctest.h>

#include <cmath>

#include "wakefar/bvp.hpp"
#include "wakefar/errors.hpp"

using namespace wakefar;

namespace {

const FullSolution& reference() {
  static const FullSolution fs = solve_profiles(ShootingSpec{}, ModelConstants{});
  return fs;
}

SimilarityState constant_right() {
  SimilarityState r;
  r.tau = 1.0;
  r.e_val = 1.0;
  r.g_val = 25.0 / 23.0;
  r.h_val = 1.0;
  return r;
}

}  // namespace

TEST_SUITE("bvp") {

TEST_CASE("default solve reports its status and floor") {
  const FullSolution& fs = reference();
  const ProfileMeta& m = fs.profiles.meta();
  CHECK(m.alpha == doctest::Approx(0.23));
  CHECK(m.e0 == doctest::Approx(1.0));
  CHECK(m.a > 0.0);
  CHECK(m.mismatch == doctest::Approx(fs.eg.report.norm));
  CHECK(m.converged == fs.eg.report.converged);
  CHECK(fs.eg.report.status == (m.converged ? "converged" : "least-squares floor"));
  CHECK(std::isfinite(m.residual_norm));
  CHECK(m.residual_smooth <= m.residual_norm);
}

TEST_CASE("profiles are bell shaped with incomplete mixing") {
  const SolutionProfiles& p = reference().profiles;
  const auto& n = p.nodes();
  REQUIRE(n.size() > 50);
  for (std::size_t i = 1; i < n.size(); ++i) {
    CHECK(n[i].e_val <= n[i - 1].e_val);
    CHECK(n[i].g_val <= n[i - 1].g_val);
  }
  CHECK(p.meta().h0 > 0.0);
  CHECK(p.meta().h0 < 1.0);
  CHECK(n.front().dh == 0.0);
  CHECK(std::abs(n.back().h_val) < 1e-12);
  CHECK(n.back().tau == doctest::Approx(p.meta().a));
}

TEST_CASE("normalization scales E and G but not H") {
  const FullSolution& fs = reference();
  const double lam = fs.profiles.meta().a / fs.unit.meta().a;
  CHECK(fs.profiles.meta().h0 == doctest::Approx(fs.unit.meta().h0));
  CHECK(fs.profiles.meta().e0 == doctest::Approx(lam * lam * fs.unit.meta().e0));
  const SolutionProfiles back = fs.unit.rescaled(lam);
  CHECK(back.at(0.3 * lam).g_val == doctest::Approx(fs.profiles.at(0.3 * lam).g_val).epsilon(1e-9));
}

TEST_CASE("finite interval: match point independence on the constant solution") {
  const ModelConstants k = constant_solution_constants();
  std::array<double, 2> e0{}, g0{};
  int i = 0;
  for (double tm : {0.5, 1.0 / 3.0}) {
    ShootingSpec sp;
    sp.alpha = k.alpha;
    sp.right = constant_right();
    sp.tau_match = tm;
    sp.e0_guess = 0.9;
    sp.g0_guess = 1.0;
    sp.norm_e0 = -1.0;
    const EgSolution eg = shoot_eg(sp, k);
    CHECK(eg.report.converged);
    e0[i] = eg.e0();
    g0[i] = eg.g0();
    ++i;
  }
  const double tol = ShootingSpec{}.rtol;
  CHECK(std::abs(e0[0] - e0[1]) <= 10 * tol);
  CHECK(std::abs(g0[0] - g0[1]) <= 10 * tol);
  CHECK(e0[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("H = 1 is reproduced with compatible edge data") {
  const FullSolution& fs = reference();
  LinearBvpSpec ls;
  ls.target = LinearTarget::h;
  ls.background = [&](double t) { return fs.eval(t); };
  ls.edge_p = fs.unit.meta().edge_p;
  ls.edge_value = 1.0;
  const LinearProfile one = solve_linear_profile(ls);
  for (int i = 0; i <= 100; ++i) CHECK(std::abs(one.eval(i / 100.0)[0] - 1.0) < 1e-8);
  ls.edge_value = 0.0;
  const LinearProfile h = solve_linear_profile(ls);
  CHECK(h.v0 > 0.0);
  CHECK(h.v0 < 1.0);
  CHECK(h.eval(1.0)[0] == 0.0);
}

TEST_CASE("collocation oracle agrees with shooting") {
  const FullSolution& fs = reference();
  const CollocationResult cr = collocation_oracle(CollocationSpec{}, ModelConstants{});
  CHECK(cr.constraint < 1e-10);
  std::vector<double> taus;
  for (const auto& n : cr.unit.nodes())
    if (n.tau <= 0.9) taus.push_back(n.tau);
  const double d = profile_distance([&](double t) { return fs.eval(t); },
                                    [&](double t) { return cr.unit.at(t); }, taus);
  CHECK(d < 1e-4);
  CHECK(cr.objective == doctest::Approx(fs.eg.report.norm).epsilon(1e-4));
}

TEST_CASE("invalid specs") {
  ShootingSpec sp;
  sp.tau_match = 1.5;
  CHECK_THROWS_AS(sp.validate(), ConfigError);
  ShootingSpec s2;
  s2.s0 = -1.0;
  CHECK_THROWS_AS(s2.validate(), ConfigError);
}

TEST_CASE("alpha scan reports a row per point") {
  ShootingSpec sp;
  const auto pts = scan_alpha(0.2, 0.26, 2, sp, ModelConstants{}, 2);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].alpha == doctest::Approx(0.2));
  CHECK(pts[1].alpha == doctest::Approx(0.26));
  for (const auto& p : pts) CHECK(p.floor >= 0.0);
}

}
