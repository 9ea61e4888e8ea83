#include <doctest.h>

#include <cmath>

#include "wakefar/errors.hpp"
#include "wakefar/march.hpp"

using namespace wakefar;

namespace {

MarchState uniform_state(const MarchMesh& mesh, double x, double e, double eps) {
  MarchState s;
  s.x = x;
  s.mesh = mesh;
  s.resize();
  for (int j = 0; j < mesh.nz; ++j)
    for (int i = 0; i < mesh.ny; ++i) {
      const std::size_t n = s.at(i, j);
      s.e[n] = e;
      s.eps[n] = eps;
      s.rho1[n] = mesh.z(j);
      s.rho2[n] = 0.0;
    }
  return s;
}

// Smooth bump with all four fields nonzero.
MarchState bump_state(const MarchMesh& mesh, double x) {
  MarchState s;
  s.x = x;
  s.mesh = mesh;
  s.resize();
  for (int j = 0; j < mesh.nz; ++j)
    for (int i = 0; i < mesh.ny; ++i) {
      const double y = mesh.y(i), z = mesh.z(j);
      const double b = std::exp(-2.0 * (y * y + 1.3 * z * z));
      const std::size_t n = s.at(i, j);
      s.e[n] = 0.05 + b;
      s.eps[n] = 0.04 + 1.1 * b;
      s.rho1[n] = z * (1.0 - 0.4 * b);
      s.rho2[n] = 0.1 * b;
    }
  return s;
}

MarchState advance_to(MarchState s, double x1, const ModelConstants& k, const MarchConfig& cfg) {
  while (x1 - s.x > 1e-12 * x1) s = march_step(s, k, cfg, x1 - s.x);
  return s;
}

AnalyticProfiles quartic_profiles() {
  auto f = [](double t, double amp) {
    const double u = 1.0 - t * t;
    return ProfileJet{amp * std::pow(u, 4), amp * -8.0 * t * std::pow(u, 3),
                      amp * (-8.0 * std::pow(u, 3) + 48.0 * t * t * u * u)};
  };
  return AnalyticProfiles(
      [=](double t) {
        ProfileJets j;
        j[0] = f(t, 1.0);
        j[1] = f(t, 1.2);
        j[2] = f(t, 0.4);
        j[3] = f(t, 0.1);
        j[4] = f(t, 0.2);
        return j;
      },
      1.0);
}

}  // namespace

TEST_SUITE("march") {

TEST_CASE("uniform power law is reproduced to second order in the step") {
  const ModelConstants k = constant_solution_constants();
  MarchMesh mesh;
  mesh.ny = mesh.nz = 21;
  mesh.ly = mesh.lz = 1.0;
  const double x0 = 1.0, e0 = 1.0, g0 = 25.0 / 23.0;
  const double pe = 2 * k.alpha - 2, pg = 2 * k.alpha - 3;
  const MarchState s = uniform_state(mesh, x0, e0 * std::pow(x0, pe), g0 * std::pow(x0, pg));
  std::vector<double> err_e, err_g;
  for (double h : {4e-3, 2e-3, 1e-3}) {
    const MarchState t = march_step(s, k, MarchConfig{}, h);
    REQUIRE(t.x == doctest::Approx(x0 + h));
    const std::size_t c = t.at(10, 10);
    err_e.push_back(std::abs(t.e[c] - e0 * std::pow(x0 + h, pe)));
    err_g.push_back(std::abs(t.eps[c] - g0 * std::pow(x0 + h, pg)));
  }
  for (int i = 0; i < 2; ++i) {
    CHECK(err_e[i] / err_e[i + 1] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(err_g[i] / err_g[i + 1] == doctest::Approx(4.0).epsilon(0.05));
  }
  CHECK(err_e[0] < 4e-3 * 4e-3 * 10);
}

TEST_CASE("rho1 = z with rho2 = 0 survives a step") {
  const ModelConstants k;
  MarchMesh mesh;
  mesh.ny = 41;
  mesh.nz = 37;
  mesh.ly = 1.5;
  mesh.lz = 1.2;
  MarchState s = bump_state(mesh, 1.0);
  for (int j = 0; j < mesh.nz; ++j)
    for (int i = 0; i < mesh.ny; ++i) {
      s.rho1[s.at(i, j)] = mesh.z(j);
      s.rho2[s.at(i, j)] = 0.0;
    }
  const MarchState t = march_step(s, k, MarchConfig{});
  CHECK(t.x > s.x);
  double worst1 = 0.0, worst2 = 0.0;
  for (int j = 1; j < mesh.nz - 1; ++j)
    for (int i = 1; i < mesh.ny - 1; ++i) {
      worst1 = std::max(worst1, std::abs(t.rho1[t.at(i, j)] - mesh.z(j)));
      worst2 = std::max(worst2, std::abs(t.rho2[t.at(i, j)]));
    }
  CHECK(worst1 <= 1e-12);
  CHECK(worst2 <= 1e-12);
}

TEST_CASE("identity holds for both face averages") {
  const ModelConstants k;
  MarchMesh mesh;
  mesh.ny = mesh.nz = 25;
  MarchState s = bump_state(mesh, 2.0);
  for (int j = 0; j < mesh.nz; ++j)
    for (int i = 0; i < mesh.ny; ++i) s.rho1[s.at(i, j)] = mesh.z(j), s.rho2[s.at(i, j)] = 0.0;
  MarchConfig cfg;
  cfg.face = FaceAverage::harmonic;
  const MarchState t = march_step(s, k, cfg);
  for (int j = 1; j < mesh.nz - 1; ++j)
    for (int i = 1; i < mesh.ny - 1; ++i) CHECK(std::abs(t.rho1[t.at(i, j)] - mesh.z(j)) <= 1e-12);
}

TEST_CASE("halving sigma halves the difference") {
  const ModelConstants k;
  MarchMesh mesh;
  mesh.ny = mesh.nz = 33;
  mesh.ly = mesh.lz = 2.0;
  const MarchState s = bump_state(mesh, 1.0);
  auto run = [&](double sigma) {
    MarchConfig cfg;
    cfg.sigma = sigma;
    return advance_to(s, 1.2, k, cfg);
  };
  const MarchState a = run(1.0), b = run(0.5), c = run(0.25);
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t n = 0; n < a.e.size(); ++n) {
    d1 = std::max(d1, std::abs(a.e[n] - b.e[n]));
    d2 = std::max(d2, std::abs(b.e[n] - c.e[n]));
  }
  CHECK(d1 > 0.0);
  CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("exact lift collapses to interpolation accuracy") {
  const ModelConstants k;
  const AnalyticProfiles prof = quartic_profiles();
  MarchMesh mesh;
  mesh.ny = mesh.nz = 513;
  MarchConfig cfg;
  cfg.x1 = 4.0;
  mesh.ly = mesh.lz = required_half_width(1.0, cfg.x1, k.alpha);
  const MarchState a = init_from_similarity(prof, 1.0, mesh, k, cfg);
  const MarchState b = init_from_similarity(prof, 4.0, mesh, k, cfg);
  CHECK(a.axis(a.e) == doctest::Approx(1.0));
  CHECK(b.axis(b.e) == doctest::Approx(std::pow(4.0, 2 * k.alpha - 2)));
  const auto err = profile_collapse_error({a, b}, k);
  REQUIRE(err.size() == 1);
  CHECK(err[0] <= 1e-6);
}

TEST_CASE("mesh must hold the wake") {
  const ModelConstants k;
  MarchMesh mesh;
  mesh.ny = mesh.nz = 33;
  mesh.ly = mesh.lz = 1.0;
  MarchConfig cfg;
  cfg.x1 = 10.0;
  CHECK_THROWS_AS(init_from_similarity(quartic_profiles(), 1.0, mesh, k, cfg), MeshTooSmall);
  CHECK_THROWS_AS(init_gaussian(quartic_profiles(), 1.0, mesh, k, cfg), MeshTooSmall);
}

TEST_CASE("slope fitting") {
  std::vector<double> x, y;
  for (int i = 0; i <= 30; ++i) {
    x.push_back(std::pow(10.0, i / 20.0));
    y.push_back(3.0 * std::pow(x.back(), -1.54));
  }
  CHECK(std::abs(loglog_slope(x, y) + 1.54) <= 1e-12);
  std::vector<AxisRecord> axis;
  for (std::size_t i = 0; i < x.size(); ++i)
    axis.push_back({x[i], y[i], 2.0 * std::pow(x[i], -2.54), 0.0, 0.0, 0.0});
  const DecayFit f = fit_decay_exponents(axis, 1.0, 10.0);
  CHECK(std::abs(f.slope_e + 1.54) <= 1e-12);
  CHECK(std::abs(f.slope_eps + 2.54) <= 1e-12);
  CHECK_THROWS_AS(fit_decay_exponents(axis, 1.0, 5.0), WindowTooShort);
}

TEST_CASE("extinct state is rejected") {
  MarchMesh mesh;
  mesh.ny = mesh.nz = 9;
  MarchState s = uniform_state(mesh, 1.0, 0.0, 0.0);
  CHECK_THROWS_AS(apply_floors(s, MarchConfig{}), NonPositiveField);
  MarchConfig bad;
  bad.sigma = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("threaded and serial steps agree bit for bit") {
  const ModelConstants k;
  MarchMesh mesh;
  mesh.ny = 45;
  mesh.nz = 39;
  const MarchState s = bump_state(mesh, 1.0);
  const MarchConfig cfg;
  const double dx = ExplicitStepper(1).stable_step(s, k, cfg);
  const MarchState a = ExplicitStepper(1).advance(s, dx, k, cfg);
  const MarchState b = ExplicitStepper(4).advance(s, dx, k, cfg);
  CHECK(a.e == b.e);
  CHECK(a.eps == b.eps);
  CHECK(a.rho1 == b.rho1);
  CHECK(a.rho2 == b.rho2);
}

TEST_CASE("short run produces snapshots and records") {
  const ModelConstants k;
  MarchMesh mesh;
  mesh.ny = mesh.nz = 41;
  MarchConfig cfg;
  cfg.x1 = 2.0;
  cfg.snapshots = 3;
  mesh.ly = mesh.lz = required_half_width(1.0, cfg.x1, k.alpha);
  const MarchState s = init_gaussian(quartic_profiles(), 1.0, mesh, k, cfg);
  int seen = 0;
  const MarchResult r = run_march(s, k, cfg, ExplicitStepper(), [&](const MarchState&) { ++seen; });
  CHECK(seen == 3);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots.back().x == 2.0);
  CHECK(r.diagnostics.collapse.size() == 2);
  CHECK(r.diagnostics.axis.front().x == 1.0);
  CHECK(r.diagnostics.axis.back().x == doctest::Approx(2.0));
  CHECK(r.steps > 0);
}

}
