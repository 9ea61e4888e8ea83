#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "scratch_dir.hpp"
#include "wakefar/errors.hpp"
#include "wakefar/io.hpp"

using namespace wakefar;
namespace fs = std::filesystem;

namespace {

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SolutionProfiles sample_profiles() {
  std::vector<SimilarityState> nodes;
  std::vector<SecondDerivs> second;
  for (int i = 0; i <= 20; ++i) {
    const double t = i / 20.0;
    SimilarityState s;
    s.tau = t;
    s.e_val = 1.0 - t * t / 3.0;
    s.g_val = std::exp(-t) * (1.0 - t);
    s.h_val = 0.3 * (1.0 - t) + 1e-17 * i;
    s.r1_val = std::sin(t) / 7.0;
    s.r2_val = 0.1 / 3.0 * (1 - t * t);
    s.de = -2.0 * t / 3.0;
    s.dg = -std::exp(-t) * (2.0 - t);
    s.dh = -0.3;
    s.dr1 = std::cos(t) / 7.0;
    s.dr2 = -0.2 / 3.0 * t;
    nodes.push_back(s);
    second.push_back({});
  }
  ProfileMeta m;
  m.a = 1.0;
  return SolutionProfiles(nodes, second, m);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("number format is 17 significant digits and round trips") {
  CHECK(format_number(1.0) == "1.0000000000000000e+00");
  CHECK(format_number(-0.1) == "-1.0000000000000001e-01");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = std::exp(u(rng)) * (i % 2 ? 1 : -1);
    CHECK(parse_number(format_number(v)) == v);
  }
  CHECK(parse_number(format_number(std::numeric_limits<double>::denorm_min())) ==
        std::numeric_limits<double>::denorm_min());
  CHECK(std::isnan(parse_number("nan")));
  CHECK_THROWS_AS(parse_number("1.0x"), std::invalid_argument);
}

TEST_CASE("profiles write and read back bit for bit") {
  ScratchDir dir("io_profiles");
  const SolutionProfiles p = sample_profiles();
  export_profiles(p, dir / "p.csv");
  const std::string text = slurp(dir / "p.csv");
  CHECK(text.rfind("tau,E,G,H,R1,R2,dE,dG,dH,dR1,dR2\n", 0) == 0);
  const auto back = read_profiles(dir / "p.csv");
  REQUIRE(back.size() == p.nodes().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const auto& a = p.nodes()[i];
    const auto& b = back[i];
    CHECK(a.tau == b.tau);
    CHECK(a.e_val == b.e_val);
    CHECK(a.g_val == b.g_val);
    CHECK(a.h_val == b.h_val);
    CHECK(a.r1_val == b.r1_val);
    CHECK(a.r2_val == b.r2_val);
    CHECK(a.de == b.de);
    CHECK(a.dg == b.dg);
    CHECK(a.dh == b.dh);
    CHECK(a.dr1 == b.dr1);
    CHECK(a.dr2 == b.dr2);
  }
  export_profiles(p, dir / "q.csv");
  CHECK(slurp(dir / "q.csv") == text);
}

TEST_CASE("empty profiles are an error and leave no file") {
  ScratchDir dir("io_empty");
  CHECK_THROWS_AS(export_profiles(SolutionProfiles{}, dir / "e.csv"), DegenerateSeries);
  CHECK_FALSE(fs::exists(dir / "e.csv"));
}

TEST_CASE("unwritable target") {
  CHECK_THROWS_AS(write_text("/nonexistent_dir_xyz/out.csv", "x"), IoError);
}

TEST_CASE("malformed profile csv") {
  ScratchDir dir("io_bad");
  put(dir / "b.csv", "tau,E,G,H,R1,R2,dE,dG,dH,dR1,dR2\n0,1,2\n");
  try {
    read_profiles(dir / "b.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("axis csv round trip") {
  ScratchDir dir("io_axis");
  DecayDiagnostics d;
  d.axis = {{1.0, 0.5, 0.25, 0.1, -1.5, -2.5}, {2.0, 0.2, 0.05, 0.08, -1.52, -2.53}};
  write_text(dir / "a.csv", axis_csv(d));
  CHECK(slurp(dir / "a.csv").rfind("x,e0,eps0,rho2_0,slope_e,slope_eps\n", 0) == 0);
  const auto back = read_axis(dir / "a.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].eps0 == 0.05);
  CHECK(back[0].slope_eps == -2.5);
}

TEST_CASE("snapshot csv columns") {
  MarchState s;
  s.mesh.ny = 3;
  s.mesh.nz = 2;
  s.resize();
  const std::string csv = snapshot_csv(s);
  CHECK(csv.rfind("y,z,e,eps,rho1,rho2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("experiment files") {
  ScratchDir dir("io_exp");
  put(dir / "ok.csv", "# digitized by hand\nx_over_D,value\n10,0.2\n20,0.1\n");
  const ExperimentSeries s = load_experiment(dir / "ok.csv");
  CHECK(s.points.size() == 2);
  CHECK(s.provenance == "digitized by hand");
  CHECK(s.name == "ok");

  put(dir / "mono.csv", "x_over_D,value\n10,0.2\n5,0.1\n");
  CHECK_THROWS_AS(load_experiment(dir / "mono.csv"), MonotonicityError);

  put(dir / "nohead.csv", "10,0.2\n20,0.1\n");
  try {
    load_experiment(dir / "nohead.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }

  put(dir / "junk.csv", "x_over_D,value\n10,0.2\n20,abc\n");
  try {
    load_experiment(dir / "junk.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(load_experiment(dir / "missing.csv"), IoError);
}

TEST_CASE("experiment deviation against a power law") {
  ExperimentSeries s;
  s.points = {{2.0, 1.1 * std::pow(2.0, -0.77)}, {5.0, 0.9 * std::pow(5.0, -0.77)}, {50.0, 1.0}};
  std::vector<double> x, v;
  for (int i = 0; i <= 20; ++i) {
    x.push_back(std::pow(10.0, i / 20.0));
    v.push_back(std::pow(x.back(), -0.77));
  }
  const auto dev = compare_experiment(s, x, v);
  REQUIRE(dev.size() == 2);
  CHECK(dev[0].relative == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(dev[1].relative == doctest::Approx(-0.1).epsilon(1e-9));
}

}
