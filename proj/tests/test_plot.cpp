#include <doctest.h>

#include <fstream>
#include <sstream>

#include "scratch_dir.hpp"
#include "wakefar/bvp.hpp"
#include "wakefar/errors.hpp"
#include "wakefar/io.hpp"
#include "wakefar/plot.hpp"

using namespace wakefar;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<AxisRecord> power_axis() {
  std::vector<AxisRecord> axis;
  for (int i = 0; i <= 10; ++i) {
    const double x = std::pow(10.0, i / 10.0);
    axis.push_back({x, std::pow(x, -1.54), std::pow(x, -2.54), 0.0, -1.54, -2.54});
  }
  return axis;
}

}  // namespace

TEST_SUITE("plot") {

TEST_CASE("line plot rejects degenerate series") {
  LinePlot p;
  p.series.push_back({"one", {1.0}, {2.0}});
  CHECK_THROWS_AS(render_line_plot(p), DegenerateSeries);
  LinePlot q;
  q.logy = true;
  q.series.push_back({"neg", {1.0, 2.0}, {1.0, -1.0}});
  CHECK_THROWS_AS(render_line_plot(q), DegenerateSeries);
  LinePlot ok;
  ok.series.push_back({"two", {1.0, 2.0}, {3.0, 4.0}});
  const std::string svg = render_line_plot(ok);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg == render_line_plot(ok));
}

TEST_CASE("heat map is well formed") {
  HeatMap m;
  m.n_h = 3;
  m.n_v = 2;
  m.values = {0, 1, 2, 3, 4, 5};
  const std::string svg = render_heat_map(m);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("profile plots annotate the H maximum") {
  ScratchDir dir("plot_profiles");
  const FullSolution fs = solve_profiles(ShootingSpec{}, ModelConstants{});
  const auto files = render_profile_plots(fs.profiles, dir.path);
  REQUIRE(files.size() == 4);
  for (const auto& f : files) CHECK(fs::exists(f));
  const std::string h = slurp(dir / "fig1_H.svg");
  CHECK(h.find("max H = " + format_number(fs.profiles.meta().h0)) != std::string::npos);
  const auto maps = render_field_maps(fs.profiles, ModelConstants{}, dir.path, 21);
  CHECK(maps.size() == 4);
}

TEST_CASE("decay plot with and without experiment") {
  ScratchDir dir("plot_decay");
  const ModelConstants k;
  const auto bare = render_decay_plot(power_axis(), k, nullptr, dir / "a.svg");
  const std::string a = slurp(bare);
  CHECK(a.find("experiment") == std::string::npos);
  ExperimentSeries e;
  e.name = "experiment";
  e.points = {{2.0, 0.6}, {5.0, 0.3}};
  const auto with = render_decay_plot(power_axis(), k, &e, dir / "b.svg");
  CHECK(slurp(with).find("experiment") != std::string::npos);
  auto one = power_axis();
  one.resize(1);
  CHECK_THROWS_AS(render_decay_plot(one, k, nullptr, dir / "c.svg"), DegenerateSeries);
}

}
