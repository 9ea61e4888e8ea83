#include <doctest.h>

#include <cmath>

#include "wakefar/errors.hpp"
#include "wakefar/integrator.hpp"
#include "wakefar/model.hpp"
#include "wakefar/system.hpp"

using namespace wakefar;

TEST_SUITE("integrator") {

TEST_CASE("exponential decay with dense output") {
  const RhsFn f = [](double, const Vec& y, Vec& d) { d = -y; };
  Vec y0(1);
  y0 << 1.0;
  const auto res = DormandPrince({1e-11, 1e-14}).integrate(f, 0.0, 2.0, y0);
  CHECK(res.trajectory.y_end()(0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
  for (double t : {0.137, 0.9, 1.71}) CHECK(res.trajectory(t)(0) == doctest::Approx(std::exp(-t)).epsilon(1e-8));
  const auto back = DormandPrince({1e-11, 1e-14}).integrate(f, 2.0, 0.5, y0);
  CHECK(back.trajectory.y_end()(0) == doctest::Approx(std::exp(1.5)).epsilon(1e-9));
}

TEST_CASE("terminal event stops at the root") {
  const RhsFn f = [](double, const Vec&, Vec& d) { d.resize(1); d(0) = -1.0; };
  Vec y0(1);
  y0 << 1.0;
  const EventFn hit = [](double, const Vec& y) { return y(0) - 0.25; };
  const auto res = DormandPrince().integrate(f, 0.0, 5.0, y0, {hit});
  REQUIRE(res.event_index.has_value());
  CHECK(*res.event_index == 0);
  CHECK(res.t_final == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("error shrinks at the nominal order when the tolerance is tightened") {
  // y' = cos(t) y, y = exp(sin t)
  const RhsFn f = [](double t, const Vec& y, Vec& d) { d = std::cos(t) * y; };
  Vec y0(1);
  y0 << 1.0;
  const double exact = std::exp(std::sin(3.0));
  auto err = [&](double tol) {
    IntegratorOptions o{tol, tol * 1e-3};
    return std::abs(DormandPrince(o).integrate(f, 0.0, 3.0, y0).trajectory.y_end()(0) - exact);
  };
  const double coarse = err(1e-6), fine = err(1e-6 / 32.0);
  CHECK(fine < coarse);
  CHECK(coarse / fine > 4.0);
}

TEST_CASE("constant similarity solution is a fixed point of the flow") {
  const ModelConstants k = constant_solution_constants();
  SimilarityState s;
  s.tau = 0.1;
  s.e_val = 1.0;
  s.g_val = 25.0 / 23.0;
  s.h_val = 1.0;
  const Vec y0 = pack_state(s, kFullDim);
  const auto res = DormandPrince({1e-10, 1e-12}).integrate(similarity_rhs(k, kFullDim), 0.1, 0.9, y0);
  CHECK((res.trajectory.y_end() - y0).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("initial G = 0 is rejected before stepping") {
  const ModelConstants k;
  SimilarityState s;
  s.tau = 0.2;
  s.e_val = 1.0;
  s.g_val = 0.0;
  CHECK_THROWS_AS(DormandPrince().integrate(similarity_rhs(k, kEgDim), 0.2, 0.5, pack_state(s, kEgDim)),
                  NonPositiveField);
}

TEST_CASE("pack and unpack round trip") {
  SimilarityState s;
  s.tau = 0.3;
  s.e_val = 1;
  s.de = 2;
  s.g_val = 3;
  s.dg = 4;
  s.h_val = 5;
  s.dh = 6;
  s.r1_val = 7;
  s.dr1 = 8;
  s.r2_val = 9;
  s.dr2 = 10;
  const SimilarityState t = unpack_state(0.3, pack_state(s, kFullDim));
  CHECK(t.dr2 == 10);
  CHECK(t.h_val == 5);
  CHECK(t.dg == 4);
}

}
