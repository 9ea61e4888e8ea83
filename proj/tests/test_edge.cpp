#include <doctest.h>

#include <cmath>

#include "wakefar/edge.hpp"
#include "wakefar/errors.hpp"

using namespace wakefar;

namespace {

std::vector<double> edge_taus(double a) {
  std::vector<double> t;
  for (int i = 0; i <= 12; ++i) t.push_back(a - a * std::pow(10.0, -4.0 + 2.0 * i / 12.0));
  return t;
}

}  // namespace

TEST_SUITE("edge") {

TEST_CASE("leading coefficients") {
  const ModelConstants k;
  const EdgeExpansion ex = make_edge_expansion(1.0, 1.0, k);
  CHECK(ex.p == doctest::Approx(10.0 / 7.0));
  CHECK(ex.q == doctest::Approx(13.0 / 7.0));
  CHECK(ex.g1 == doctest::Approx(10.0 * 0.136 / (7.0 * 0.23)));
  CHECK(ex.g1 == doctest::Approx(0.84472).epsilon(1e-5));
  CHECK(ex.h_slope == doctest::Approx(1.456 / 0.096));
  CHECK(ex.h_slope == doctest::Approx(15.1667).epsilon(1e-5));
  const SimilarityState s = edge_series_eval(0.99, ex, k);
  CHECK(s.e_val == doctest::Approx(std::pow(0.01, 10.0 / 7.0)));
  CHECK(s.e_val == doctest::Approx(1.389e-3).epsilon(1e-3));
}

TEST_CASE("edge exponent follows delta") {
  ModelConstants k;
  k.delta = 1.5;
  CHECK(make_edge_expansion(1.0, 1.0, k).p == doctest::Approx(2.0));
}

TEST_CASE("window is enforced") {
  const ModelConstants k;
  const EdgeExpansion ex = make_edge_expansion(1.0, 1.0, k);
  CHECK_THROWS_AS(edge_series_eval(0.5, ex, k), OutsideWindow);
  CHECK_THROWS_AS(edge_series_eval(1.0, ex, k), OutsideWindow);
}

TEST_CASE("balanced coefficient drives the residual to zero") {
  const ModelConstants k;
  const EdgeExpansion ex = make_edge_expansion(1.0, 1.0, k);
  const ResidualOrderReport r = series_residual_order(ex, k, edge_taus(1.0));
  CHECK(r.fitted_order[0] >= 4.0 / 7.0 - 0.05);
  for (double o : r.fitted_order) CHECK(o >= 0.5);
}

TEST_CASE("printed coefficient stalls at alpha = 0.23") {
  const ModelConstants k;
  const EdgeExpansion ex = make_edge_expansion(1.0, 1.0, k, GCoefficient::as_printed);
  const ResidualOrderReport r = series_residual_order(ex, k, edge_taus(1.0));
  CHECK(std::abs(r.fitted_order[0]) < 0.1);
}

TEST_CASE("both coefficients coincide at alpha = 1/3") {
  ModelConstants k;
  k.alpha = 1.0 / 3.0;
  const EdgeExpansion b = make_edge_expansion(1.0, 2.0, k);
  const EdgeExpansion p = make_edge_expansion(1.0, 2.0, k, GCoefficient::as_printed);
  CHECK(b.g1 == doctest::Approx(p.g1).epsilon(1e-14));
  CHECK(series_residual_order(p, k, edge_taus(1.0)).fitted_order[0] >= 0.5);
}

TEST_CASE("center quadratic coefficients") {
  const ModelConstants k;
  const CenterExpansion c = make_center_expansion(1.0, 1.0, 0.3, 0.05, 0.05, k);
  CHECK(c.e2 == doctest::Approx(-0.99265).epsilon(1e-4));
  CHECK(c.g2 == doctest::Approx(-1.48162).epsilon(1e-4));
  const SimilarityState s = center_series_eval(0.0, c, k);
  CHECK(s.de == 0.0);
  CHECK(s.dg == 0.0);
  CHECK_THROWS_AS(center_series_eval(0.2, c, k), OutsideWindow);
}

TEST_CASE("center series residual is second order") {
  const ModelConstants k;
  const CenterExpansion c = make_center_expansion(0.8, 0.9, 0.3, 0.05, 0.04, k);
  std::vector<double> lt, lr;
  for (double t : {4e-3, 8e-3, 1.6e-2, 3.2e-2}) {
    const SimilarityState s = center_series_eval(t, c, k);
    SecondDerivs d2;
    d2.d2e = 2 * c.e2;
    d2.d2g = 2 * c.g2;
    const Residual5 r = ode_residual(s, d2, k);
    lt.push_back(std::log(t));
    lr.push_back(std::log(std::abs(r[0]) + std::abs(r[1])));
  }
  const double slope = (lr.back() - lr.front()) / (lt.back() - lt.front());
  CHECK(slope >= 1.8);
}

TEST_CASE("probe is stable under amplitude refinement") {
  const ModelConstants k;
  const EdgeExpansion ex = make_edge_expansion(1.0, 3.1, k, GCoefficient::balanced,
                                               SeriesOrder::first_correction);
  ProbeOptions o;
  o.eg_only = true;
  const ProbeReport a = edge_manifold_probe(ex, k, o);
  o.delta = 1e-9;
  const ProbeReport b = edge_manifold_probe(ex, k, o);
  CHECK(a.dimension == 4);
  CHECK(a.regular_count == b.regular_count);
  const Vec base = edge_probe_endpoint(ex, k, o, Vec::Zero(4));
  const Vec again = edge_probe_endpoint(ex, k, o, Vec::Zero(4));
  CHECK((base - again).norm() == 0.0);
}

}
