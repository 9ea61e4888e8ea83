#include "wakefar/edge.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "wakefar/errors.hpp"
#include "wakefar/system.hpp"

namespace wakefar {

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

EdgeExpansion make_edge_expansion(double a, double c1, const ModelConstants& k,
                                  GCoefficient g_choice, SeriesOrder order) {
  k.validate();
  if (!(a > 0.0) || !(c1 > 0.0)) {
    throw BadConstants("edge radius a and coefficient c1 must be positive");
  }
  EdgeExpansion ex;
  ex.a = a;
  ex.c1 = c1;
  ex.g_choice = g_choice;
  ex.order = order;
  ex.p = 1.0 / (2.0 - k.delta);
  ex.q = 2.0 * ex.p - 1.0;
  const double p = ex.p, q = ex.q, al = k.alpha;

  ex.g1_balanced = k.c_e * p * c1 * c1 / (al * a);
  ex.g1_printed = 30.0 * k.c_e * c1 * c1 / (7.0 * a);
  ex.g1 = g_choice == GCoefficient::balanced ? ex.g1_balanced : ex.g1_printed;

  // O(s) corrections: the s^p balance of the E equation and the s^q balance
  // of the G equation, linear in (e_corr, g_corr).
  Eigen::Matrix2d m;
  m << a * (p + 1.0) * (2.0 * p + 1.0) / p, -a * (p + 1.0),
      2.0 * a * (q + 1.0), a * (q + 1.0) * (1.0 - q) / q;
  const Eigen::Vector2d rhs(-(p - 1.0) - 2.0 * (1.0 - al) / al,
                            -(q - 1.0) - (3.0 - 2.0 * al) / al);
  const Eigen::Vector2d corr = m.partialPivLu().solve(rhs);
  ex.e_corr = corr[0];
  ex.g_corr = corr[1];

  const double cep = k.c_e * p;
  ex.h_slope = k.c_rho / (a * (k.c_rho - cep));
  const double sh = ex.h_slope;
  ex.r1_coef = k.c_rho * sh * (sh - 2.0 / a) / (cep - 2.0 * k.c_1rho);
  ex.r2_coef = k.c_rho / (cep - 2.0 * k.c_1rho);

  const double cr = k.c_rho, ce = k.c_e, c1r = k.c_1rho;
  const double d = 7.0 * cr - 10.0 * ce;
  ex.r1_printed = 49.0 * cr * cr * (7.0 * (2.0 * a + 1.0) * cr - 20.0 * a * ce) /
                  (2.0 * a * a * d * d * (5.0 * ce - 7.0 * c1r));
  ex.r2_printed = 7.0 * cr / (2.0 * (5.0 * ce - 7.0 * c1r));
  return ex;
}

SimilarityState edge_series_eval(double tau, const EdgeExpansion& ex,
                                 const ModelConstants& /*k*/) {
  const double s = ex.a - tau;
  if (!(s > 0.0) || s > ex.window * ex.a * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "tau = " << tau << " outside the edge window (" << ex.a * (1.0 - ex.window)
       << ", " << ex.a << ")";
    throw OutsideWindow(os.str());
  }
  const bool corr = ex.order == SeriesOrder::first_correction;
  const double ec = corr ? ex.e_corr : 0.0;
  const double gc = corr ? ex.g_corr : 0.0;
  const double sp = std::pow(s, ex.p), sq = std::pow(s, ex.q);

  SimilarityState st;
  st.tau = tau;
  st.e_val = ex.c1 * sp * (1.0 + ec * s);
  st.de = -ex.c1 * (ex.p * sp / s + ec * (ex.p + 1.0) * sp);
  st.g_val = ex.g1 * sq * (1.0 + gc * s);
  st.dg = -ex.g1 * (ex.q * sq / s + gc * (ex.q + 1.0) * sq);
  st.h_val = -ex.h_slope * s;
  st.dh = ex.h_slope;
  st.r1_val = ex.r1_coef * s * s;
  st.dr1 = -2.0 * ex.r1_coef * s;
  st.r2_val = ex.r2_coef * s * s;
  st.dr2 = -2.0 * ex.r2_coef * s;
  return st;
}

SecondDerivs edge_series_d2(double tau, const EdgeExpansion& ex) {
  const double s = ex.a - tau;
  const bool corr = ex.order == SeriesOrder::first_correction;
  const double ec = corr ? ex.e_corr : 0.0;
  const double gc = corr ? ex.g_corr : 0.0;
  const double p = ex.p, q = ex.q;
  SecondDerivs d;
  d.d2e = ex.c1 * (p * (p - 1.0) * std::pow(s, p - 2.0) +
                   ec * (p + 1.0) * p * std::pow(s, p - 1.0));
  d.d2g = ex.g1 * (q * (q - 1.0) * std::pow(s, q - 2.0) +
                   gc * (q + 1.0) * q * std::pow(s, q - 1.0));
  d.d2h = 0.0;
  d.d2r1 = 2.0 * ex.r1_coef;
  d.d2r2 = 2.0 * ex.r2_coef;
  return d;
}

CenterExpansion make_center_expansion(double e0, double g0, double h0,
                                      double r10, double r20,
                                      const ModelConstants& k, SinkForm form) {
  if (!(e0 > 0.0) || !(g0 > 0.0)) {
    throw BadConstants("axis values E(0), G(0) must be positive");
  }
  CenterExpansion c;
  c.e0 = e0;
  c.g0 = g0;
  c.h0 = h0;
  c.r10 = r10;
  c.r20 = r20;
  const double a = k.alpha;
  const double k0 = e0 * e0 / g0;  // diffusivity E^2/G on the axis
  c.e2 = g0 * (2.0 * (a - 1.0) * e0 + g0) / (4.0 * k.c_e * e0 * e0);
  c.g2 = g0 * ((2.0 * a - 3.0) * g0 + k.c_eps2 * g0 * g0 / e0) /
         (4.0 * k.c_eps() * e0 * e0);
  // tau-coefficient of G'/G - 2E'/E near the axis.
  const double l1 = 2.0 * c.g2 / g0 - 4.0 * c.e2 / e0;
  c.h2c = l1 * (h0 - 1.0) / 8.0;
  const double sink = form == SinkForm::corrected ? g0 * g0 / (e0 * e0 * e0)
                                                  : g0 / (e0 * e0 * e0);
  c.r12 = (r10 * (2.0 * l1 + (k.c_t / k.c_1rho) * sink) -
           8.0 * (k.c_rho / k.c_1rho) * c.h2c * (h0 - 1.0)) /
          12.0;
  c.r22 = ((r20 / (k.c_1rho * k0)) * (k.c_t * g0 / e0 + 2.0 * a) - 2.0 * r10 -
           2.0 * (k.c_rho / k.c_1rho) * (h0 - 1.0) * (h0 - 1.0)) /
          4.0;
  return c;
}

SimilarityState center_series_eval(double tau, const CenterExpansion& c,
                                   const ModelConstants& /*k*/) {
  if (tau < 0.0 || tau > c.window * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "tau = " << tau << " outside the center window [0, " << c.window << "]";
    throw OutsideWindow(os.str());
  }
  const double t2 = tau * tau;
  SimilarityState s;
  s.tau = tau;
  s.e_val = c.e0 + c.e2 * t2;
  s.g_val = c.g0 + c.g2 * t2;
  s.h_val = c.h0 + c.h2c * t2;
  s.r1_val = c.r10 + c.r12 * t2;
  s.r2_val = c.r20 + c.r22 * t2;
  s.de = 2.0 * c.e2 * tau;
  s.dg = 2.0 * c.g2 * tau;
  s.dh = 2.0 * c.h2c * tau;
  s.dr1 = 2.0 * c.r12 * tau;
  s.dr2 = 2.0 * c.r22 * tau;
  return s;
}

Residual5 ode_term_scale(const SimilarityState& s, const SecondDerivs& d2,
                         const ModelConstants& k) {
  const double t = s.tau, E = s.e_val, G = s.g_val;
  const double E2G = E * E / G, a = k.alpha;
  const double gl = s.dg / G, el = s.de / E;
  const double cr = k.c_rho, c1r = k.c_1rho, hm1 = s.h_val - 1.0;
  auto mx = [](std::initializer_list<double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  Residual5 r{};
  r[0] = mx({E2G * d2.d2e, E2G * s.de * gl, 2 * E2G * s.de * el, E2G * s.de / t,
             2 * (a - 1) * E / k.c_e, G / k.c_e, a * t * s.de / k.c_e});
  r[1] = mx({E2G * d2.d2g, E2G * s.dg * gl, 2 * E2G * s.dg * el, E2G * s.dg / t,
             (2 * a - 3) * G / k.c_eps(), k.c_eps2 * G * G / (E * k.c_eps()),
             a * t * s.dg / k.c_eps()});
  r[2] = mx({E2G * d2.d2h, E2G * s.dh * gl, 2 * E2G * s.dh * el,
             3 * E2G * s.dh / t, (a / cr) * t * s.dh, E2G * gl * hm1 / t,
             2 * E2G * el * hm1 / t});
  r[3] = mx({E2G * d2.d2r1, E2G * s.dr1 * gl, 2 * E2G * s.dr1 * el,
             5 * E2G * s.dr1 / t, (a / c1r) * t * s.dr1,
             2 * E2G * s.r1_val * gl / t, 4 * E2G * s.r1_val * el / t,
             (k.c_t / c1r) * s.r1_val * G / E,
             4 * (cr / c1r) * E2G * s.dh * hm1 / t,
             2 * (cr / c1r) * E2G * s.dh * s.dh});
  r[4] = mx({E2G * d2.d2r2, E2G * s.dr2 * gl, 2 * E2G * s.dr2 * el,
             E2G * s.dr2 / t, (a / c1r) * t * s.dr2,
             k.c_t * G * s.r2_val / (E * c1r), 2 * a * s.r2_val / c1r,
             2 * E2G * s.r1_val, 2 * (cr / c1r) * hm1 * hm1 * E2G});
  return r;
}

ResidualOrderReport series_residual_order(const EdgeExpansion& ex,
                                          const ModelConstants& k,
                                          const std::vector<double>& taus) {
  if (taus.size() < 2) throw WindowTooShort("need at least two radii to fit");
  ResidualOrderReport rep;
  std::vector<double> logs;
  std::array<std::vector<double>, 5> logr;
  for (double tau : taus) {
    const SimilarityState st = edge_series_eval(tau, ex, k);
    const SecondDerivs d2 = edge_series_d2(tau, ex);
    const Residual5 res = ode_residual(st, d2, k);
    const Residual5 sc = ode_term_scale(st, d2, k);
    Residual5 rel{};
    for (int i = 0; i < 5; ++i) {
      rel[i] = std::abs(res[i]) / std::max(sc[i], 1e-300);
      logr[i].push_back(std::log(std::max(rel[i], 1e-300)));
    }
    const double s = ex.a - tau;
    rep.s_values.push_back(s);
    rep.relative_residual.push_back(rel);
    logs.push_back(std::log(s));
  }
  for (int i = 0; i < 5; ++i) rep.fitted_order[i] = fit_slope(logs, logr[i]);
  return rep;
}

Vec edge_probe_endpoint(const EdgeExpansion& ex, const ModelConstants& k,
                        const ProbeOptions& opts, const Vec& perturbation) {
  const int dim = opts.eg_only ? kEgDim : kFullDim;
  const double s0 = opts.s0_rel * ex.a;
  const double t0 = ex.a - s0;
  const double t1 = ex.a - opts.shrink * s0;
  Vec y0 = pack_state(edge_series_eval(t0, ex, k), dim);
  for (int i = 0; i < dim && i < perturbation.size(); ++i) {
    y0[i] += perturbation[i];
  }
  DormandPrince dp(opts.integrator);
  const auto res = dp.integrate(similarity_rhs(k, dim), t0, t1, y0);
  return res.trajectory.y_end();
}

ProbeReport edge_manifold_probe(const EdgeExpansion& ex, const ModelConstants& k,
                                const ProbeOptions& opts) {
  const int dim = opts.eg_only ? kEgDim : kFullDim;
  const double s0 = opts.s0_rel * ex.a;
  const Vec y0 = pack_state(edge_series_eval(ex.a - s0, ex, k), dim);

  Vec base;
  try {
    base = edge_probe_endpoint(ex, k, opts, Vec::Zero(dim));
  } catch (const WakeError& e) {
    throw IntegrationFailure(std::string("base probe trajectory failed: ") + e.what());
  }

  // Propagator of relative perturbations, column by column.
  Eigen::MatrixXd m(dim, dim);
  ProbeReport rep;
  rep.dimension = dim;
  for (int j = 0; j < dim; ++j) {
    Vec pert = Vec::Zero(dim);
    const double scale = std::max(std::abs(y0[j]), 1e-300);
    pert[j] = opts.delta * scale;
    Vec col(dim);
    try {
      const Vec end = edge_probe_endpoint(ex, k, opts, pert);
      for (int i = 0; i < dim; ++i) {
        col[i] = (end[i] - base[i]) / (opts.delta * std::max(std::abs(base[i]), 1e-300));
      }
    } catch (const WakeError&) {
      col.setConstant(std::numeric_limits<double>::infinity());
    }
    m.col(j) = col;
    rep.coordinate_amplification.push_back(col.allFinite() ? col.norm()
                                                           : std::numeric_limits<double>::infinity());
  }
  if (!m.allFinite()) {
    // A perturbation drove the run out of the admissible set; count only
    // the finite columns' non-amplifying span.
    for (int j = 0; j < dim; ++j) {
      if (!m.col(j).allFinite()) m.col(j).setConstant(1e300);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Vec sv = svd.singularValues();
  for (int i = dim - 1; i >= 0; --i) rep.amplification.push_back(sv[i]);
  rep.regular_count = static_cast<int>(
      std::count_if(rep.amplification.begin(), rep.amplification.end(),
                    [&](double v) { return v <= opts.threshold; }));
  return rep;
}

}  // namespace wakefar
