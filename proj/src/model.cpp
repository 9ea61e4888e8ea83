#include "wakefar/model.hpp"

#include <cmath>
#include <string>

#include "wakefar/errors.hpp"

namespace wakefar {

namespace {

constexpr double kTiny = 1e-300;

void require_positive(double v, const char* name) {
  if (!(v > kTiny)) {
    throw NonPositiveField(std::string(name) + " must be positive, got " +
                           std::to_string(v));
  }
}

void require_off_axis(double tau) {
  if (!(tau > kTiny)) {
    throw AxisSingularity("similarity equations are singular at tau = 0; "
                          "use the center series");
  }
}

// Shared bracket G'/G - 2E'/E.
double log_slope(const SimilarityState& s) {
  return s.dg / s.g_val - 2.0 * s.de / s.e_val;
}

}  // namespace

void ModelConstants::validate() const {
  const std::pair<const char*, double> positives[] = {
      {"c_e", c_e},       {"delta", delta}, {"c_eps2", c_eps2},
      {"c_rho", c_rho},   {"c_1rho", c_1rho}, {"c_t", c_t},
      {"u0", u0},         {"alpha", alpha}};
  for (const auto& [name, v] : positives) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw BadConstants(std::string(name) + " must be a finite positive number");
    }
  }
  if (!(delta < 2.0)) {
    throw BadConstants("delta must be < 2 (edge exponent 1/(2 - delta))");
  }
  if (std::abs(7.0 * c_rho - 10.0 * c_e) < 1e-14) {
    throw BadConstants("7 c_rho - 10 c_e vanishes (edge H-series denominator)");
  }
  if (std::abs(5.0 * c_e - 7.0 * c_1rho) < 1e-14) {
    throw BadConstants("5 c_e - 7 c_1rho vanishes (edge R-series denominator)");
  }
}

ModelConstants constant_solution_constants() {
  ModelConstants k;
  k.alpha = 21.0 / 46.0;
  return k;
}

SecondDerivs ode_rhs(const SimilarityState& s, const ModelConstants& k,
                     SinkForm form) {
  require_off_axis(s.tau);
  require_positive(s.e_val, "E");
  require_positive(s.g_val, "G");

  const double t = s.tau;
  const double E = s.e_val, G = s.g_val;
  const double diff = E * E / G;  // E^2/G, the common diffusivity
  const double ls = log_slope(s);
  const double a = k.alpha;
  const double ce = k.c_e, cs = k.c_eps(), cr = k.c_rho, c1r = k.c_1rho;
  const double sink_pow = form == SinkForm::corrected ? G * G : G;

  SecondDerivs d;
  d.d2e = s.de * (ls - 1.0 / t) +
          (2.0 * (a - 1.0) * E + G - a * t * s.de) / (ce * diff);
  d.d2g = s.dg * (ls - 1.0 / t) +
          ((2.0 * a - 3.0) * G + k.c_eps2 * G * G / E - a * t * s.dg) /
              (cs * diff);
  d.d2h = s.dh * (ls - 3.0 / t - (a / cr) * t / diff) +
          ls * (s.h_val - 1.0) / t;
  d.d2r1 = s.dr1 * (ls - 5.0 / t - (a / c1r) * t / diff) +
           (s.r1_val / t) *
               (2.0 * ls + (k.c_t / c1r) * t * sink_pow / (E * E * E)) -
           2.0 * (cr / c1r) * s.dh * (2.0 * (s.h_val - 1.0) / t + s.dh);
  d.d2r2 = s.dr2 * (ls - 1.0 / t - (a / c1r) * t / diff) +
           (s.r2_val / (c1r * diff)) * (k.c_t * G / E + 2.0 * a) -
           2.0 * s.r1_val - 2.0 * (cr / c1r) * (s.h_val - 1.0) * (s.h_val - 1.0);
  return d;
}

Residual5 ode_residual(const SimilarityState& s, const SecondDerivs& d2,
                       const ModelConstants& k, SinkForm form) {
  require_off_axis(s.tau);
  require_positive(s.e_val, "E");
  require_positive(s.g_val, "G");

  const double t = s.tau;
  const double E = s.e_val, G = s.g_val;
  const double E2G = E * E / G;
  const double a = k.alpha;
  const double gl = s.dg / G, el = s.de / E;
  const double cr = k.c_rho, c1r = k.c_1rho;
  const double sink_pow = form == SinkForm::corrected ? G * G : G;
  const double hm1 = s.h_val - 1.0;

  Residual5 r{};
  r[0] = E2G * d2.d2e - E2G * s.de * (gl - 2.0 * el - 1.0 / t) -
         (2.0 * (a - 1.0) * E + G - a * t * s.de) / k.c_e;
  r[1] = E2G * d2.d2g - E2G * s.dg * (gl - 2.0 * el - 1.0 / t) -
         ((2.0 * a - 3.0) * G + k.c_eps2 * G * G / E - a * t * s.dg) /
             k.c_eps();
  r[2] = E2G * d2.d2h -
         E2G * s.dh * (gl - 2.0 * el - 3.0 / t - (a / cr) * t * G / (E * E)) -
         (E2G / t) * (gl - 2.0 * el) * hm1;
  r[3] = E2G * d2.d2r1 -
         E2G * s.dr1 *
             (gl - 2.0 * el - 5.0 / t - (a / c1r) * t * G / (E * E)) -
         (E2G * s.r1_val / t) *
             (2.0 * gl - 4.0 * el + (k.c_t / c1r) * t * sink_pow / (E * E * E)) +
         2.0 * (cr / c1r) * E2G * s.dh * (2.0 * hm1 / t + s.dh);
  r[4] = E2G * d2.d2r2 -
         E2G * s.dr2 *
             (gl - 2.0 * el - 1.0 / t - (a / c1r) * t * G / (E * E)) -
         (s.r2_val / c1r) * (k.c_t * G / E + 2.0 * a) + 2.0 * E2G * s.r1_val +
         2.0 * (cr / c1r) * hm1 * hm1 * E2G;
  return r;
}

Residual5 ode_residual_balanced(const SimilarityState& s,
                                const SecondDerivs& d2,
                                const ModelConstants& k, SinkForm form) {
  Residual5 r = ode_residual(s, d2, k, form);
  const double scale = s.g_val / (s.e_val * s.e_val);
  for (double& v : r) v *= scale;
  return r;
}

Residual4 reduced_pde_residual(double r, double phi, const ReducedFields& f,
                               double d2e, double d2g, const ModelConstants& k,
                               SinkForm form) {
  if (!(r > kTiny)) throw AxisSingularity("reduced equations singular at r = 0");
  require_positive(f.e, "E");
  require_positive(f.g, "G");

  const double E = f.e, G = f.g, dE = f.de, dG = f.dg;
  const double EG = E / G;
  const double a = k.alpha;
  const double sp = std::sin(phi), cp = std::cos(phi);
  const double cr = k.c_rho, c1r = k.c_1rho;

  Residual4 res{};
  res[0] = k.c_e * EG * (E * d2e + 2.0 * dE * dE - EG * dE * dG + (E / r) * dE) +
           a * r * dE + 2.0 * (1.0 - a) * E - G;
  res[1] = k.c_eps() * EG *
               (E * d2g - EG * dG * dG + 2.0 * dE * dG + (E / r) * dG) +
           a * r * dG + (3.0 - 2.0 * a) * G - k.c_eps2 * G * G / E;
  res[2] = cr * E * EG * (f.h_rr + f.h_phiphi / (r * r)) +
           (cr * EG * (2.0 * dE - EG * dG + E / r) + a * r) * f.h_r - a * f.h +
           cr * EG * (EG * dG - 2.0 * dE) * sp;
  const double sink = form == SinkForm::corrected ? G / E : E / G;
  res[3] = c1r * E * EG * (f.r_rr + f.r_phiphi / (r * r)) +
           (c1r * EG * (E / r + 2.0 * dE - EG * dG) + a * r) * f.r_r -
           (k.c_t * sink + 2.0 * a) * f.rv +
           2.0 * cr * E * EG * (f.h_r * f.h_r + f.h_phi * f.h_phi / (r * r)) +
           2.0 * cr * E * EG -
           4.0 * cr * E * EG * (f.h_r * sp + f.h_phi * cp / r);
  return res;
}

Residual4 full_pde_residual(const PhysicalPoint& p, const ModelConstants& k) {
  const FieldJet& e = p.e;
  const FieldJet& eps = p.eps;
  require_positive(eps.value, "epsilon");
  require_positive(e.value, "e");

  const double ev = e.value, sv = eps.value;
  const double K = ev * ev / sv;
  const double Ky = 2.0 * ev * e.dy / sv - ev * ev * eps.dy / (sv * sv);
  const double Kz = 2.0 * ev * e.dz / sv - ev * ev * eps.dz / (sv * sv);

  auto div_flux = [&](const FieldJet& f) {
    return Ky * f.dy + K * f.dyy + Kz * f.dz + K * f.dzz;
  };

  const FieldJet& r1 = p.rho1;
  const FieldJet& r2 = p.rho2;
  Residual4 res{};
  res[0] = k.u0 * e.dx - k.c_e * div_flux(e) + sv;
  res[1] = k.u0 * eps.dx - k.c_eps() * div_flux(eps) + k.c_eps2 * sv * sv / ev;
  res[2] = k.u0 * r1.dx - k.c_rho * div_flux(r1) + k.c_rho * Kz;
  res[3] = k.u0 * r2.dx - k.c_1rho * div_flux(r2) -
           2.0 * k.c_rho * K * r1.dy * r1.dy -
           2.0 * k.c_rho * K * (r1.dz - 1.0) * (r1.dz - 1.0) +
           k.c_t * r2.value * sv / ev;
  return res;
}

}  // namespace wakefar
