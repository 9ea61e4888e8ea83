#include "wakefar/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "wakefar/edge.hpp"
#include "wakefar/errors.hpp"

namespace wakefar {

namespace {

constexpr double kPi = std::numbers::pi;

double eval(const CoefFn& f, double r) { return f ? f(r) : 0.0; }

std::vector<double> angles(int n) {
  std::vector<double> p(n);
  for (int j = 0; j < n; ++j) p[j] = -kPi + 2.0 * kPi * (j + 0.5) / n;
  return p;
}

// Derivatives 0..4 of a periodic sample by trigonometric interpolation.
std::array<std::vector<double>, 5> spectral_derivatives(const std::vector<double>& f) {
  const int n = static_cast<int>(f.size());
  using C = std::complex<double>;
  std::vector<C> coef(n);
  for (int m = 0; m < n; ++m) {
    C acc = 0.0;
    for (int j = 0; j < n; ++j) acc += f[j] * std::polar(1.0, -2.0 * kPi * m * j / n);
    coef[m] = acc / static_cast<double>(n);
  }
  std::array<std::vector<double>, 5> out;
  for (int d = 0; d <= 4; ++d) {
    out[d].assign(n, 0.0);
    for (int m = 0; m < n; ++m) {
      const int w = m <= n / 2 ? m : m - n;
      if (n % 2 == 0 && m == n / 2 && d % 2 == 1) continue;  // Nyquist mode
      const C factor = std::pow(C(0.0, static_cast<double>(w)), d) * coef[m];
      for (int j = 0; j < n; ++j) {
        out[d][j] += (factor * std::polar(1.0, 2.0 * kPi * m * j / n)).real();
      }
    }
  }
  return out;
}

}  // namespace

double sin_equation_residual(const AnsatzCoefficients& co, double r, double phi,
                             const PolarJet& h) {
  return h.pp + r * r * h.rr + eval(co.A, r) * h.r + eval(co.B, r) * h.v +
         eval(co.C, r) * std::sin(phi);
}

double sin2_equation_residual(const AnsatzCoefficients& co, double r, double phi,
                              const PolarJet& rj) {
  const double sp = std::sin(phi);
  return rj.pp + r * r * rj.rr + eval(co.K, r) * rj.r + eval(co.L, r) * rj.v +
         eval(co.M, r) * sp * sp + eval(co.N, r) * sp + eval(co.P, r);
}

SplitReport split_sin_ansatz(const AnsatzCoefficients& co, const RadialFn& h1,
                             const RadialFn& h2, const std::vector<double>& r_grid, int n_phi) {
  SplitReport rep;
  for (double r : r_grid) {
    const auto a = h1(r), b = h2(r);
    const double A = eval(co.A, r), B = eval(co.B, r), C = eval(co.C, r);
    const double s1 = r * r * a[2] + A * a[1] + (B - 1.0) * a[0] + C;
    const double s0 = r * r * b[2] + A * b[1] + B * b[0];
    rep.r.push_back(r);
    rep.s1.push_back(s1);
    rep.s0.push_back(s0);
    for (double p : angles(n_phi)) {
      const double sp = std::sin(p), cp = std::cos(p);
      PolarJet j;
      j.v = a[0] * sp + b[0];
      j.r = a[1] * sp + b[1];
      j.rr = a[2] * sp + b[2];
      j.p = a[0] * cp;
      j.pp = -a[0] * sp;
      const double full = sin_equation_residual(co, r, p, j);
      rep.max_full = std::max(rep.max_full, std::abs(full));
      rep.max_identity = std::max(rep.max_identity, std::abs(full - (sp * s1 + s0)));
    }
  }
  return rep;
}

SplitReport split_sin2_ansatz(const AnsatzCoefficients& co, const RadialFn& r1,
                              const RadialFn& r2, const std::vector<double>& r_grid, int n_phi) {
  for (double r : r_grid) {
    const double n = eval(co.N, r);
    if (n != 0.0) {
      std::ostringstream os;
      os << "N(" << r << ") = " << n << ": the sin^2 split requires N = 0";
      throw NonzeroN(os.str());
    }
  }
  SplitReport rep;
  for (double r : r_grid) {
    const auto a = r1(r), b = r2(r);
    const double K = eval(co.K, r), L = eval(co.L, r), M = eval(co.M, r), P = eval(co.P, r);
    const double t1 = r * r * a[2] + K * a[1] + (L - 4.0) * a[0] + M;
    const double t0 = r * r * b[2] + K * b[1] + L * b[0] + 2.0 * a[0] + P;
    rep.r.push_back(r);
    rep.s1.push_back(t1);
    rep.s0.push_back(t0);
    for (double p : angles(n_phi)) {
      const double sp = std::sin(p), s2 = sp * sp;
      PolarJet j;
      j.v = a[0] * s2 + b[0];
      j.r = a[1] * s2 + b[1];
      j.rr = a[2] * s2 + b[2];
      j.p = a[0] * std::sin(2.0 * p);
      j.pp = 2.0 * a[0] * std::cos(2.0 * p);
      const double full = sin2_equation_residual(co, r, p, j);
      rep.max_full = std::max(rep.max_full, std::abs(full));
      rep.max_identity = std::max(rep.max_identity, std::abs(full - (s2 * t1 + t0)));
    }
  }
  return rep;
}

double riccati_check(const std::function<std::array<double, 2>(double)>& h2, double h4,
                     double phi) {
  const auto v = h2(phi);
  return v[1] - v[0] * v[0] - 2.0 * std::cos(phi) / std::sin(phi) * v[0] + 2.0 * (1.0 - h4);
}

void require_off_pole(double phi, BdeKind kind, double margin) {
  // Poles: cos(p) = 0 for tan, sin(2p) = 0 for cot(2p).
  const double period = kind == BdeKind::sin_constraint ? kPi : kPi / 2.0;
  const double offset = kind == BdeKind::sin_constraint ? kPi / 2.0 : 0.0;
  double d = std::fmod(phi - offset, period);
  if (d < 0) d += period;
  d = std::min(d, period - d);
  if (d < margin) {
    std::ostringstream os;
    os << "angle " << phi << " lies within " << margin << " of a pole of the constraint";
    throw PoleProximity(os.str());
  }
}

BdeReport bde_residual_check(const PolarField& field, const AnsatzCoefficients& co,
                             BdeKind kind, double margin, double b2_shift) {
  const int nr = static_cast<int>(field.r.size());
  const int np = field.n_phi;
  if (nr < 5 || np < 4 || static_cast<int>(field.values.size()) != nr) {
    throw std::invalid_argument("bde check needs at least 5 radii and 4 angles");
  }
  const double dr = field.r[1] - field.r[0];
  std::vector<double> phi(np);
  for (int j = 0; j < np; ++j) phi[j] = 2.0 * kPi * j / np;

  // Constraint h and its second total angular derivative at every node.
  std::vector<std::vector<double>> h(nr, std::vector<double>(np)), hpp = h;
  for (int i = 0; i < nr; ++i) {
    const auto d = spectral_derivatives(field.values[i]);
    for (int j = 0; j < np; ++j) {
      const double p = phi[j];
      if (kind == BdeKind::sin_constraint) {
        const double t = std::tan(p), s2 = 1.0 / (std::cos(p) * std::cos(p));
        h[i][j] = d[2][j] + d[1][j] * t;
        hpp[i][j] = d[4][j] + d[3][j] * t + 2.0 * d[2][j] * s2 + 2.0 * d[1][j] * s2 * t;
      } else {
        const double ct = std::cos(2.0 * p) / std::sin(2.0 * p);
        const double cs2 = 1.0 / (std::sin(2.0 * p) * std::sin(2.0 * p));
        h[i][j] = d[2][j] - 2.0 * d[1][j] * ct;
        hpp[i][j] = d[4][j] - 2.0 * d[3][j] * ct + 8.0 * d[2][j] * cs2 - 16.0 * d[1][j] * cs2 * ct;
      }
    }
  }

  BdeReport rep;
  for (int i = 2; i + 2 < nr; ++i) {
    const double r = field.r[i];
    for (int j = 0; j < np; ++j) {
      const double p = phi[j];
      try {
        require_off_pole(p, kind, margin);
      } catch (const PoleProximity&) {
        continue;
      }
      const double h_r = (-h[i + 2][j] + 8.0 * h[i + 1][j] - 8.0 * h[i - 1][j] + h[i - 2][j]) / (12.0 * dr);
      const double h_rr = (-h[i + 2][j] + 16.0 * h[i + 1][j] - 30.0 * h[i][j] + 16.0 * h[i - 1][j] -
                           h[i - 2][j]) / (12.0 * dr * dr);
      double b1, b2;
      if (kind == BdeKind::sin_constraint) {
        b1 = eval(co.A, r);
        b2 = eval(co.B, r) - 2.0 / (std::cos(p) * std::cos(p));
      } else {
        b1 = eval(co.K, r);
        const double s = std::sin(2.0 * p);
        b2 = eval(co.L, r) - 8.0 / (s * s);
      }
      b2 += b2_shift;
      const double res = hpp[i][j] + r * r * h_rr + b1 * h_r + b2 * h[i][j];
      rep.max_residual = std::max(rep.max_residual, std::abs(res));
      rep.max_h = std::max(rep.max_h, std::abs(h[i][j]));
      ++rep.points;
    }
  }
  return rep;
}

CollapseReport reduction_collapse_check(const ProfileSource& profiles, const ModelConstants& k,
                                        const std::vector<double>& xs,
                                        const std::vector<double>& taus, double theta,
                                        AngularForm form) {
  CollapseReport rep;
  const double al = k.alpha;
  for (double tau : taus) {
    if (!(tau > 0.0) || tau > profiles.support()) {
      throw OutOfSupport("collapse radii must lie in (0, a]");
    }
    const ProfileJets j = profiles.jets(tau);
    SimilarityState s;
    s.tau = tau;
    s.e_val = j[0].v;
    s.g_val = j[1].v;
    s.h_val = j[2].v;
    s.r1_val = j[3].v;
    s.r2_val = j[4].v;
    s.de = j[0].d1;
    s.dg = j[1].d1;
    s.dh = j[2].d1;
    s.dr1 = j[3].d1;
    s.dr2 = j[4].d1;
    const SecondDerivs d2{j[0].d2, j[1].d2, j[2].d2, j[3].d2, j[4].d2};
    const Residual5 ode = ode_residual(s, d2, k);
    const Residual5 scale = ode_term_scale(s, d2, k);

    std::array<double, 4> lo, hi;
    lo.fill(INFINITY);
    hi.fill(-INFINITY);
    for (double x : xs) {
      const double xa = std::pow(x, al);
      const double y = tau * xa * std::cos(theta), z = tau * xa * std::sin(theta);
      PhysicalPoint p = similarity_lift(profiles, x, y, z, k, true);
      if (form == AngularForm::cos) {
        const FieldJet h = profile_jet(j[2], x, y, z, al);
        p.rho1.value = y * h.value;
        p.rho1.dx = y * h.dx;
        p.rho1.dy = h.value + y * h.dy;
        p.rho1.dz = y * h.dz;
        p.rho1.dyy = 2.0 * h.dy + y * h.dyy;
        p.rho1.dzz = y * h.dzz;
      }
      const Residual4 full = full_pde_residual(p, k);
      const double eta = z / xa;
      const std::array<double, 4> den{
          -k.c_e * std::pow(x, 2.0 * al - 3.0) * ode[0],
          -k.c_eps() * std::pow(x, 2.0 * al - 4.0) * ode[1],
          -k.c_rho / x * z * ode[2],
          -k.c_1rho * std::pow(x, 2.0 * al - 1.0) * (eta * eta * ode[3] + ode[4])};
      const std::array<double, 4> rel{
          std::abs(ode[0]) / scale[0], std::abs(ode[1]) / scale[1], std::abs(ode[2]) / scale[2],
          std::abs(eta * eta * ode[3] + ode[4]) / std::max(eta * eta * scale[3] + scale[4], 1e-300)};
      CollapseSample cs;
      cs.x = x;
      cs.tau = tau;
      bool ok = true;
      for (int e = 0; e < 4; ++e) {
        if (!(rel[e] > 1e-9) || den[e] == 0.0) {
          ok = false;
          cs.ratio[e] = NAN;
          continue;
        }
        cs.ratio[e] = full[e] / den[e];
        lo[e] = std::min(lo[e], cs.ratio[e]);
        hi[e] = std::max(hi[e], cs.ratio[e]);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(cs.ratio[e] - 1.0));
      }
      if (!ok) {
        ++rep.skipped;
      }
      rep.samples.push_back(cs);
    }
    for (int e = 0; e < 4; ++e) {
      if (hi[e] >= lo[e]) rep.max_x_spread = std::max(rep.max_x_spread, hi[e] - lo[e]);
    }
  }
  return rep;
}

ReducedFields reduced_fields(const ProfileSource& profiles, double r, double phi) {
  const ProfileJets j = profiles.jets(r);
  const double sp = std::sin(phi), cp = std::cos(phi);
  ReducedFields f;
  f.e = j[0].v;
  f.de = j[0].d1;
  f.g = j[1].v;
  f.dg = j[1].d1;
  // H(r, p) = r sin(p) h(r)
  const ProfileJet& h = j[2];
  f.h = r * sp * h.v;
  f.h_r = sp * (h.v + r * h.d1);
  f.h_rr = sp * (2.0 * h.d1 + r * h.d2);
  f.h_phi = r * cp * h.v;
  f.h_phiphi = -r * sp * h.v;
  // R(r, p) = r^2 sin^2(p) R1(r) + R2(r)
  const ProfileJet& a = j[3];
  const ProfileJet& b = j[4];
  const double s2 = sp * sp;
  f.rv = r * r * s2 * a.v + b.v;
  f.r_r = s2 * (2.0 * r * a.v + r * r * a.d1) + b.d1;
  f.r_rr = s2 * (2.0 * a.v + 4.0 * r * a.d1 + r * r * a.d2) + b.d2;
  f.r_phiphi = r * r * 2.0 * std::cos(2.0 * phi) * a.v;
  return f;
}

AnsatzCoefficients reduced_coefficients(const ProfileSource& profiles, const ModelConstants& k) {
  auto parts = [&profiles, k](double r) {
    const ProfileJets j = profiles.jets(r);
    const double E = j[0].v, G = j[1].v, dE = j[0].d1, dG = j[1].d1;
    const double EG = E / G;
    const double D = k.c_rho * E * EG;  // coefficient of H_rr
    return std::array<double, 5>{E, G, dE, dG, D};
  };
  AnsatzCoefficients co;
  co.A = [parts, k](double r) {
    const auto [E, G, dE, dG, D] = parts(r);
    const double EG = E / G;
    return r * r * (k.c_rho * EG * (2.0 * dE - EG * dG + E / r) + k.alpha * r) / D;
  };
  co.B = [parts, k](double r) {
    const auto v = parts(r);
    return -k.alpha * r * r / v[4];
  };
  co.C = [parts, k](double r) {
    const auto [E, G, dE, dG, D] = parts(r);
    const double EG = E / G;
    return r * r * k.c_rho * EG * (EG * dG - 2.0 * dE) / D;
  };
  return co;
}

}  // namespace wakefar
