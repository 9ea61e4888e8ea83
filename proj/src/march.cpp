#include "wakefar/march.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "wakefar/bvp.hpp"
#include "wakefar/errors.hpp"

namespace wakefar {

void MarchMesh::validate() const {
  if (ny < 5 || nz < 5) throw ConfigError("mesh needs at least 5 nodes per direction");
  if (!(ly > 0.0 && lz > 0.0)) throw ConfigError("mesh half-widths must be positive");
}

void MarchState::resize() {
  const std::size_t n = mesh.size();
  e.assign(n, 0.0);
  eps.assign(n, 0.0);
  rho1.assign(n, 0.0);
  rho2.assign(n, 0.0);
}

double MarchState::axis(const std::vector<double>& f) const {
  const double fy = (0.0 + mesh.ly) / mesh.dy();
  const double fz = (0.0 + mesh.lz) / mesh.dz();
  const int i = std::min(static_cast<int>(std::floor(fy)), mesh.ny - 2);
  const int j = std::min(static_cast<int>(std::floor(fz)), mesh.nz - 2);
  const double ty = fy - i, tz = fz - j;
  if (ty < 1e-9 && tz < 1e-9) return f[at(i, j)];
  return (1 - ty) * (1 - tz) * f[at(i, j)] + ty * (1 - tz) * f[at(i + 1, j)] +
         (1 - ty) * tz * f[at(i, j + 1)] + ty * tz * f[at(i + 1, j + 1)];
}

void MarchConfig::validate() const {
  if (!(x0 > 0.0 && x1 > x0)) throw ConfigError("need x1 > x0 > 0");
  if (!(sigma > 0.0 && sigma <= 1.0)) throw ConfigError("sigma must lie in (0, 1]");
  if (!(e_floor > 0.0 && e_floor < 1.0 && eps_floor > 0.0 && eps_floor < 1.0))
    throw ConfigError("floors must lie in (0, 1)");
  if (records_per_decade < 1) throw ConfigError("records_per_decade must be positive");
  if (snapshots < 2) throw ConfigError("need at least two snapshots");
  if (!(slope_window > 1.0)) throw ConfigError("slope_window must exceed 1");
}

namespace {

double max_diffusion_constant(const ModelConstants& k) {
  return std::max({k.c_e, k.c_eps(), k.c_rho, k.c_1rho});
}

double face_value(FaceAverage avg, double a, double b) {
  const double s = a + b;
  if (avg == FaceAverage::arithmetic) return 0.5 * s;
  return s > 0.0 ? 2.0 * a * b / s : 0.0;
}

// Runs body(j0, j1) over row blocks; serial when one worker.
template <class F>
void for_rows(int rows, int threads, F&& body) {
  const int w = std::min(rows, threads > 0 ? threads : worker_count());
  if (w <= 1) {
    body(0, rows);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int t = 0; t < w; ++t) {
    const int j0 = rows * t / w, j1 = rows * (t + 1) / w;
    pool.emplace_back([&body, j0, j1] { body(j0, j1); });
  }
  for (auto& th : pool) th.join();
}

void check_mesh(const MarchMesh& mesh, double a, double x1, double alpha) {
  mesh.validate();
  const double need = required_half_width(a, x1, alpha);
  if (mesh.ly < need || mesh.lz < need) {
    std::ostringstream os;
    os << "mesh half-widths (" << mesh.ly << ", " << mesh.lz << ") below " << need
       << " needed to hold the wake at x1";
    throw MeshTooSmall(os.str());
  }
}

}  // namespace

double required_half_width(double a, double x1, double alpha) {
  return 1.5 * a * std::pow(x1, alpha);
}

void apply_floors(MarchState& s, const MarchConfig& cfg) {
  const int ny = s.mesh.ny, nz = s.mesh.nz;
  for (int j = 0; j < nz; ++j) {
    for (int i = 0; i < ny; ++i) {
      if (i == 0 || j == 0 || i == ny - 1 || j == nz - 1) {
        const std::size_t n = s.at(i, j);
        s.e[n] = 0.0;
        s.eps[n] = 0.0;
        s.rho1[n] = 0.0;
        s.rho2[n] = 0.0;
      }
    }
  }
  double emax = 0.0, gmax = 0.0;
  for (std::size_t n = 0; n < s.e.size(); ++n) {
    if (!std::isfinite(s.e[n]) || !std::isfinite(s.eps[n]) || !std::isfinite(s.rho1[n]) ||
        !std::isfinite(s.rho2[n])) {
      std::ostringstream os;
      os << "non-finite field at x = " << s.x;
      throw NonPositiveField(os.str());
    }
    emax = std::max(emax, s.e[n]);
    gmax = std::max(gmax, s.eps[n]);
  }
  if (!(emax > 0.0 && gmax > 0.0)) {
    std::ostringstream os;
    os << "turbulence extinct at x = " << s.x;
    throw NonPositiveField(os.str());
  }
  const double ef = cfg.e_floor * emax, gf = cfg.eps_floor * gmax;
  for (std::size_t n = 0; n < s.e.size(); ++n) {
    s.e[n] = std::max(s.e[n], ef);
    s.eps[n] = std::max(s.eps[n], gf);
  }
}

double ExplicitStepper::stable_step(const MarchState& s, const ModelConstants& k,
                                    const MarchConfig& cfg) const {
  double kmax = 0.0;
  for (std::size_t n = 0; n < s.e.size(); ++n) kmax = std::max(kmax, s.e[n] * s.e[n] / s.eps[n]);
  const double h = std::min(s.mesh.dy(), s.mesh.dz());
  return cfg.sigma * k.u0 * h * h / (4.0 * max_diffusion_constant(k) * kmax);
}

MarchState ExplicitStepper::advance(const MarchState& s, double dx, const ModelConstants& k,
                                    const MarchConfig& cfg) const {
  const int ny = s.mesh.ny, nz = s.mesh.nz;
  const double dy = s.mesh.dy(), dz = s.mesh.dz();
  const double iy2 = 1.0 / (dy * dy), iz2 = 1.0 / (dz * dz);
  const double h = dx / k.u0;
  const double ce = k.c_e, cg = k.c_eps(), cg2 = k.c_eps2;
  const double cr = k.c_rho, c1 = k.c_1rho, ct = k.c_t;
  const FaceAverage avg = cfg.face;

  std::vector<double> K(s.e.size());
  for (std::size_t n = 0; n < K.size(); ++n) K[n] = s.e[n] * s.e[n] / s.eps[n];

  MarchState out = s;
  out.x = s.x + dx;

  for_rows(nz - 2, threads_, [&](int b0, int b1) {
    for (int j = b0 + 1; j < b1 + 1; ++j) {
      for (int i = 1; i < ny - 1; ++i) {
        const std::size_t c = s.at(i, j);
        const std::size_t w = c - 1, ea = c + 1;
        const std::size_t so = c - ny, no = c + ny;
        const double kw = face_value(avg, K[c], K[w]), ke = face_value(avg, K[c], K[ea]);
        const double ks = face_value(avg, K[c], K[so]), kn = face_value(avg, K[c], K[no]);
        auto div = [&](const std::vector<double>& f) {
          return (ke * (f[ea] - f[c]) - kw * (f[c] - f[w])) * iy2 +
                 (kn * (f[no] - f[c]) - ks * (f[c] - f[so])) * iz2;
        };
        const double e = s.e[c], g = s.eps[c];
        out.e[c] = e + h * (ce * div(s.e) - g);
        out.eps[c] = g + h * (cg * div(s.eps) - cg2 * g * g / e);
        // The drift is the same face difference the diffusion uses, so a
        // profile linear in z is transported without error.
        out.rho1[c] = s.rho1[c] + h * cr * (div(s.rho1) - (kn - ks) / dz);
        const double gy = (s.rho1[ea] - s.rho1[w]) / (2.0 * dy);
        const double gz = (s.rho1[no] - s.rho1[so]) / (2.0 * dz);
        out.rho2[c] = s.rho2[c] + h * (c1 * div(s.rho2) +
                                       2.0 * cr * K[c] * (gy * gy + (gz - 1.0) * (gz - 1.0)) -
                                       ct * s.rho2[c] * g / e);
      }
    }
  });
  apply_floors(out, cfg);
  return out;
}

MarchState march_step(const MarchState& s, const ModelConstants& k, const MarchConfig& cfg,
                      double dx_cap) {
  const ExplicitStepper st;
  double dx = st.stable_step(s, k, cfg);
  if (dx_cap > 0.0) dx = std::min(dx, dx_cap);
  if (!(dx >= 1e-14 * s.x)) {
    std::ostringstream os;
    os << "step " << dx << " below 1e-14 x at x = " << s.x;
    throw StepUnderflow(os.str());
  }
  return st.advance(s, dx, k, cfg);
}

MarchState init_from_similarity(const ProfileSource& profiles, double x0, const MarchMesh& mesh,
                                const ModelConstants& k, const MarchConfig& cfg) {
  check_mesh(mesh, profiles.support(), cfg.x1, k.alpha);
  MarchState s;
  s.x = x0;
  s.mesh = mesh;
  s.resize();
  for (int j = 0; j < mesh.nz; ++j) {
    for (int i = 0; i < mesh.ny; ++i) {
      const PhysicalPoint p = similarity_lift(profiles, x0, mesh.y(i), mesh.z(j), k);
      if (!p.in_support) continue;
      const std::size_t n = s.at(i, j);
      s.e[n] = p.e.value;
      s.eps[n] = p.eps.value;
      s.rho1[n] = p.rho1.value;
      s.rho2[n] = p.rho2.value;
    }
  }
  apply_floors(s, cfg);
  return s;
}

MarchState init_gaussian(const ProfileSource& profiles, double x0, const MarchMesh& mesh,
                         const ModelConstants& k, const MarchConfig& cfg) {
  const double a = profiles.support();
  check_mesh(mesh, a, cfg.x1, k.alpha);
  const double al = k.alpha;
  const ProfileJets c = profiles.jets(0.0);
  const double w = 0.5 * a * std::pow(x0, al);
  const double e0 = c[0].v * std::pow(x0, 2 * al - 2), g0 = c[1].v * std::pow(x0, 2 * al - 3);
  const double r0 = c[4].v * std::pow(x0, 2 * al);
  MarchState s;
  s.x = x0;
  s.mesh = mesh;
  s.resize();
  for (int j = 0; j < mesh.nz; ++j) {
    for (int i = 0; i < mesh.ny; ++i) {
      const double y = mesh.y(i), z = mesh.z(j);
      const double b = std::exp(-(y * y + z * z) / (w * w));
      const std::size_t n = s.at(i, j);
      s.e[n] = e0 * b;
      s.eps[n] = g0 * b * std::sqrt(b);
      s.rho1[n] = z * c[2].v * b;
      s.rho2[n] = r0 * b;
    }
  }
  apply_floors(s, cfg);
  return s;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw WindowTooShort("slope fit needs two points");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw NonPositiveField("log-log fit of a non-positive value");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  sx /= n;
  sy /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::log(x[i]) - sx;
    sxx += u * u;
    sxy += u * (std::log(y[i]) - sy);
  }
  if (!(sxx > 0.0)) throw WindowTooShort("slope fit needs distinct stations");
  return sxy / sxx;
}

DecayFit fit_decay_exponents(const std::vector<AxisRecord>& axis, double x_lo, double x_hi) {
  std::vector<double> xs, es, gs;
  for (const auto& r : axis) {
    if (r.x >= x_lo * (1 - 1e-12) && r.x <= x_hi * (1 + 1e-12)) {
      xs.push_back(r.x);
      es.push_back(r.e0);
      gs.push_back(r.eps0);
    }
  }
  if (xs.size() < 2 || xs.back() < 10.0 * xs.front() * (1 - 1e-9)) {
    std::ostringstream os;
    os << "window [" << x_lo << ", " << x_hi << "] holds less than one decade of records";
    throw WindowTooShort(os.str());
  }
  DecayFit f;
  f.slope_e = loglog_slope(xs, es);
  f.slope_eps = loglog_slope(xs, gs);
  f.x_lo = xs.front();
  f.x_hi = xs.back();
  f.points = static_cast<int>(xs.size());
  return f;
}

std::pair<std::vector<double>, std::vector<double>> normalized_profile(const MarchState& s,
                                                                       double alpha) {
  const MarchMesh& m = s.mesh;
  const double fz = m.lz / m.dz();
  const int j = std::min(static_cast<int>(std::floor(fz)), m.nz - 2);
  const double tz = fz - j;
  const double xa = std::pow(s.x, alpha);
  const double ax = s.axis(s.e);
  std::vector<double> r, v;
  const double fy = m.ly / m.dy();
  const int i0 = static_cast<int>(std::ceil(fy - 1e-9));
  if (i0 > static_cast<int>(std::floor(fy + 1e-9))) {
    r.push_back(0.0);
    v.push_back(1.0);
  }
  for (int i = i0; i < m.ny; ++i) {
    const double val = (1 - tz) * s.e[s.at(i, j)] + tz * s.e[s.at(i, j + 1)];
    r.push_back(std::max(0.0, m.y(i)) / xa);
    v.push_back(val / ax);
  }
  return {r, v};
}

namespace {

// Four-point Lagrange cubic through (r, v) on a strictly increasing
// abscissa; the stencil is centred on the bracketing interval where possible.
double cubic_at(const std::vector<double>& r, const std::vector<double>& v, double t) {
  const std::size_t n = r.size();
  if (n < 2 || t < r.front() - 1e-12 || t > r.back() + 1e-12)
    throw OutsideWindow("cubic interpolation outside the tabulated range");
  std::size_t k = std::upper_bound(r.begin(), r.end(), t) - r.begin();
  k = std::clamp<std::size_t>(k, 1, n - 1) - 1;
  if (n < 4) {
    const double u = (t - r[k]) / (r[k + 1] - r[k]);
    return (1 - u) * v[k] + u * v[k + 1];
  }
  const std::size_t lo = std::min(k > 0 ? k - 1 : 0, n - 4);
  double sum = 0.0;
  for (std::size_t a = lo; a < lo + 4; ++a) {
    double w = 1.0;
    for (std::size_t b = lo; b < lo + 4; ++b)
      if (b != a) w *= (t - r[b]) / (r[a] - r[b]);
    sum += w * v[a];
  }
  return sum;
}

}  // namespace

std::vector<double> profile_collapse_error(const std::vector<MarchState>& states,
                                           const ModelConstants& k) {
  if (states.size() < 2) throw WindowTooShort("collapse error needs two stations");
  std::vector<double> out;
  auto prev = normalized_profile(states[0], k.alpha);
  for (std::size_t s = 1; s < states.size(); ++s) {
    auto cur = normalized_profile(states[s], k.alpha);
    const double hi = std::min(prev.first.back(), cur.first.back());
    const int samples = 2 * static_cast<int>(std::max(prev.first.size(), cur.first.size()));
    double d = 0.0;
    for (int q = 0; q <= samples; ++q) {
      const double t = hi * q / samples;
      d = std::max(d, std::abs(cubic_at(prev.first, prev.second, t) -
                               cubic_at(cur.first, cur.second, t)));
    }
    out.push_back(d);
    prev = std::move(cur);
  }
  return out;
}

MarchResult run_march(MarchState start, const ModelConstants& k, const MarchConfig& cfg,
                      const Stepper& stepper,
                      const std::function<void(const MarchState&)>& on_snapshot) {
  cfg.validate();
  MarchResult res;
  auto& diag = res.diagnostics;
  MarchState s = std::move(start);
  s.x = cfg.x0;

  const double decades = std::log10(cfg.x1 / cfg.x0);
  std::vector<double> snap_x(cfg.snapshots);
  for (int i = 0; i < cfg.snapshots; ++i)
    snap_x[i] = cfg.x0 * std::pow(cfg.x1 / cfg.x0, static_cast<double>(i) / (cfg.snapshots - 1));
  snap_x.back() = cfg.x1;
  const int n_rec = std::max(2, static_cast<int>(std::ceil(decades * cfg.records_per_decade)) + 1);

  auto record = [&] {
    AxisRecord r;
    r.x = s.x;
    r.e0 = s.axis(s.e);
    r.eps0 = s.axis(s.eps);
    r.rho2_0 = s.axis(s.rho2);
    diag.axis.push_back(r);
  };
  auto snapshot = [&] {
    diag.snapshot_x.push_back(s.x);
    if (on_snapshot) on_snapshot(s);
    res.snapshots.push_back(s);
  };

  record();
  snapshot();
  int next_rec = 1, next_snap = 1;
  while (next_snap < cfg.snapshots) {
    const double target = snap_x[next_snap];
    double dx = stepper.stable_step(s, k, cfg);
    if (!(dx >= 1e-14 * s.x)) {
      std::ostringstream os;
      os << "step " << dx << " below 1e-14 x at x = " << s.x;
      throw StepUnderflow(os.str());
    }
    bool land = false;
    if (s.x + dx >= target * (1 - 1e-13)) {
      dx = target - s.x;
      land = true;
    }
    s = stepper.advance(s, dx, k, cfg);
    ++res.steps;
    if (land) s.x = target;
    const double rec_x = cfg.x0 * std::pow(cfg.x1 / cfg.x0, static_cast<double>(next_rec) / (n_rec - 1));
    if (s.x >= rec_x * (1 - 1e-13) || land) {
      if (s.x >= rec_x * (1 - 1e-13)) {
        record();
        while (next_rec < n_rec &&
               s.x >= cfg.x0 * std::pow(cfg.x1 / cfg.x0, static_cast<double>(next_rec) / (n_rec - 1)) *
                          (1 - 1e-13))
          ++next_rec;
      }
    }
    if (land) {
      snapshot();
      ++next_snap;
    }
  }

  // Trailing-window slopes; the first record uses the forward secant.
  auto& ax = diag.axis;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    std::vector<double> xs, es, gs;
    for (std::size_t j = 0; j <= i; ++j) {
      if (ax[j].x >= ax[i].x / cfg.slope_window * (1 - 1e-12)) {
        xs.push_back(ax[j].x);
        es.push_back(ax[j].e0);
        gs.push_back(ax[j].eps0);
      }
    }
    if (xs.size() < 2 && ax.size() > 1) {
      const std::size_t j = i == 0 ? 1 : i - 1;
      xs = {ax[j].x, ax[i].x};
      es = {ax[j].e0, ax[i].e0};
      gs = {ax[j].eps0, ax[i].eps0};
    }
    if (xs.size() >= 2) {
      ax[i].slope_e = loglog_slope(xs, es);
      ax[i].slope_eps = loglog_slope(xs, gs);
    }
  }
  if (res.snapshots.size() >= 2) diag.collapse = profile_collapse_error(res.snapshots, k);
  return res;
}

}  // namespace wakefar
