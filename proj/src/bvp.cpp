#include "wakefar/bvp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <future>
#include <sstream>
#include <thread>

#include "wakefar/errors.hpp"
#include "wakefar/system.hpp"
#include "linear_fields.hpp"

namespace wakefar {

using detail::axis_order;
using detail::curvature;
using detail::field;
using detail::slope;

int worker_count() {
  const char* env = std::getenv("WAKEFAR_THREADS");
  int n = 0;
  if (env != nullptr) n = std::atoi(env);
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, n);
}

void ShootingSpec::validate() const {
  auto bad = [](const std::string& m) { throw ConfigError(m); };
  if (!(alpha > 0.0)) bad("alpha must be positive");
  if (!(tau_min > 0.0 && tau_min < tau_match)) bad("need 0 < tau_min < tau_match");
  if (!right && !(tau_match < 1.0 - s0)) bad("need tau_match < a - s0");
  if (right && !(tau_match < right->tau)) bad("need tau_match below the right end");
  if (!(s0 > 0.0 && s0 <= 0.05)) bad("s0 must lie in (0, 0.05]");
  if (!(s_lin > 0.0 && s_lin <= s0)) bad("s_lin must lie in (0, s0]");
  if (!(linear_match > tau_min && linear_match < 1.0 - s_lin)) bad("linear_match must lie inside (tau_min, a - s_lin)");
  if (!(rtol > 0.0) || !(atol > 0.0)) bad("tolerances must be positive");
  if (newton.max_iterations < 1 || newton.max_halvings < 0) bad("bad Newton limits");
  if (!(newton.fd_step > 0.0)) bad("fd_step must be positive");
  if (!(e0_guess > 0.0 && g0_guess > 0.0 && c1_guess > 0.0)) bad("initial guesses must be positive");
  if (!(max_spacing > 0.0)) bad("max_spacing must be positive");
}

IntegratorOptions ShootingSpec::integrator() const {
  IntegratorOptions o;
  o.rtol = rtol;
  o.atol = atol;
  return o;
}

Trajectory integrate_profiles(double from, double to, const SimilarityState& initial,
                              const ModelConstants& k, const IntegratorOptions& tol,
                              int dim, SinkForm form) {
  if (!(initial.e_val > 0.0) || !(initial.g_val > 0.0)) {
    throw NonPositiveField("initial E and G must be positive");
  }
  const Vec y0 = pack_state(initial, dim);
  std::vector<EventFn> events{[](double, const Vec& y) { return y[0]; },
                              [](double, const Vec& y) { return y[2]; }};
  DormandPrince dp(tol);
  IntegrationResult r = dp.integrate(similarity_rhs(k, dim, form), from, to, y0, events);
  if (r.event_index) {
    std::ostringstream os;
    os << (*r.event_index == 0 ? "E" : "G") << " vanished at tau = " << r.t_final;
    throw BlowupOrExtinction(os.str(), r.t_final);
  }
  return std::move(r.trajectory);
}

// ---------------------------------------------------------------- shooting

namespace {

using Vec4 = Eigen::Vector4d;

Vec4 log_state(double tau, const Vec& y) {
  if (!(y[0] > 0.0) || !(y[2] > 0.0)) throw NonPositiveField("non-positive field at match point");
  return Vec4(std::log(y[0]), tau * y[1] / y[0], std::log(y[2]), tau * y[3] / y[2]);
}

struct Shooter {
  ModelConstants k;
  ShootingSpec spec;
  bool finite = false;

  int unknowns() const { return finite ? 2 : 3; }

  CenterExpansion center(const Vec& u) const {
    return make_center_expansion(std::exp(u[0]), std::exp(u[1]), 0.0, 0.0, 0.0, k);
  }
  EdgeExpansion edge(double c1) const {
    return make_edge_expansion(1.0, c1, k, spec.g_choice, spec.edge_order);
  }

  Trajectory axis_run(const Vec& u) const {
    const CenterExpansion c = center(u);
    return integrate_profiles(spec.tau_min, spec.tau_match,
                              center_series_eval(spec.tau_min, c, k), k,
                              spec.integrator(), kEgDim);
  }
  Trajectory edge_run(const Vec& u) const {
    if (finite) {
      return integrate_profiles(spec.right->tau, spec.tau_match, *spec.right, k,
                                spec.integrator(), kEgDim);
    }
    const EdgeExpansion ex = edge(std::exp(u[2]));
    const double t0 = 1.0 - spec.s0;
    return integrate_profiles(t0, spec.tau_match, edge_series_eval(t0, ex, k), k,
                              spec.integrator(), kEgDim);
  }

  Vec4 mismatch(const Vec& u) const {
    const Trajectory a = axis_run(u);
    const Trajectory e = edge_run(u);
    return log_state(spec.tau_match, a.y_end()) - log_state(spec.tau_match, e.y_end());
  }

  bool try_mismatch(const Vec& u, Vec4& m) const {
    try {
      m = mismatch(u);
      return m.allFinite();
    } catch (const WakeError&) {
      return false;
    }
  }
};

}  // namespace

SimilarityState EgSolution::eval(double tau) const {
  SimilarityState s;
  s.tau = tau;
  if (tau < 0.0 || tau > a || (tau == a && !spec.right)) return s;
  if (spec.right && tau == a) {
    s = *spec.right;
  } else if (tau < spec.tau_min) {
    s = center_series_eval(tau, center, k);
  } else if (tau <= spec.tau_match) {
    s = unpack_state(tau, axis_side(tau));
  } else if (spec.right || tau <= a - spec.s0) {
    s = unpack_state(tau, edge_side(tau));
  } else {
    s = edge_series_eval(tau, edge, k);
  }
  s.h_val = s.r1_val = s.r2_val = s.dh = s.dr1 = s.dr2 = 0.0;
  return s;
}

EgSolution shoot_eg(const ShootingSpec& spec, const ModelConstants& k_in) {
  spec.validate();
  ModelConstants k = k_in;
  k.alpha = spec.alpha;
  k.validate();

  Shooter sh{k, spec, spec.right.has_value()};
  const int n = sh.unknowns();
  Vec u(n);
  u[0] = std::log(spec.e0_guess);
  u[1] = std::log(spec.g0_guess);
  if (n == 3) u[2] = std::log(spec.c1_guess);

  Vec4 m;
  if (!sh.try_mismatch(u, m)) {
    throw NoConvergence("no admissible starting point for the shooting iteration");
  }

  MatchReport rep;
  const NewtonSettings& ns = spec.newton;
  const int workers = worker_count();
  int stalled = 0;
  for (int it = 0; it < ns.max_iterations && m.norm() > ns.tolerance; ++it) {
    // Finite-difference Jacobian, columns independent.
    Eigen::Matrix<double, 4, Eigen::Dynamic> jac(4, n);
    std::vector<std::pair<bool, Vec4>> cols(n);
    auto column = [&](int j) {
      Vec v = u;
      const double h = ns.fd_step * std::max(1.0, std::abs(u[j]));
      v[j] += h;
      Vec4 mp;
      const bool ok = sh.try_mismatch(v, mp);
      return std::make_pair(ok, Vec4(ok ? Vec4((mp - m) / h) : Vec4::Zero()));
    };
    if (workers > 1) {
      std::vector<std::future<std::pair<bool, Vec4>>> fut;
      for (int j = 0; j < n; ++j) fut.push_back(std::async(std::launch::async, column, j));
      for (int j = 0; j < n; ++j) cols[j] = fut[j].get();
    } else {
      for (int j = 0; j < n; ++j) cols[j] = column(j);
    }
    for (int j = 0; j < n; ++j) {
      if (!cols[j].first) {
        // One-sided difference failed: try the other side.
        Vec v = u;
        const double h = ns.fd_step * std::max(1.0, std::abs(u[j]));
        v[j] -= h;
        Vec4 mp;
        if (!sh.try_mismatch(v, mp)) throw JacobianSingular("Jacobian column could not be evaluated");
        cols[j].second = (m - mp) / h;
      }
      jac.col(j) = cols[j].second;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * m;
    if (!jtj.allFinite()) throw JacobianSingular("non-finite Jacobian");
    const double reg = 1e-14 * std::max(jtj.trace(), 1e-300);
    const Eigen::VectorXd du =
        -(jtj + reg * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(g);

    double lam = 1.0;
    bool accepted = false;
    for (int hv = 0; hv <= ns.max_halvings; ++hv, lam *= 0.5) {
      Vec4 mn;
      const Vec un = u + lam * du;
      if (sh.try_mismatch(un, mn) && mn.norm() < m.norm()) {
        const double gain = (m.norm() - mn.norm()) / m.norm();
        u = un;
        m = mn;
        accepted = true;
        stalled = gain < ns.stall ? stalled + 1 : 0;
        break;
      }
    }
    rep.iterations = it + 1;
    rep.history.push_back(m.norm());
    if (!accepted || stalled >= 3) break;
    // First-order optimality of the least-squares problem.
    if (g.norm() <= 1e-12 * std::max(1.0, jac.norm() * m.norm()) && m.norm() > ns.tolerance) break;
  }

  EgSolution sol;
  sol.k = k;
  sol.spec = spec;
  sol.center = sh.center(u);
  if (sh.finite) {
    sol.a = spec.right->tau;
    sol.edge = EdgeExpansion{};
  } else {
    sol.edge = sh.edge(std::exp(u[2]));
  }
  sol.axis_side = sh.axis_run(u);
  sol.edge_side = sh.edge_run(u);
  for (int i = 0; i < 4; ++i) rep.mismatch[i] = m[i];
  rep.norm = m.norm();
  rep.converged = rep.norm <= ns.tolerance;
  rep.status = rep.converged ? "converged" : "least-squares floor";
  sol.report = rep;
  return sol;
}

// ---------------------------------------------------------- linear solves

std::array<double, 2> LinearProfile::eval(double tau) const {
  if (tau < 0.0 || tau > a) return {0.0, 0.0};
  if (tau < tau_min) return {v0 + v2 * tau * tau, 2.0 * v2 * tau};
  if (tau <= tau_match) {
    const Vec y = axis_side(tau);
    return {y[0], y[1]};
  }
  if (tau <= edge_start) {
    const Vec y = edge_side(tau);
    return {y[0], y[1]};
  }
  // Local edge form: particular branch plus the regular homogeneous branch.
  // At tau = a the slope of a sub-linear branch is capped at a tiny offset.
  const double s = std::max(a - tau, 1e-3 * (a - edge_start));
  const double sv = a - tau;
  const double hv = sv > 0.0 ? std::pow(sv, edge_exponent) : 0.0;
  return {edge_value - edge_slope * sv + edge_amplitude * hv,
          edge_slope - edge_amplitude * edge_exponent * std::pow(s, edge_exponent - 1.0)};
}

LinearEdgeBranch linear_edge_branch(LinearTarget t, const ModelConstants& k, double edge_p,
                                    double a, double forcing_scale, double edge_value) {
  LinearEdgeBranch br;
  const double c_diff = t == LinearTarget::h ? k.c_rho : k.c_1rho;
  br.gamma = k.c_e * edge_p / c_diff;
  if (t == LinearTarget::h) {
    // H = ev + (f - ev)(1 - phi0), phi0 = 1 + s / (a beta) + ...
    br.value = edge_value;
    br.slope = (forcing_scale - edge_value) / (a * (1.0 - br.gamma));
  }
  return br;
}

double linear_axis_v2(LinearTarget t, SimilarityState s, double v0,
                      const ModelConstants& k, double forcing_scale) {
  field(s, t) = v0;
  slope(s, t) = 0.0;
  SimilarityState s0 = s;
  field(s0, t) = 0.0;
  const double raw = curvature(ode_rhs(s, k), t) +
                     (forcing_scale - 1.0) * curvature(ode_rhs(s0, k), t);
  return raw / (2.0 * (1.0 + axis_order(t)));
}

LinearProfile solve_linear_profile(const LinearBvpSpec& spec) {
  const ModelConstants& k = spec.k;
  const LinearTarget t = spec.target;
  if (!spec.background) throw ConfigError("linear solve needs a background");
  const double a = spec.a;
  const double tmin = spec.tau_min * a, tm = spec.tau_match * a;
  const double s_lin = spec.s_lin * a;
  const double te = a - s_lin;
  const double f = spec.forcing_scale;

  // fs = 1 is the full equation, fs = 0 its homogeneous part.
  auto make_rhs = [&](double fs) {
    return [&, fs](double tau, const Vec& y, Vec& dy) {
      SimilarityState s = spec.background(tau);
      field(s, t) = 0.0;
      slope(s, t) = 0.0;
      const double inhom = curvature(ode_rhs(s, k), t);
      field(s, t) = y[0];
      slope(s, t) = y[1];
      const double full = curvature(ode_rhs(s, k), t);
      dy.resize(2);
      dy[0] = y[1];
      dy[1] = full + (fs - 1.0) * inhom;
    };
  };

  // Axis data: y = v0 + v2 tau^2 with v2 fixed by the O(1) balance.
  auto axis_data = [&](double v0, double fs) {
    const double v2 = linear_axis_v2(t, spec.background(tmin), v0, k, fs);
    Vec y(2);
    y << v0 + v2 * tmin * tmin, 2.0 * v2 * tmin;
    return std::make_pair(y, v2);
  };

  // Edge data: particular branch plus amp * s^gamma.
  const LinearEdgeBranch br = linear_edge_branch(t, k, spec.edge_p, a, f, spec.edge_value);
  const double gamma = br.gamma;
  const double edge_slope = br.slope;
  const double edge_value = br.value;
  auto edge_data = [&](double amp, bool particular) {
    const double v = particular ? edge_value : 0.0, d = particular ? edge_slope : 0.0;
    Vec y(2);
    y << v - d * s_lin + amp * std::pow(s_lin, gamma),
        d - amp * gamma * std::pow(s_lin, gamma - 1.0);
    return y;
  };

  DormandPrince dp(spec.tol);
  auto run = [&](double from, double to, const Vec& y0, double fs) {
    return dp.integrate(make_rhs(fs), from, to, y0).trajectory;
  };

  // The homogeneous branches are integrated on their own so the 2x2 system
  // never differences nearly equal runs. The edge branch is normalized to
  // O(1) at the match point.
  const double s_m = a - tm;
  const double norm = std::pow(s_m, -gamma);
  const Vec ap = run(tmin, tm, axis_data(0.0, f).first, f).y_end();
  const Vec ah = run(tmin, tm, axis_data(1.0, 0.0).first, 0.0).y_end();
  const Vec ep = run(te, tm, edge_data(0.0, true), f).y_end();
  const Vec eh = run(te, tm, edge_data(norm, false), 0.0).y_end();

  // ap + v ah = ep + b eh
  Eigen::Matrix2d mat;
  mat << ah[0], -eh[0], ah[1], -eh[1];
  const Eigen::Vector2d rhs_v(ep[0] - ap[0], ep[1] - ap[1]);
  const double det = mat.determinant();
  const double scale = mat.cwiseAbs().maxCoeff();
  if (!(std::abs(det) > 1e-13 * scale * scale)) {
    throw DegenerateHomogeneous("homogeneous solutions are linearly dependent at the match point");
  }
  Eigen::Vector2d sol = mat.partialPivLu().solve(rhs_v);
  sol[1] *= norm;

  LinearProfile out;
  out.target = t;
  out.v0 = sol[0];
  out.edge_amplitude = sol[1];
  out.edge_exponent = gamma;
  out.tau_min = tmin;
  out.tau_match = tm;
  out.edge_start = te;
  out.a = a;
  out.edge_value = edge_value;
  out.edge_slope = edge_slope;
  const auto ad = axis_data(out.v0, f);
  out.v2 = ad.second;
  out.axis_side = run(tmin, tm, ad.first, f);
  out.edge_side = run(te, tm, edge_data(out.edge_amplitude, true), f);
  return out;
}

// ------------------------------------------------------------- assembly

namespace {

std::vector<double> profile_grid(const EgSolution& eg, const ShootingSpec& spec) {
  const double a = eg.a;
  std::vector<double> g{0.0};
  for (double t = spec.tau_min * 1e-3; t < spec.tau_min; t *= 10.0) g.push_back(t);
  for (double t : eg.axis_side.nodes()) g.push_back(t);
  for (double t : eg.edge_side.nodes()) g.push_back(t);
  if (!spec.right) {
    for (double s = spec.s0; s > spec.s_lin * 1e-2; s *= 0.7) g.push_back(a - s);
  }
  g.push_back(a);
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (double t : g) {
    if (t < 0.0 || t > a) continue;
    if (!out.empty() && t - out.back() <= 1e-14 * a) continue;
    if (!out.empty()) {
      const double gap = t - out.back();
      const int extra = static_cast<int>(std::ceil(gap / spec.max_spacing)) - 1;
      const double start = out.back();
      for (int i = 1; i <= extra; ++i) out.push_back(start + gap * i / (extra + 1));
    }
    out.push_back(t);
  }
  return out;
}

SimilarityState combined(const EgSolution& eg, const LinearProfile* h,
                         const LinearProfile* r1, const LinearProfile* r2, double tau) {
  SimilarityState s = eg.eval(tau);
  if (h) {
    const auto v = h->eval(tau);
    s.h_val = v[0];
    s.dh = v[1];
  }
  if (r1) {
    const auto v = r1->eval(tau);
    s.r1_val = v[0];
    s.dr1 = v[1];
  }
  if (r2) {
    const auto v = r2->eval(tau);
    s.r2_val = v[0];
    s.dr2 = v[1];
  }
  return s;
}

}  // namespace

FullSolution solve_profiles(const ShootingSpec& spec, const ModelConstants& k_in) {
  FullSolution out;
  out.eg = shoot_eg(spec, k_in);
  const EgSolution& eg = out.eg;
  const ModelConstants& k = eg.k;
  const double a = eg.a;
  const bool finite = spec.right.has_value();
  // The linear solves need the background just inside the edge; in
  // finite-interval mode the right end is regular and its data are used.
  const double s_lin = finite ? 0.0 : spec.s_lin;

  auto make = [&](LinearTarget t, const LinearProfile* h, const LinearProfile* r1) {
    if (finite) {
      // Regular right end: zero value and zero slope data are not enough to
      // define a homogeneous branch; keep the fields at zero.
      LinearProfile lp;
      lp.target = t;
      lp.a = a;
      lp.tau_min = spec.tau_min * a;
      lp.tau_match = a;
      lp.edge_start = a;
      return lp;
    }
    LinearBvpSpec ls;
    ls.target = t;
    ls.k = k;
    ls.background = [&eg, h, r1](double tau) { return combined(eg, h, r1, nullptr, tau); };
    ls.a = a;
    ls.tau_min = spec.tau_min;
    ls.tau_match = spec.linear_match;
    ls.s_lin = s_lin;
    ls.edge_p = eg.edge.p;
    ls.tol = IntegratorOptions{std::min(spec.rtol, 1e-11), std::min(spec.atol, 1e-14)};
    return solve_linear_profile(ls);
  };
  out.h = make(LinearTarget::h, nullptr, nullptr);
  out.r1 = make(LinearTarget::r1, &out.h, nullptr);
  out.r2 = make(LinearTarget::r2, &out.h, &out.r1);

  const bool lin = !finite;
  const std::vector<double> grid = profile_grid(eg, spec);
  std::vector<SimilarityState> nodes;
  std::vector<SecondDerivs> d2;
  nodes.reserve(grid.size());
  d2.reserve(grid.size());
  for (double tau : grid) {
    SimilarityState s = lin ? combined(eg, &out.h, &out.r1, &out.r2, tau) : eg.eval(tau);
    s.tau = tau;
    SecondDerivs d;
    if (tau == 0.0) {
      d.d2e = 2.0 * eg.center.e2;
      d.d2g = 2.0 * eg.center.g2;
      d.d2h = 2.0 * out.h.v2;
      d.d2r1 = 2.0 * out.r1.v2;
      d.d2r2 = 2.0 * out.r2.v2;
    } else if (tau < a) {
      d = ode_rhs(s, k);
    } else {
      d = finite ? ode_rhs(s, k) : (d2.empty() ? SecondDerivs{} : d2.back());
    }
    nodes.push_back(s);
    d2.push_back(d);
  }

  ProfileMeta meta;
  meta.alpha = k.alpha;
  meta.a = a;
  meta.c1 = eg.edge.c1;
  meta.edge_p = eg.edge.p;
  meta.e0 = eg.center.e0;
  meta.g0 = eg.center.g0;
  meta.h0 = out.h.v0;
  meta.r10 = out.r1.v0;
  meta.r20 = out.r2.v0;
  meta.mismatch = eg.report.norm;
  meta.iterations = eg.report.iterations;
  meta.converged = eg.report.converged;
  double hmax = nodes.front().h_val;
  for (const auto& s : nodes) hmax = std::max(hmax, s.h_val);
  meta.h_max = hmax;
  out.unit = SolutionProfiles(std::move(nodes), std::move(d2), meta);
  const double hi = finite ? 0.99 : 0.95;
  out.unit.meta().tau_match = spec.tau_match * a;
  out.unit.meta().residual_norm = profile_residual_norm(out.unit, k, 10, 0.01, hi);
  out.unit.meta().residual_smooth =
      profile_residual_norm(out.unit, k, 10, 0.01, hi, spec.tau_match * a);

  if (spec.norm_e0 > 0.0) {
    const double lambda = std::sqrt(spec.norm_e0 / eg.center.e0);
    out.profiles = out.unit.rescaled(lambda);
  } else {
    out.profiles = out.unit;
  }
  return out;
}

SimilarityState FullSolution::eval(double tau) const {
  if (eg.spec.right) return eg.eval(tau);
  return combined(eg, &h, &r1, &r2, tau);
}

double profile_residual_norm(const SolutionProfiles& p, const ModelConstants& k,
                             int refine, double lo, double hi, double skip) {
  const auto& n = p.nodes();
  if (n.size() < 2) return 0.0;
  const double a = p.support();
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < n.size(); ++i) {
    const double t0 = n[i].tau, t1 = n[i + 1].tau;
    if (t0 < lo * a || t1 > hi * a) continue;
    if (t0 <= skip && skip < t1) continue;
    for (int j = 1; j < refine; ++j) {
      const double tau = t0 + (t1 - t0) * j / refine;
      const ProfileJets jt = p.jets(tau);
      const SimilarityState s = p.at(tau);
      SecondDerivs d;
      d.d2e = jt[0].d2;
      d.d2g = jt[1].d2;
      d.d2h = jt[2].d2;
      d.d2r1 = jt[3].d2;
      d.d2r2 = jt[4].d2;
      try {
        const Residual5 r = ode_residual(s, d, k);
        const Residual5 sc = ode_term_scale(s, d, k);
        for (int c = 0; c < 5; ++c) {
          if (sc[c] > 0.0) worst = std::max(worst, std::abs(r[c]) / sc[c]);
        }
      } catch (const WakeError&) {
      }
    }
  }
  return worst;
}

// ------------------------------------------------------------ alpha scan

std::vector<AlphaScanPoint> scan_alpha(double lo, double hi, int n,
                                       const ShootingSpec& base,
                                       const ModelConstants& k, int threads) {
  if (n < 1) throw ConfigError("scan needs at least one point");
  std::vector<AlphaScanPoint> out(n);
  auto one = [&](int i) {
    AlphaScanPoint pt;
    pt.alpha = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    ShootingSpec s = base;
    s.alpha = pt.alpha;
    try {
      const EgSolution eg = shoot_eg(s, k);
      pt.floor = eg.report.norm;
      pt.e0 = eg.e0();
      pt.g0 = eg.g0();
      pt.c1 = eg.c1();
      pt.converged = eg.report.converged;
      pt.note = eg.report.status;
    } catch (const WakeError& e) {
      pt.floor = std::numeric_limits<double>::quiet_NaN();
      pt.note = e.what();
    }
    out[i] = pt;
  };
  const int w = threads > 0 ? threads : worker_count();
  if (w <= 1) {
    for (int i = 0; i < n; ++i) one(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < std::min(w, n); ++t) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) one(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

}  // namespace wakefar
