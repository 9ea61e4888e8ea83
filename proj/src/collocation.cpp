#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "linear_fields.hpp"
#include "wakefar/bvp.hpp"
#include "wakefar/errors.hpp"
#include "wakefar/system.hpp"

namespace wakefar {

using detail::axis_order;
using detail::curvature;
using detail::field;
using detail::slope;

void CollocationSpec::validate() const {
  auto bad = [](const std::string& m) { throw ConfigError("collocation: " + m); };
  if (intervals < 4) bad("need at least 4 intervals per side");
  if (!(tau_min > 0.0 && tau_min < tau_match)) bad("need 0 < tau_min < tau_match");
  const double right_end = right ? right->tau : 1.0 - s0;
  if (!(tau_match < right_end)) bad("match point must lie left of the right end");
  if (!right && !(s0 > 0.0 && s0 < 1.0)) bad("s0 must lie in (0, 1)");
  if (!right && !(s_lin > 0.0 && s_lin <= s0)) bad("s_lin must lie in (0, s0]");
  if (!(grading >= 1.0)) bad("grading must be >= 1");
  if (!(e0_guess > 0.0 && g0_guess > 0.0 && c1_guess > 0.0)) bad("guesses must be positive");
}

namespace {

using Vec4 = Eigen::Vector4d;
using Triplets = std::vector<Eigen::Triplet<double>>;

Vec4 eg_rhs(double tau, const Vec4& y, const ModelConstants& k) {
  SimilarityState s;
  s.tau = tau;
  s.e_val = y[0];
  s.de = y[1];
  s.g_val = y[2];
  s.dg = y[3];
  const SecondDerivs d = ode_rhs(s, k);
  return Vec4(y[1], d.d2e, y[3], d.d2g);
}

// Hermite-Simpson defect of one interval in compressed form.
template <class F, class V>
V hs_defect(const F& f, double t0, double t1, const V& y0, const V& y1) {
  const double h = t1 - t0;
  const V f0 = f(t0, y0), f1 = f(t1, y1);
  const V ym = 0.5 * (y0 + y1) + h / 8.0 * (f0 - f1);
  const V fm = f(0.5 * (t0 + t1), ym);
  return y1 - y0 - h / 6.0 * (f0 + 4.0 * fm + f1);
}

Vec4 log_state(double tau, const Vec4& y) {
  if (!(y[0] > 0.0) || !(y[2] > 0.0)) throw NonPositiveField("non-positive field at match point");
  return Vec4(std::log(y[0]), tau * y[1] / y[0], std::log(y[2]), tau * y[3] / y[2]);
}

Eigen::Matrix4d log_state_jac(double tau, const Vec4& y) {
  Eigen::Matrix4d j = Eigen::Matrix4d::Zero();
  j(0, 0) = 1.0 / y[0];
  j(1, 0) = -tau * y[1] / (y[0] * y[0]);
  j(1, 1) = tau / y[0];
  j(2, 2) = 1.0 / y[2];
  j(3, 2) = -tau * y[3] / (y[2] * y[2]);
  j(3, 3) = tau / y[2];
  return j;
}

Vec4 to4(const SimilarityState& s) { return Vec4(s.e_val, s.de, s.g_val, s.dg); }

struct EgProblem {
  ModelConstants k;
  CollocationSpec spec;
  bool finite = false;
  double a = 1.0;
  std::vector<double> left, right;  // meshes on [tau_min, tau_m] and [tau_m, right end]
  int nl = 0, nr = 0, np = 0, ny = 0;

  int yl(int i) const { return 4 * i; }
  int yr(int j) const { return 4 * (nl + 1) + 4 * j; }
  int par(int q) const { return ny + q; }
  int size() const { return ny + np; }

  Vec4 block(const Eigen::VectorXd& x, int off) const { return x.segment<4>(off); }

  Vec4 left_bc(const Eigen::VectorXd& x) const {
    const CenterExpansion c = make_center_expansion(std::exp(x[par(0)]), std::exp(x[par(1)]),
                                                    0.0, 0.0, 0.0, k);
    return block(x, yl(0)) - to4(center_series_eval(left.front(), c, k));
  }
  Vec4 right_bc(const Eigen::VectorXd& x) const {
    if (finite) return block(x, yr(nr)) - to4(*spec.right);
    const EdgeExpansion ex =
        make_edge_expansion(1.0, std::exp(x[par(2)]), k, spec.g_choice, spec.edge_order);
    return block(x, yr(nr)) - to4(edge_series_eval(right.back(), ex, k));
  }

  Eigen::VectorXd constraints(const Eigen::VectorXd& x) const {
    Eigen::VectorXd c(ny);
    auto f = [&](double t, const Vec4& y) { return eg_rhs(t, y, k); };
    int row = 0;
    c.segment<4>(row) = left_bc(x);
    row += 4;
    for (int i = 0; i < nl; ++i, row += 4) {
      c.segment<4>(row) = hs_defect(f, left[i], left[i + 1], block(x, yl(i)), block(x, yl(i + 1)));
    }
    for (int j = 0; j < nr; ++j, row += 4) {
      c.segment<4>(row) = hs_defect(f, right[j], right[j + 1], block(x, yr(j)), block(x, yr(j + 1)));
    }
    c.segment<4>(row) = right_bc(x);
    return c;
  }

  Vec4 objective(const Eigen::VectorXd& x) const {
    const double tm = spec.tau_match;
    return log_state(tm, block(x, yl(nl))) - log_state(tm, block(x, yr(0)));
  }

  // Sparse constraint Jacobian: analytic identity blocks for the boundary
  // rows, finite differences inside each interval and for the parameters.
  Eigen::SparseMatrix<double> constraint_jac(const Eigen::VectorXd& x) const {
    Triplets tr;
    tr.reserve(static_cast<std::size_t>(ny) * 9);
    auto f = [&](double t, const Vec4& y) { return eg_rhs(t, y, k); };
    auto step = [](double v) { return 1e-7 * std::max(std::abs(v), 1e-6); };
    auto interval = [&](int row, double t0, double t1, int o0, int o1) {
      const Vec4 y0 = block(x, o0), y1 = block(x, o1);
      const Vec4 base = hs_defect(f, t0, t1, y0, y1);
      for (int c = 0; c < 8; ++c) {
        Vec4 p0 = y0, p1 = y1;
        double& v = c < 4 ? p0[c] : p1[c - 4];
        const double h = step(v);
        v += h;
        const Vec4 d = (hs_defect(f, t0, t1, p0, p1) - base) / h;
        const int col = c < 4 ? o0 + c : o1 + c - 4;
        for (int r = 0; r < 4; ++r) {
          if (d[r] != 0.0) tr.emplace_back(row + r, col, d[r]);
        }
      }
    };
    int row = 0;
    for (int r = 0; r < 4; ++r) tr.emplace_back(row + r, yl(0) + r, 1.0);
    for (int q = 0; q < 2; ++q) {
      Eigen::VectorXd xp = x;
      const double h = 1e-7;
      xp[par(q)] += h;
      const Vec4 d = (left_bc(xp) - left_bc(x)) / h;
      for (int r = 0; r < 4; ++r) tr.emplace_back(row + r, par(q), d[r]);
    }
    row += 4;
    for (int i = 0; i < nl; ++i, row += 4) interval(row, left[i], left[i + 1], yl(i), yl(i + 1));
    for (int j = 0; j < nr; ++j, row += 4) interval(row, right[j], right[j + 1], yr(j), yr(j + 1));
    for (int r = 0; r < 4; ++r) tr.emplace_back(row + r, yr(nr) + r, 1.0);
    if (!finite) {
      Eigen::VectorXd xp = x;
      const double h = 1e-7;
      xp[par(2)] += h;
      const Vec4 d = (right_bc(xp) - right_bc(x)) / h;
      for (int r = 0; r < 4; ++r) tr.emplace_back(row + r, par(2), d[r]);
    }
    Eigen::SparseMatrix<double> m(ny, size());
    m.setFromTriplets(tr.begin(), tr.end());
    return m;
  }

  Eigen::Matrix<double, 4, Eigen::Dynamic> objective_jac(const Eigen::VectorXd& x) const {
    Eigen::Matrix<double, 4, Eigen::Dynamic> j = Eigen::MatrixXd::Zero(4, size());
    const double tm = spec.tau_match;
    j.block<4, 4>(0, yl(nl)) = log_state_jac(tm, block(x, yl(nl)));
    j.block<4, 4>(0, yr(0)) = -log_state_jac(tm, block(x, yr(0)));
    return j;
  }
};

std::vector<double> uniform_mesh(double lo, double hi, int n) {
  std::vector<double> m(n + 1);
  for (int i = 0; i <= n; ++i) m[i] = lo + (hi - lo) * i / n;
  m.back() = hi;
  return m;
}

// Nodes from lo to hi clustered toward hi: s = hi - t runs from (hi - lo)
// down to the offset of hi from the edge with a power-law map.
std::vector<double> graded_mesh(double lo, double hi, double a, int n, double grading) {
  const double s_lo = a - lo, s_hi = a - hi;
  std::vector<double> m(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double xi = static_cast<double>(j) / n;
    m[j] = a - (s_hi + (s_lo - s_hi) * std::pow(1.0 - xi, grading));
  }
  m.front() = lo;
  m.back() = hi;
  return m;
}

// Background of one interval of the linear meshes: end states and midpoint.
struct Cell {
  double t0 = 0.0, t1 = 0.0;
  SimilarityState s0, s1, sm;
};

SimilarityState with_eg(double tau, const Vec4& y) {
  SimilarityState s;
  s.tau = tau;
  s.e_val = y[0];
  s.de = y[1];
  s.g_val = y[2];
  s.dg = y[3];
  return s;
}

void fill_eg_midpoint(Cell& c, const ModelConstants& k) {
  const double h = c.t1 - c.t0;
  const Vec4 y0 = to4(c.s0), y1 = to4(c.s1);
  const Vec4 ym = 0.5 * (y0 + y1) + h / 8.0 * (eg_rhs(c.t0, y0, k) - eg_rhs(c.t1, y1, k));
  c.sm = with_eg(0.5 * (c.t0 + c.t1), ym);
}

using Vec2 = Eigen::Vector2d;

Vec2 linear_rhs(SimilarityState s, LinearTarget t, const Vec2& z, const ModelConstants& k) {
  field(s, t) = z[0];
  slope(s, t) = z[1];
  return Vec2(z[1], curvature(ode_rhs(s, k), t));
}

// One linear field on the cells: unknowns are (z, z') at every node, the
// axis value v0 and the edge amplitude B.
void solve_linear_cells(std::vector<Cell>& cells, LinearTarget t, const ModelConstants& k,
                        double edge_p, double a) {
  const int nc = static_cast<int>(cells.size());
  const int nz = 2 * (nc + 1);
  const int iv = nz, ib = nz + 1, n = nz + 2;
  Triplets tr;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  // Axis rows: z0 = v0 + v2 tau^2, z0' = 2 v2 tau, v2 affine in v0.
  const double tl = cells.front().t0;
  const double v2a = linear_axis_v2(t, cells.front().s0, 0.0, k);
  const double v2b = linear_axis_v2(t, cells.front().s0, 1.0, k) - v2a;
  tr.emplace_back(0, 0, 1.0);
  tr.emplace_back(0, iv, -(1.0 + v2b * tl * tl));
  rhs[0] = v2a * tl * tl;
  tr.emplace_back(1, 1, 1.0);
  tr.emplace_back(1, iv, -2.0 * v2b * tl);
  rhs[1] = 2.0 * v2a * tl;

  // Interval defects; exact for an affine right-hand side.
  int row = 2;
  for (int i = 0; i < nc; ++i, row += 2) {
    const Cell& c = cells[i];
    auto f = [&](double tau, const Vec2& z) {
      const SimilarityState& bg = tau == c.t0 ? c.s0 : tau == c.t1 ? c.s1 : c.sm;
      return linear_rhs(bg, t, z, k);
    };
    const Vec2 zero = Vec2::Zero();
    const Vec2 base = hs_defect(f, c.t0, c.t1, zero, zero);
    for (int col = 0; col < 4; ++col) {
      Vec2 p0 = zero, p1 = zero;
      (col < 2 ? p0[col] : p1[col - 2]) = 1.0;
      const Vec2 d = hs_defect(f, c.t0, c.t1, p0, p1) - base;
      const int cc = col < 2 ? 2 * i + col : 2 * (i + 1) + col - 2;
      for (int r = 0; r < 2; ++r) {
        if (d[r] != 0.0) tr.emplace_back(row + r, cc, d[r]);
      }
    }
    rhs.segment<2>(row) = -base;
  }

  // Edge rows: particular branch plus B s^gamma.
  const LinearEdgeBranch br = linear_edge_branch(t, k, edge_p, a, 1.0, 0.0);
  const double s = a - cells.back().t1;
  tr.emplace_back(row, 2 * nc, 1.0);
  tr.emplace_back(row, ib, -std::pow(s, br.gamma));
  rhs[row] = br.value - br.slope * s;
  tr.emplace_back(row + 1, 2 * nc + 1, 1.0);
  tr.emplace_back(row + 1, ib, br.gamma * std::pow(s, br.gamma - 1.0));
  rhs[row + 1] = br.slope;

  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(tr.begin(), tr.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) throw JacobianSingular("linear collocation matrix is singular");
  const Eigen::VectorXd z = lu.solve(rhs);
  if (!z.allFinite()) throw NoConvergence("linear collocation solve produced non-finite values");

  for (int i = 0; i < nc; ++i) {
    Cell& c = cells[i];
    field(c.s0, t) = z[2 * i];
    slope(c.s0, t) = z[2 * i + 1];
    field(c.s1, t) = z[2 * i + 2];
    slope(c.s1, t) = z[2 * i + 3];
    const double h = c.t1 - c.t0;
    const Vec2 z0(z[2 * i], z[2 * i + 1]), z1(z[2 * i + 2], z[2 * i + 3]);
    const Vec2 zm = 0.5 * (z0 + z1) + h / 8.0 * (linear_rhs(c.s0, t, z0, k) - linear_rhs(c.s1, t, z1, k));
    field(c.sm, t) = zm[0];
    slope(c.sm, t) = zm[1];
  }
}

}  // namespace

CollocationResult collocation_oracle(const CollocationSpec& spec, const ModelConstants& k_in) {
  spec.validate();
  ModelConstants k = k_in;
  k.alpha = spec.alpha;
  k.validate();

  EgProblem pb;
  pb.k = k;
  pb.spec = spec;
  pb.finite = spec.right.has_value();
  pb.a = pb.finite ? spec.right->tau : 1.0;
  pb.nl = pb.nr = spec.intervals;
  pb.np = pb.finite ? 2 : 3;
  pb.left = uniform_mesh(spec.tau_min, spec.tau_match, pb.nl);
  pb.right = pb.finite ? uniform_mesh(spec.tau_match, pb.a, pb.nr)
                       : graded_mesh(spec.tau_match, 1.0 - spec.s0, 1.0, pb.nr, spec.grading);
  pb.ny = 4 * (pb.nl + 1) + 4 * (pb.nr + 1);

  // Initial guess: one integration from each end with the guessed parameters.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(pb.size());
  x[pb.par(0)] = std::log(spec.e0_guess);
  x[pb.par(1)] = std::log(spec.g0_guess);
  if (!pb.finite) x[pb.par(2)] = std::log(spec.c1_guess);
  {
    const IntegratorOptions tol{1e-8, 1e-12};
    const CenterExpansion c = make_center_expansion(spec.e0_guess, spec.g0_guess, 0.0, 0.0, 0.0, k);
    const Trajectory ax = integrate_profiles(spec.tau_min, spec.tau_match,
                                             center_series_eval(spec.tau_min, c, k), k, tol, kEgDim);
    SimilarityState start;
    if (pb.finite) {
      start = *spec.right;
    } else {
      const EdgeExpansion ex = make_edge_expansion(1.0, spec.c1_guess, k, spec.g_choice, spec.edge_order);
      start = edge_series_eval(pb.right.back(), ex, k);
    }
    const Trajectory ed = integrate_profiles(pb.right.back(), spec.tau_match, start, k, tol, kEgDim);
    for (int i = 0; i <= pb.nl; ++i) x.segment<4>(pb.yl(i)) = ax(pb.left[i]).head<4>();
    for (int j = 0; j <= pb.nr; ++j) x.segment<4>(pb.yr(j)) = ed(pb.right[j]).head<4>();
  }

  // Gauss-Newton SQP on min |J|^2 subject to C = 0, l1 merit line search.
  const NewtonSettings& ns = spec.newton;
  const int n = pb.size(), m = pb.ny;
  Eigen::VectorXd c = pb.constraints(x);
  Vec4 jv = pb.objective(x);
  CollocationResult res;
  bool stalled = false;
  int it = 0;
  for (; it < ns.max_iterations; ++it) {
    const Eigen::SparseMatrix<double> b = pb.constraint_jac(x);
    const auto aj = pb.objective_jac(x);
    const Eigen::MatrixXd ata = aj.transpose() * aj;
    const Eigen::VectorXd atj = aj.transpose() * jv;
    const double mu = 1e-14 * std::max(ata.norm(), 1e-300);

    Triplets tr;
    tr.reserve(b.nonZeros() * 2 + 64 + n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (ata(i, j) != 0.0) tr.emplace_back(i, j, ata(i, j));
      }
      tr.emplace_back(i, i, mu);
    }
    for (int col = 0; col < b.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator itb(b, col); itb; ++itb) {
        tr.emplace_back(n + itb.row(), itb.col(), itb.value());
        tr.emplace_back(itb.col(), n + itb.row(), itb.value());
      }
    }
    Eigen::SparseMatrix<double> kkt(n + m, n + m);
    kkt.setFromTriplets(tr.begin(), tr.end());
    Eigen::VectorXd r(n + m);
    r.head(n) = -atj;
    r.tail(m) = -c;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(kkt);
    if (lu.info() != Eigen::Success) throw JacobianSingular("collocation KKT matrix is singular");
    const Eigen::VectorXd sol = lu.solve(r);
    if (!sol.allFinite()) throw JacobianSingular("collocation KKT solve produced non-finite values");
    const Eigen::VectorXd dx = sol.head(n);
    const double rho = 10.0 * (sol.tail(m).cwiseAbs().maxCoeff() + 1.0);

    auto merit = [&](const Vec4& jj, const Eigen::VectorXd& cc) {
      return 0.5 * jj.squaredNorm() + rho * cc.lpNorm<1>();
    };
    const double m0 = merit(jv, c);
    double lam = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn;
    Eigen::VectorXd cn;
    Vec4 jn;
    for (int hv = 0; hv <= ns.max_halvings; ++hv, lam *= 0.5) {
      xn = x + lam * dx;
      try {
        cn = pb.constraints(xn);
        jn = pb.objective(xn);
      } catch (const WakeError&) {
        continue;
      }
      if (cn.allFinite() && jn.allFinite() && merit(jn, cn) <= m0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double dpar = dx.tail(pb.np).norm() * lam;
    const double gain = (jv.norm() - jn.norm()) / std::max(jv.norm(), 1e-300);
    x = xn;
    c = cn;
    jv = jn;
    if (c.cwiseAbs().maxCoeff() < 1e-11 &&
        (dpar < 1e-12 || std::abs(gain) < ns.stall || jv.norm() < ns.tolerance)) {
      stalled = true;
      ++it;
      break;
    }
  }
  res.iterations = it;
  res.objective = jv.norm();
  res.constraint = c.cwiseAbs().maxCoeff();
  res.converged = stalled;
  res.e0 = std::exp(x[pb.par(0)]);
  res.g0 = std::exp(x[pb.par(1)]);
  res.c1 = pb.finite ? 0.0 : std::exp(x[pb.par(2)]);

  // Cells for the linear fields; the edge mode extends the mesh into the
  // series region down to s_lin.
  std::vector<Cell> cells;
  auto add = [&](double t0, double t1, const Vec4& y0, const Vec4& y1) {
    Cell cl;
    cl.t0 = t0;
    cl.t1 = t1;
    cl.s0 = with_eg(t0, y0);
    cl.s1 = with_eg(t1, y1);
    fill_eg_midpoint(cl, k);
    cells.push_back(cl);
  };
  for (int i = 0; i < pb.nl; ++i) {
    add(pb.left[i], pb.left[i + 1], x.segment<4>(pb.yl(i)), x.segment<4>(pb.yl(i + 1)));
  }
  for (int j = 0; j < pb.nr; ++j) {
    add(pb.right[j], pb.right[j + 1], x.segment<4>(pb.yr(j)), x.segment<4>(pb.yr(j + 1)));
  }
  const EdgeExpansion edge =
      pb.finite ? EdgeExpansion{}
                : make_edge_expansion(1.0, res.c1, k, spec.g_choice, spec.edge_order);
  if (!pb.finite) {
    std::vector<double> ext{pb.right.back()};
    const double ratio = 0.8;
    for (double s = spec.s0 * ratio; s > spec.s_lin * 1.0001; s *= ratio) ext.push_back(1.0 - s);
    ext.push_back(1.0 - spec.s_lin);
    for (std::size_t i = 0; i + 1 < ext.size(); ++i) {
      Cell cl;
      cl.t0 = ext[i];
      cl.t1 = ext[i + 1];
      cl.s0 = i == 0 ? cells.back().s1 : edge_series_eval(cl.t0, edge, k);
      cl.s1 = edge_series_eval(cl.t1, edge, k);
      cl.sm = edge_series_eval(0.5 * (cl.t0 + cl.t1), edge, k);
      cl.s0.h_val = cl.s0.dh = cl.s0.r1_val = cl.s0.dr1 = cl.s0.r2_val = cl.s0.dr2 = 0.0;
      for (SimilarityState* st : {&cl.s1, &cl.sm}) {
        st->h_val = st->dh = st->r1_val = st->dr1 = st->r2_val = st->dr2 = 0.0;
      }
      cells.push_back(cl);
    }
    for (LinearTarget t : {LinearTarget::h, LinearTarget::r1, LinearTarget::r2}) {
      solve_linear_cells(cells, t, k, edge.p, 1.0);
    }
  }

  // Assemble the table: axis node, left ends of every cell, the last right
  // end, and the edge itself. The match node keeps its axis-side values.
  const CenterExpansion center = make_center_expansion(
      res.e0, res.g0, cells.front().s0.h_val, cells.front().s0.r1_val, cells.front().s0.r2_val, k);
  std::vector<SimilarityState> nodes;
  std::vector<SecondDerivs> d2;
  {
    SimilarityState s0 = center_series_eval(0.0, center, k);
    const double tl = cells.front().t0;
    for (LinearTarget t : {LinearTarget::h, LinearTarget::r1, LinearTarget::r2}) {
      if (pb.finite) continue;
      // Axis value consistent with the node at tau_min.
      const SimilarityState& b = cells.front().s0;
      const double v2a = linear_axis_v2(t, b, 0.0, k);
      const double v2b = linear_axis_v2(t, b, 1.0, k) - v2a;
      SimilarityState tmp = b;
      const double v0 = (field(tmp, t) - v2a * tl * tl) / (1.0 + v2b * tl * tl);
      field(s0, t) = v0;
      slope(s0, t) = 0.0;
    }
    SecondDerivs d;
    d.d2e = 2.0 * center.e2;
    d.d2g = 2.0 * center.g2;
    if (!pb.finite) {
      const SimilarityState& b = cells.front().s0;
      d.d2h = 2.0 * linear_axis_v2(LinearTarget::h, b, s0.h_val, k);
      d.d2r1 = 2.0 * linear_axis_v2(LinearTarget::r1, b, s0.r1_val, k);
      d.d2r2 = 2.0 * linear_axis_v2(LinearTarget::r2, b, s0.r2_val, k);
    }
    nodes.push_back(s0);
    d2.push_back(d);
  }
  const std::size_t n_left = static_cast<std::size_t>(pb.nl);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i == n_left) {
      nodes.push_back(cells[i - 1].s1);  // match node, axis side
    } else {
      nodes.push_back(cells[i].s0);
    }
    d2.push_back(ode_rhs(nodes.back(), k));
  }
  nodes.push_back(cells.back().s1);
  d2.push_back(ode_rhs(nodes.back(), k));
  if (pb.finite) {
    // The last node already sits at the right end.
  } else {
    SimilarityState e;
    e.tau = 1.0;
    nodes.push_back(e);
    d2.push_back(d2.back());
  }

  ProfileMeta meta;
  meta.alpha = k.alpha;
  meta.a = pb.a;
  meta.c1 = res.c1;
  meta.edge_p = edge.p;
  meta.e0 = res.e0;
  meta.g0 = res.g0;
  meta.h0 = nodes.front().h_val;
  meta.r10 = nodes.front().r1_val;
  meta.r20 = nodes.front().r2_val;
  double hmax = nodes.front().h_val;
  for (const auto& s : nodes) hmax = std::max(hmax, s.h_val);
  meta.h_max = hmax;
  meta.mismatch = res.objective;
  meta.iterations = res.iterations;
  meta.converged = res.objective <= ns.tolerance;
  meta.tau_match = spec.tau_match;
  res.unit = SolutionProfiles(std::move(nodes), std::move(d2), meta);
  const double hi = pb.finite ? 0.99 : 0.95;
  res.unit.meta().residual_norm = profile_residual_norm(res.unit, k, 10, 0.01, hi);
  res.unit.meta().residual_smooth = profile_residual_norm(res.unit, k, 10, 0.01, hi, spec.tau_match);
  res.profiles = spec.norm_e0 > 0.0 ? res.unit.rescaled(std::sqrt(spec.norm_e0 / res.e0)) : res.unit;
  return res;
}

double profile_distance(const std::function<SimilarityState(double)>& a,
                        const std::function<SimilarityState(double)>& b,
                        const std::vector<double>& taus) {
  std::array<double, 5> scale{}, diff{};
  for (double t : taus) {
    const SimilarityState x = a(t), y = b(t);
    const std::array<double, 5> vx{x.e_val, x.g_val, x.h_val, x.r1_val, x.r2_val};
    const std::array<double, 5> vy{y.e_val, y.g_val, y.h_val, y.r1_val, y.r2_val};
    for (int c = 0; c < 5; ++c) {
      scale[c] = std::max(scale[c], std::abs(vx[c]));
      diff[c] = std::max(diff[c], std::abs(vx[c] - vy[c]));
    }
  }
  double worst = 0.0;
  for (int c = 0; c < 5; ++c) {
    if (scale[c] > 0.0) worst = std::max(worst, diff[c] / scale[c]);
    else worst = std::max(worst, diff[c]);
  }
  return worst;
}

}  // namespace wakefar
