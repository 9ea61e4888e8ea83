#include "wakefar/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wakefar/errors.hpp"

namespace wakefar {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

bool all_finite(const Vec& v) { return v.allFinite(); }

Vec dense_eval(const Trajectory::Segment& s, double t) {
  const double th = (t - s.t0) / s.h;
  const double th1 = 1.0 - th;
  return s.c1 + th * (s.c2 + th1 * (s.c3 + th * (s.c4 + th1 * s.c5)));
}

}  // namespace

Vec Trajectory::operator()(double t) const {
  if (segments_.empty()) return y_end_;
  const bool forward = t_end_ >= t_begin_;
  // Segments are stored in integration order; nodes_ is monotone.
  auto it = forward
                ? std::upper_bound(nodes_.begin(), nodes_.end(), t)
                : std::upper_bound(nodes_.begin(), nodes_.end(), t,
                                   [](double a, double b) { return a > b; });
  std::size_t idx = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  idx = std::min(idx, segments_.size() - 1);
  return dense_eval(segments_[idx], t);
}

IntegrationResult DormandPrince::integrate(
    const RhsFn& f, double t0, double t1, const Vec& y0,
    const std::vector<EventFn>& events) const {
  IntegrationResult res;
  Trajectory& tr = res.trajectory;
  tr.t_begin_ = t0;
  tr.nodes_.push_back(t0);
  tr.values_.push_back(y0);

  const long n = y0.size();
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);

  Vec y = y0;
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n),
      err(n);

  auto eval = [&](double t, const Vec& yy, Vec& out) -> bool {
    ++res.rhs_evaluations;
    try {
      f(t, yy, out);
    } catch (const NonPositiveField&) {
      return false;
    } catch (const AxisSingularity&) {
      return false;
    }
    return all_finite(out);
  };

  if (!eval(t0, y, k1)) {
    throw NonPositiveField("initial state outside the admissible set");
  }

  auto err_norm = [&](const Vec& ya, const Vec& yb, const Vec& e) {
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
      const double sc = opts_.atol +
                        opts_.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      const double r = e[i] / sc;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
  };

  // Initial step (Hairer's heuristic).
  double h = opts_.initial_step;
  if (h <= 0.0) {
    const double d0 = err_norm(y, y, y);
    const double d1n = err_norm(y, y, k1);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, span);
    ytmp = y + dir * h0 * k1;
    double h1 = h0;
    if (eval(t0 + dir * h0, ytmp, k2)) {
      const double d2 = err_norm(y, y, k2 - k1) / h0;
      const double dm = std::max(d1n, d2);
      h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    }
    h = std::min(100.0 * h0, h1);
  }
  if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);
  h = std::min(h, span);

  std::vector<double> gprev;
  for (const auto& g : events) gprev.push_back(g(t0, y));

  double t = t0;
  double err_old = 1e-4;
  long steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++steps > opts_.max_steps) {
      throw StepUnderflow("maximum number of steps exceeded");
    }
    const double hmin = 1e-14 * std::max(std::abs(t), 1e-300);
    if (h < hmin) {
      std::ostringstream os;
      os << "step size underflow at t = " << t;
      throw StepUnderflow(os.str());
    }
    if (h > std::abs(t1 - t)) h = std::abs(t1 - t);
    const double hs = dir * h;

    bool ok = true;
    ytmp = y + hs * (a21 * k1);
    ok = ok && eval(t + c2 * hs, ytmp, k2);
    if (ok) { ytmp = y + hs * (a31 * k1 + a32 * k2); ok = eval(t + c3 * hs, ytmp, k3); }
    if (ok) { ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3); ok = eval(t + c4 * hs, ytmp, k4); }
    if (ok) {
      ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      ok = eval(t + c5 * hs, ytmp, k5);
    }
    if (ok) {
      ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      ok = eval(t + hs, ytmp, k6);
    }
    if (ok) {
      ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      ok = eval(t + hs, ynew, k7);
    }
    if (!ok) {
      ++res.rejected_steps;
      h *= 0.25;
      continue;
    }
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = err_norm(y, ynew, err);
    if (!(en <= 1.0)) {
      ++res.rejected_steps;
      const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
      h *= std::min(1.0, fac);
      continue;
    }

    Trajectory::Segment seg;
    seg.t0 = t;
    seg.h = hs;
    seg.c1 = y;
    seg.c2 = ynew - y;
    seg.c3 = hs * k1 - seg.c2;
    seg.c4 = seg.c2 - hs * k7 - seg.c3;
    seg.c5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    const double tnew = (std::abs(t1 - (t + hs)) <= 1e-15 * std::abs(t1)) ? t1 : t + hs;

    // Terminal events: locate the first sign change by bisection on the
    // continuous extension.
    std::optional<int> fired;
    double t_fire = tnew;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double gnew = events[i](tnew, ynew);
      if (gprev[i] > 0.0 && !(gnew > 0.0)) {
        double lo = t, hi = tnew;
        for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
          const double mid = 0.5 * (lo + hi);
          if (events[i](mid, dense_eval(seg, mid)) > 0.0) lo = mid; else hi = mid;
        }
        if (!fired || dir * (hi - t_fire) < 0.0) {
          fired = static_cast<int>(i);
          t_fire = hi;
        }
      }
      gprev[i] = gnew;
    }

    tr.segments_.push_back(seg);
    if (fired) {
      tr.nodes_.push_back(t_fire);
      const Vec yf = dense_eval(seg, t_fire);
      tr.values_.push_back(yf);
      tr.t_end_ = t_fire;
      tr.y_end_ = yf;
      res.event_index = fired;
      res.t_final = t_fire;
      return res;
    }

    t = tnew;
    y = ynew;
    k1 = k7;
    tr.nodes_.push_back(t);
    tr.values_.push_back(y);

    // PI step-size controller.
    const double en_c = std::max(en, 1e-10);
    double fac = 0.9 * std::pow(en_c, -0.7 / 5.0) * std::pow(err_old, 0.4 / 5.0);
    fac = std::clamp(fac, 0.2, 5.0);
    err_old = std::max(en, 1e-4);
    h *= fac;
    if (opts_.max_step > 0.0) h = std::min(h, opts_.max_step);
  }
  tr.t_end_ = t;
  tr.y_end_ = y;
  res.t_final = t;
  return res;
}

}  // namespace wakefar
