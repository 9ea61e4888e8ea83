#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

namespace wakefar {

using Vec = Eigen::VectorXd;

/// dy/dt = f(t, y). Implementations may throw NonPositiveField when a stage
/// leaves the admissible set; the integrator treats that as a step rejection.
using RhsFn = std::function<void(double t, const Vec& y, Vec& dydt)>;

/// Terminal event: integration stops at the first root of g(t, y) after a
/// sign change from positive to non-positive.
using EventFn = std::function<double(double t, const Vec& y)>;

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 = automatic
  double max_step = 0.0;      // 0 = unbounded
  long max_steps = 2'000'000;
};

/// Accepted steps of a Dormand-Prince 5(4) run with the fourth-order
/// continuous extension, so the solution can be evaluated anywhere inside
/// [front(), back()] (or [back(), front()] for a backward run).
class Trajectory {
 public:
  struct Segment {
    double t0, h;
    Vec c1, c2, c3, c4, c5;
  };

  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  const Vec& y_end() const { return y_end_; }
  std::size_t steps() const { return segments_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<Vec>& node_values() const { return values_; }

  /// Dense-output evaluation; t must lie inside the integrated span.
  Vec operator()(double t) const;

 private:
  friend class DormandPrince;
  std::vector<Segment> segments_;
  std::vector<double> nodes_;
  std::vector<Vec> values_;
  double t_begin_ = 0.0, t_end_ = 0.0;
  Vec y_end_;
};

struct IntegrationResult {
  Trajectory trajectory;
  std::optional<int> event_index;  // set if a terminal event fired
  double t_final = 0.0;
  long rejected_steps = 0;
  long rhs_evaluations = 0;
};

class DormandPrince {
 public:
  explicit DormandPrince(IntegratorOptions opts = {}) : opts_(opts) {}

  /// Integrates from t0 to t1 (either direction). Throws StepUnderflow when
  /// the step collapses below 1e-14 |t|; events stop the run early without
  /// throwing.
  IntegrationResult integrate(const RhsFn& f, double t0, double t1,
                              const Vec& y0,
                              const std::vector<EventFn>& events = {}) const;

 private:
  IntegratorOptions opts_;
};

}  // namespace wakefar
