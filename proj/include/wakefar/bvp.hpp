#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wakefar/edge.hpp"
#include "wakefar/integrator.hpp"
#include "wakefar/model.hpp"
#include "wakefar/profiles.hpp"

namespace wakefar {

struct NewtonSettings {
  int max_iterations = 60;
  int max_halvings = 40;
  double fd_step = 1e-7;      // relative step of the finite-difference Jacobian
  double tolerance = 1e-8;    // mismatch norm accepted as converged
  double stall = 1e-12;       // relative decrease below which the floor is declared
};

/// Two-sided shooting set-up. Radii are fractions of the edge radius a,
/// which is pinned to 1 during the solve.
struct ShootingSpec {
  double alpha = 0.23;
  double tau_match = 0.5;
  double s0 = 1e-3;        // edge offset where the inward run starts
  double tau_min = 1e-6;   // axis offset where the outward run starts
  double s_lin = 1e-7;     // edge offset where the linear solves start
  double linear_match = 0.99;  // match point of the linear solves
  double rtol = 1e-10;
  double atol = 1e-12;
  NewtonSettings newton;
  double e0_guess = 0.7, g0_guess = 0.8, c1_guess = 3.1;
  GCoefficient g_choice = GCoefficient::balanced;
  SeriesOrder edge_order = SeriesOrder::first_correction;
  /// E(0) after the I3 rescaling; <= 0 keeps a = 1.
  double norm_e0 = 1.0;
  /// Finite-interval mode: the edge is replaced by this state at
  /// right->tau, and only (e0, g0) are unknown.
  std::optional<SimilarityState> right;
  /// Profile grid spacing cap (fraction of a).
  double max_spacing = 5e-3;

  void validate() const;
  IntegratorOptions integrator() const;
};

/// Mismatch at the match point in scale-free variables
/// (ln E, tau E'/E, ln G, tau G'/G), axis side minus edge side.
struct MatchReport {
  std::array<double, 4> mismatch{};
  double norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> history;  // norm after every accepted Newton step
  std::string status;           // "converged" or "least-squares floor"
};

/// The (E, G) part of a shooting solution with a = 1 (or finite interval).
struct EgSolution {
  ModelConstants k;
  ShootingSpec spec;
  EdgeExpansion edge;
  CenterExpansion center;
  Trajectory axis_side;  // tau_min -> tau_match
  Trajectory edge_side;  // a - s0 -> tau_match (or right -> tau_match)
  MatchReport report;
  double a = 1.0;

  /// Composite (E, E', G, G') with center series, the two trajectories and
  /// the edge series; zero outside [0, a].
  SimilarityState eval(double tau) const;
  double e0() const { return center.e0; }
  double g0() const { return center.g0; }
  double c1() const { return edge.c1; }
};

/// Integrates the packed system from `from` to `to`. E -> 0 or G -> 0 stops
/// the run with BlowupOrExtinction.
Trajectory integrate_profiles(double from, double to, const SimilarityState& initial,
                              const ModelConstants& k, const IntegratorOptions& tol,
                              int dim = 10, SinkForm form = SinkForm::corrected);

/// Damped least-squares Newton on the four-component mismatch. Throws
/// NoConvergence only when no admissible starting point exists; a
/// least-squares floor is reported through `report.converged == false`.
EgSolution shoot_eg(const ShootingSpec& spec, const ModelConstants& k);

enum class LinearTarget { h, r1, r2 };

/// One of the linear equations with its coefficients taken from a
/// background: E, G and the lower profiles it depends on.
struct LinearBvpSpec {
  LinearTarget target = LinearTarget::h;
  ModelConstants k;
  /// Background state at tau (fields of the target itself are ignored).
  std::function<SimilarityState(double)> background;
  double a = 1.0;
  double tau_min = 1e-6;
  double tau_match = 0.99;
  double s_lin = 1e-7;
  double edge_p = 10.0 / 7.0;  // E exponent at the edge
  double forcing_scale = 1.0;  // multiplies the inhomogeneous term
  double edge_value = 0.0;     // target value at tau = a
  IntegratorOptions tol{1e-11, 1e-14};
};

/// Axis value `v0`, edge amplitude of the regular homogeneous branch and
/// the two trajectories (packed [y, y']).
struct LinearProfile {
  LinearTarget target = LinearTarget::h;
  double v0 = 0.0;
  double edge_amplitude = 0.0;
  double edge_exponent = 0.0;
  double v2 = 0.0;  // quadratic axis coefficient
  double tau_min = 0.0, tau_match = 0.0, edge_start = 0.0, a = 1.0;
  double edge_value = 0.0, edge_slope = 0.0;
  Trajectory axis_side, edge_side;

  /// (value, derivative) at tau in [0, a].
  std::array<double, 2> eval(double tau) const;
};

LinearProfile solve_linear_profile(const LinearBvpSpec& spec);

/// Full pipeline: shoot (E, G), then H, R1, R2 in dependency order, sample
/// on a grid and apply the normalization.
struct FullSolution {
  EgSolution eg;
  LinearProfile h, r1, r2;
  SolutionProfiles profiles;  // normalized
  SolutionProfiles unit;      // a = 1

  /// Exact composite state (a = 1) straight from the trajectories.
  SimilarityState eval(double tau) const;
};

FullSolution solve_profiles(const ShootingSpec& spec, const ModelConstants& k);

/// Maximum relative ODE residual of the interpolated profiles on a grid
/// `refine` times finer than the stored one, restricted to
/// [lo * a, hi * a]. A cell with t0 <= skip < t1 is left out.
double profile_residual_norm(const SolutionProfiles& p, const ModelConstants& k,
                             int refine = 10, double lo = 0.01, double hi = 0.95,
                             double skip = -1.0);

struct CollocationSpec {
  double alpha = 0.23;
  int intervals = 400;     // per side of the match point
  double tau_match = 0.5;
  double tau_min = 1e-4;   // left end (center series data)
  double s0 = 1e-3;        // right end offset of the (E, G) mesh (edge series data)
  double s_lin = 1e-7;     // right end offset of the linear meshes
  double grading = 3.0;    // mesh clustering toward the edge
  NewtonSettings newton{80, 40, 1e-7, 1e-9, 1e-12};
  double e0_guess = 0.7, g0_guess = 0.8, c1_guess = 3.1;
  GCoefficient g_choice = GCoefficient::balanced;
  SeriesOrder edge_order = SeriesOrder::first_correction;
  std::optional<SimilarityState> right;  // finite-interval mode
  double norm_e0 = 1.0;

  void validate() const;
};

struct CollocationResult {
  SolutionProfiles profiles;  // normalized like solve_profiles
  SolutionProfiles unit;
  double objective = 0.0;     // jump norm at the match point
  double constraint = 0.0;    // max collocation defect
  int iterations = 0;
  bool converged = false;     // defects resolved and the step stalled
  double e0 = 0.0, g0 = 0.0, c1 = 0.0;
};

/// Hermite-Simpson collocation of the full five-equation system with series
/// data at both ends. (E, G) are discretized separately on each side of the
/// match point and the same scale-free jump as in shoot_eg is minimized
/// subject to the collocation equations (Gauss-Newton on the KKT system).
/// H, R1, R2 follow from one sparse linear solve each on a single mesh.
/// Used as an independent cross-check of the shooting.
CollocationResult collocation_oracle(const CollocationSpec& spec, const ModelConstants& k);

/// Relative sup-norm difference of the five profile values, max over fields
/// of max|a - b| / max|a| on the given radii.
double profile_distance(const std::function<SimilarityState(double)>& a,
                        const std::function<SimilarityState(double)>& b,
                        const std::vector<double>& taus);

/// Near-edge data shared by the linear solvers: exponent of the regular
/// homogeneous branch and the particular branch value - slope * s.
struct LinearEdgeBranch {
  double gamma = 0.0;
  double value = 0.0;
  double slope = 0.0;  // d/dtau at the edge
};
LinearEdgeBranch linear_edge_branch(LinearTarget t, const ModelConstants& k, double edge_p,
                                    double a, double forcing_scale, double edge_value);

/// Quadratic axis coefficient of a linear field with axis value v0 on the
/// background state at tau (tau small).
double linear_axis_v2(LinearTarget t, SimilarityState background, double v0,
                      const ModelConstants& k, double forcing_scale = 1.0);

/// Diagnostic sweep of the least-squares mismatch floor over alpha.
struct AlphaScanPoint {
  double alpha = 0.0;
  double floor = 0.0;
  double e0 = 0.0, g0 = 0.0, c1 = 0.0;
  bool converged = false;
  std::string note;
};

std::vector<AlphaScanPoint> scan_alpha(double lo, double hi, int n,
                                       const ShootingSpec& base,
                                       const ModelConstants& k, int threads = 0);

/// Worker count from WAKEFAR_THREADS (0 or unset = hardware concurrency).
int worker_count();

}  // namespace wakefar
