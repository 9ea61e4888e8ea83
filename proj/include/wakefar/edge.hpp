#pragma once

#include <vector>

#include "wakefar/integrator.hpp"
#include "wakefar/model.hpp"

namespace wakefar {

/// Which coefficient multiplies the leading G term at the wake edge.
/// `balanced` comes from the leading-order balance of the E and G equations,
/// g1 = c_e p c1^2 / (alpha a). `as_printed` is 30 c_e c1^2 / (7 a), which
/// coincides with `balanced` only at alpha = 1/3.
enum class GCoefficient { balanced, as_printed };

/// `leading` keeps only c1 s^p and g1 s^q; `first_correction` multiplies both
/// by (1 + c s) with the O(s) coefficients from the next balance.
enum class SeriesOrder { leading, first_correction };

/// Series near the degenerate edge tau = a, written in s = a - tau >= 0:
///   E  = c1 s^p (1 + e_corr s),   G = g1 s^q (1 + g_corr s),
///   H  = -h_slope s,              R1 = r1_coef s^2,   R2 = r2_coef s^2,
/// with p = 1/(2 - delta), q = 2p - 1.
struct EdgeExpansion {
  double a = 1.0;
  double c1 = 1.0;
  double p = 0.0, q = 0.0;
  double g1 = 0.0;
  double g1_balanced = 0.0, g1_printed = 0.0;
  double e_corr = 0.0, g_corr = 0.0;
  double h_slope = 0.0;  // dH/dtau at tau = a
  double r1_coef = 0.0, r2_coef = 0.0;
  double r1_printed = 0.0, r2_printed = 0.0;
  double window = 0.05;  // validity window, as a fraction of a
  GCoefficient g_choice = GCoefficient::balanced;
  SeriesOrder order = SeriesOrder::leading;
};

EdgeExpansion make_edge_expansion(double a, double c1, const ModelConstants& k,
                                  GCoefficient g_choice = GCoefficient::balanced,
                                  SeriesOrder order = SeriesOrder::leading);

/// Throws OutsideWindow unless 0 < a - tau <= window * a.
SimilarityState edge_series_eval(double tau, const EdgeExpansion& ex,
                                 const ModelConstants& k);
SecondDerivs edge_series_d2(double tau, const EdgeExpansion& ex);

/// Even series about the axis: f(tau) = f0 + f2 tau^2 for all five
/// profiles, with the quadratic coefficients fixed by the O(1) balance of
/// each ODE at tau = 0.
struct CenterExpansion {
  double e0 = 1.0, g0 = 1.0, h0 = 0.0, r10 = 0.0, r20 = 0.0;
  double e2 = 0.0, g2 = 0.0, h2c = 0.0, r12 = 0.0, r22 = 0.0;
  double window = 0.05;
};

CenterExpansion make_center_expansion(double e0, double g0, double h0,
                                      double r10, double r20,
                                      const ModelConstants& k,
                                      SinkForm form = SinkForm::corrected);

/// Throws OutsideWindow unless 0 <= tau <= window.
SimilarityState center_series_eval(double tau, const CenterExpansion& c,
                                   const ModelConstants& k);

/// Least-squares slope of ln(rel. residual) against ln(a - tau) for each
/// ODE, where the relative residual is |residual| / (largest single term).
struct ResidualOrderReport {
  std::vector<double> s_values;
  std::vector<Residual5> relative_residual;
  Residual5 fitted_order{};
};

ResidualOrderReport series_residual_order(const EdgeExpansion& ex,
                                          const ModelConstants& k,
                                          const std::vector<double>& taus);

/// Magnitude of the largest individual term of each ODE (the scale that a
/// residual is compared against).
Residual5 ode_term_scale(const SimilarityState& s, const SecondDerivs& d2,
                         const ModelConstants& k);

struct ProbeOptions {
  double s0_rel = 1e-3;     // start offset (a - tau) / a
  double shrink = 1e-2;     // integrate toward the edge until s = shrink * s0
  double delta = 1e-8;      // relative perturbation amplitude
  double threshold = 10.0;  // amplification below which a direction is regular
  bool eg_only = false;     // probe the (E, G) subsystem only
  IntegratorOptions integrator{1e-12, 1e-30};
};

struct ProbeReport {
  int dimension = 0;       // 4 or 10
  int regular_count = 0;   // number of non-amplifying directions
  std::vector<double> amplification;          // singular values, ascending
  std::vector<double> coordinate_amplification;  // per unit direction
};

/// Frobenius-style numerical probe of the solution manifold at the edge:
/// propagates perturbations of the series state from s0 toward the edge and
/// counts the independent directions that are not amplified (relative to the
/// base solution). Throws IntegrationFailure if the base run fails.
ProbeReport edge_manifold_probe(const EdgeExpansion& ex, const ModelConstants& k,
                                const ProbeOptions& opts = {});

/// Base or perturbed probe trajectory (state at the end of the probe run).
Vec edge_probe_endpoint(const EdgeExpansion& ex, const ModelConstants& k,
                        const ProbeOptions& opts, const Vec& perturbation);

}  // namespace wakefar
