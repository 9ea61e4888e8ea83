#pragma once

#include <array>

namespace wakefar {

/// Empirical closure constants of the diffusion-approximation wake model and
/// the similarity exponent. `c_eps()` is derived from `c_e / delta` on every
/// call so the two can never disagree.
struct ModelConstants {
  double c_e = 0.136;
  double delta = 1.3;
  double c_eps2 = 1.92;
  double c_rho = 0.208;
  double c_1rho = 0.087;
  double c_t = 1.25;
  double u0 = 1.0;
  double alpha = 0.23;

  double c_eps() const noexcept { return c_e / delta; }

  /// Throws BadConstants if any constant is non-positive or one of the edge
  /// series denominators (7 c_rho - 10 c_e, 5 c_e - 7 c_1rho, 2 - delta)
  /// vanishes.
  void validate() const;
};

/// The constant-in-tau exact solution exists only for this exponent (with the
/// default constants): alpha = 21/46, G = 2 (1 - alpha) E.
ModelConstants constant_solution_constants();

/// Values and first tau-derivatives of the five similarity profiles at one
/// radius.
struct SimilarityState {
  double tau = 0.0;
  double e_val = 0.0, g_val = 0.0, h_val = 0.0, r1_val = 0.0, r2_val = 0.0;
  double de = 0.0, dg = 0.0, dh = 0.0, dr1 = 0.0, dr2 = 0.0;
};

/// Second tau-derivatives (E'', G'', H'', R1'', R2'').
struct SecondDerivs {
  double d2e = 0.0, d2g = 0.0, d2h = 0.0, d2r1 = 0.0, d2r2 = 0.0;
};

using Residual5 = std::array<double, 5>;
using Residual4 = std::array<double, 4>;

/// Sink terms of the two density-variance equations. `corrected` (default)
/// uses the forms obtained by substituting the lift into the marching
/// equation: tau G^2 / E^3 in the R1 bracket and C_T G/E in the polar R
/// equation. `as_printed` keeps tau G / E^3 and C_T E/G for comparison.
enum class SinkForm { corrected, as_printed };

/// Solves each similarity ODE for its highest derivative.
/// Throws AxisSingularity at tau == 0 and NonPositiveField if E or G <= 0.
SecondDerivs ode_rhs(const SimilarityState& s, const ModelConstants& k,
                     SinkForm form = SinkForm::corrected);

/// Left-hand sides of the five similarity ODEs, in written form.
Residual5 ode_residual(const SimilarityState& s, const SecondDerivs& d2,
                       const ModelConstants& k,
                       SinkForm form = SinkForm::corrected);

/// Same residuals multiplied through by G/E^2 (all diffusion coefficients
/// become unity). Useful to compare magnitudes near the degenerate edge.
Residual5 ode_residual_balanced(const SimilarityState& s,
                                const SecondDerivs& d2,
                                const ModelConstants& k,
                                SinkForm form = SinkForm::corrected);

/// Radial profiles E(r), G(r) and the angular fields H(r, phi), R(r, phi)
/// with the derivatives needed by the reduced polar equations.
struct ReducedFields {
  double e = 0.0, de = 0.0;
  double g = 0.0, dg = 0.0;
  double h = 0.0, h_r = 0.0, h_rr = 0.0, h_phi = 0.0, h_phiphi = 0.0;
  double rv = 0.0, r_r = 0.0, r_rr = 0.0, r_phiphi = 0.0;
};

/// Left-hand sides of the four reduced polar equations (energy,
/// dissipation, density defect, density variance). The energy and
/// dissipation equations also need E'' and G''.
Residual4 reduced_pde_residual(double r, double phi, const ReducedFields& f,
                               double d2e, double d2g, const ModelConstants& k,
                               SinkForm form = SinkForm::corrected);

/// Value and the derivatives of one physical field that appear in the
/// marching model: d/dx, d/dy, d/dz, d2/dy2, d2/dz2.
struct FieldJet {
  double value = 0.0;
  double dx = 0.0, dy = 0.0, dz = 0.0;
  double dyy = 0.0, dzz = 0.0;
};

/// A point of the physical (x, y, z) domain with jets of the turbulent
/// energy, dissipation, mean density defect and density variance.
struct PhysicalPoint {
  double x = 1.0, y = 0.0, z = 0.0;
  FieldJet e, eps, rho1, rho2;
  bool in_support = true;
};

/// (lhs - rhs) of the four marching equations at one point. NonPositiveField
/// if eps <= 0.
Residual4 full_pde_residual(const PhysicalPoint& p, const ModelConstants& k);

}  // namespace wakefar
