#pragma once

#include <array>
#include <functional>
#include <vector>

#include "wakefar/model.hpp"
#include "wakefar/profiles.hpp"

namespace wakefar {

/// Radial function returning (f, f', f'') at r.
using RadialFn = std::function<std::array<double, 3>(double)>;
/// Scalar coefficient function of r.
using CoefFn = std::function<double(double)>;

/// Coefficients of the two generic angular equations
///   H_pp + r^2 H_rr + A H_r + B H + C sin(p) = 0
///   R_pp + r^2 R_rr + K R_r + L R + M sin^2(p) + N sin(p) + P = 0
/// Unset functions are treated as zero.
struct AnsatzCoefficients {
  CoefFn A, B, C;
  CoefFn K, L, M, N, P;
};

/// Derivatives of a field of (r, phi) at one point.
struct PolarJet {
  double v = 0.0, r = 0.0, rr = 0.0, p = 0.0, pp = 0.0;
};

double sin_equation_residual(const AnsatzCoefficients& co, double r, double phi,
                             const PolarJet& h);
double sin2_equation_residual(const AnsatzCoefficients& co, double r, double phi,
                              const PolarJet& rj);

/// Result of a split check on an (r, phi) grid.
struct SplitReport {
  std::vector<double> r;
  std::vector<double> s1, s0;  // residuals of the two radial equations
  double max_full = 0.0;       // max |full residual| over the grid
  double max_identity = 0.0;   // max |full - (angular factor * s1 + s0)|
};

/// H = H1 sin(p) + H2. Radial equations:
///   S1 = r^2 H1'' + A H1' + (B - 1) H1 + C,   S0 = r^2 H2'' + A H2' + B H2.
SplitReport split_sin_ansatz(const AnsatzCoefficients& co, const RadialFn& h1,
                             const RadialFn& h2, const std::vector<double>& r_grid,
                             int n_phi = 64);

/// R = R1 sin^2(p) + R2. Since (sin^2)'' = 2 - 4 sin^2 the radial equations are
///   T1 = r^2 R1'' + K R1' + (L - 4) R1 + M,
///   T0 = r^2 R2'' + K R2' + L R2 + 2 R1 + P.
/// Throws NonzeroN unless N vanishes on the grid.
SplitReport split_sin2_ansatz(const AnsatzCoefficients& co, const RadialFn& r1,
                              const RadialFn& r2, const std::vector<double>& r_grid,
                              int n_phi = 64);

/// h2' - h2^2 - 2 cot(p) h2 + 2 (1 - h4) with h2 given as (value, derivative).
double riccati_check(const std::function<std::array<double, 2>(double)>& h2, double h4,
                     double phi);

enum class BdeKind {
  sin_constraint,   // h = H_pp + H_p tan(p),       b2 = B - 2 sec^2(p)
  sin2_constraint,  // h = R_pp - 2 R_p cot(2p),    b2 = L - 8 / sin^2(2p)
};

/// Field sampled on a uniform radial grid times a periodic angular grid
/// p_j = 2 pi j / n_phi; values[i][j] at (r[i], p_j).
struct PolarField {
  std::vector<double> r;
  int n_phi = 0;
  std::vector<std::vector<double>> values;
};

struct BdeReport {
  double max_residual = 0.0;  // away from the poles and the radial ends
  double max_h = 0.0;         // size of the constraint itself
  int points = 0;
};

/// Evaluates D_p^2 h + r^2 D_r^2 h + b1 D_r h + b2 h on the grid. Angular
/// derivatives are spectral; the total angular derivatives of h are expanded
/// so only derivatives of the field itself are differentiated spectrally.
/// Radial derivatives use fourth-order central differences. Angles closer
/// than `margin` to a pole of the constraint are skipped; `b2_shift` is
/// added to b2 (negative control).
BdeReport bde_residual_check(const PolarField& field, const AnsatzCoefficients& co,
                             BdeKind kind, double margin = 0.1, double b2_shift = 0.0);

/// Throws PoleProximity if p lies within `margin` of a pole of the
/// constraint of the given kind.
void require_off_pole(double phi, BdeKind kind, double margin = 0.1);

/// Angular dependence used for the density defect when lifting profiles:
/// z H (the reduction) or y H (negative control).
enum class AngularForm { sin, cos };

struct CollapseSample {
  double x = 0.0, tau = 0.0;
  std::array<double, 4> ratio{};  // one per physical equation
};

struct CollapseReport {
  std::vector<CollapseSample> samples;
  int skipped = 0;                // points with a vanishing denominator
  double max_deviation = 0.0;     // max |ratio - 1|
  double max_x_spread = 0.0;      // max over tau and equation of the spread in x
};

/// Lifts the profiles at (x, tau cos(theta) x^alpha, tau sin(theta) x^alpha)
/// and divides each full residual by the matching similarity residual times
/// its power of x:
///   eq 1: -c_e     x^{2a-3} res_E
///   eq 2: -c_eps   x^{2a-4} res_G
///   eq 3: -c_rho   x^{-1} z res_H
///   eq 4: -c_1rho  x^{2a-1} (eta^2 res_R1 + res_R2),  eta = z / x^a
/// A ratio of 1 independent of x is the numerical statement that the lift
/// reduces the marching model to the similarity ODEs.
CollapseReport reduction_collapse_check(const ProfileSource& profiles, const ModelConstants& k,
                                        const std::vector<double>& xs,
                                        const std::vector<double>& taus, double theta = 0.7,
                                        AngularForm form = AngularForm::sin);

/// Reduced polar fields of a similarity solution: E, G radial,
/// H(r, p) = r sin(p) H(r), R(r, p) = r^2 sin^2(p) R1(r) + R2(r).
ReducedFields reduced_fields(const ProfileSource& profiles, double r, double phi);

/// Coefficients A, B, C of the angular H equation obtained by dividing the
/// reduced density-defect equation by c_rho E^2 / (G r^2).
AnsatzCoefficients reduced_coefficients(const ProfileSource& profiles, const ModelConstants& k);

}  // namespace wakefar
