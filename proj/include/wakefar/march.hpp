#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "wakefar/model.hpp"
#include "wakefar/profiles.hpp"

namespace wakefar {

/// Uniform node mesh on [-ly, ly] x [-lz, lz], boundary nodes included.
struct MarchMesh {
  int ny = 129, nz = 129;
  double ly = 1.0, lz = 1.0;

  double dy() const { return 2.0 * ly / (ny - 1); }
  double dz() const { return 2.0 * lz / (nz - 1); }
  double y(int i) const { return -ly + i * dy(); }
  double z(int j) const { return -lz + j * dz(); }
  std::size_t size() const { return static_cast<std::size_t>(ny) * nz; }
  void validate() const;
};

/// The four physical fields at one station. Node (i, j) sits at (y_i, z_j)
/// and is stored at j * ny + i.
struct MarchState {
  double x = 1.0;
  MarchMesh mesh;
  std::vector<double> e, eps, rho1, rho2;

  std::size_t at(int i, int j) const { return static_cast<std::size_t>(j) * mesh.ny + i; }
  void resize();
  /// Bilinear value of a field at (0, 0).
  double axis(const std::vector<double>& f) const;
};

/// How the node diffusivities e^2/eps are combined on a cell face. Any
/// choice keeps the rho1 = z identity exact since drift and diffusion use
/// the same face values. The harmonic mean is (numerically) zero next to a
/// floored node, which pins a degenerate front in place; the arithmetic
/// mean lets it spread.
enum class FaceAverage { arithmetic, harmonic };

struct MarchConfig {
  double x0 = 1.0, x1 = 10.0;
  double sigma = 0.9;         // safety factor of the diffusive step bound
  double e_floor = 1e-12;     // relative to max(e)
  double eps_floor = 1e-12;   // relative to max(eps)
  int records_per_decade = 40;
  int snapshots = 5;          // log-spaced stations written out, ends included
  double slope_window = 2.0;  // trailing window x/w..x of the axis slopes
  FaceAverage face = FaceAverage::arithmetic;

  void validate() const;
};

/// Advances a state by one explicit step. Kept behind an interface so an
/// implicit variant can be swapped in.
class Stepper {
 public:
  virtual ~Stepper() = default;
  /// Largest step the scheme accepts for this state.
  virtual double stable_step(const MarchState& s, const ModelConstants& k,
                             const MarchConfig& cfg) const = 0;
  /// One step of size dx (0 < dx <= stable_step).
  virtual MarchState advance(const MarchState& s, double dx, const ModelConstants& k,
                             const MarchConfig& cfg) const = 0;
};

class ExplicitStepper : public Stepper {
 public:
  explicit ExplicitStepper(int threads = 0) : threads_(threads) {}
  double stable_step(const MarchState& s, const ModelConstants& k,
                     const MarchConfig& cfg) const override;
  MarchState advance(const MarchState& s, double dx, const ModelConstants& k,
                     const MarchConfig& cfg) const override;

 private:
  int threads_;
};

/// Smallest half-width that holds the wake up to x1: 1.5 a x1^alpha.
double required_half_width(double a, double x1, double alpha);

/// Samples the lift at x0 on the mesh, zero outside the support, then
/// floors and boundary values. MeshTooSmall unless both half-widths reach
/// required_half_width(a, cfg.x1, alpha).
MarchState init_from_similarity(const ProfileSource& profiles, double x0, const MarchMesh& mesh,
                                const ModelConstants& k, const MarchConfig& cfg);

/// Non-similar start: Gaussian bumps with the axial values and width of the
/// similarity lift at x0 (rho1 = z H0 exp(-r^2/w^2), rho2 = R2(0) x0^{2a} exp).
MarchState init_gaussian(const ProfileSource& profiles, double x0, const MarchMesh& mesh,
                         const ModelConstants& k, const MarchConfig& cfg);

/// Floors relative to the maxima, zero-Dirichlet edges. Throws
/// NonPositiveField on non-finite values or a non-positive maximum.
void apply_floors(MarchState& s, const MarchConfig& cfg);

/// One step of the default explicit scheme, of size min(stable step, dx_cap).
/// StepUnderflow if that is below 1e-14 x.
MarchState march_step(const MarchState& s, const ModelConstants& k, const MarchConfig& cfg,
                      double dx_cap = 0.0);

struct AxisRecord {
  double x = 0.0;
  double e0 = 0.0, eps0 = 0.0, rho2_0 = 0.0;
  double slope_e = 0.0, slope_eps = 0.0;
};

struct DecayDiagnostics {
  std::vector<AxisRecord> axis;
  std::vector<double> snapshot_x;
  std::vector<double> collapse;  // collapse[i] compares snapshot i and i+1
};

/// Least-squares slope of ln y against ln x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct DecayFit {
  double slope_e = 0.0, slope_eps = 0.0;
  double x_lo = 0.0, x_hi = 0.0;
  int points = 0;
};

/// Slopes over records with x in [x_lo, x_hi]; WindowTooShort unless the
/// records used span at least a decade.
DecayFit fit_decay_exponents(const std::vector<AxisRecord>& axis, double x_lo, double x_hi);

/// Radial profile of e along z = 0, y >= 0, as (y / x^alpha, e / e_axis).
std::pair<std::vector<double>, std::vector<double>> normalized_profile(const MarchState& s,
                                                                       double alpha);

/// Sup-norm distance between consecutive normalized profiles, compared by
/// cubic interpolation on a common abscissa. Needs at least two states.
std::vector<double> profile_collapse_error(const std::vector<MarchState>& states,
                                           const ModelConstants& k);

struct MarchResult {
  DecayDiagnostics diagnostics;
  std::vector<MarchState> snapshots;
  long steps = 0;
};

/// Marches from `start` (at cfg.x0) to cfg.x1. `on_snapshot` sees each
/// snapshot as it is produced.
MarchResult run_march(MarchState start, const ModelConstants& k, const MarchConfig& cfg,
                      const Stepper& stepper,
                      const std::function<void(const MarchState&)>& on_snapshot = {});

}  // namespace wakefar
