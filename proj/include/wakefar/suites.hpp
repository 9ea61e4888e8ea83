#pragma once

#include <string>
#include <vector>

#include "wakefar/ansatz.hpp"

namespace wakefar {

/// One line of a verification report. `value` is the measured quantity,
/// `threshold` the bound it is compared against (see `detail`).
struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

/// Runs one of: ansatz, bde, riccati, collapse, all. ConfigError otherwise.
std::vector<CheckResult> run_suite(const std::string& suite);

std::vector<CheckResult> ansatz_suite();
std::vector<CheckResult> bde_suite();
std::vector<CheckResult> riccati_suite();
std::vector<CheckResult> collapse_suite();

/// suite,check,value,threshold,pass,detail
std::string report_csv(const std::vector<CheckResult>& rows);

/// Smooth positive non-solution profiles on [0, 1] used by the collapse
/// checks.
AnalyticProfiles smooth_test_profiles();

/// A field H3(r) cos(p) solving the H equation with C = 0 (so its
/// constraint h = -H3 sec(p) is nonzero), sampled on n_r radii in [1, 2].
/// Returns the field and fills `co` with the matching A, B.
PolarField cos_mode_field(int n_r, int n_phi, AnsatzCoefficients& co);

/// Same for R3(r) cos(4p) and the R equation (K, L filled).
PolarField cos4_mode_field(int n_r, int n_phi, AnsatzCoefficients& co);

/// Least-squares order of the residual against the radial spacing for the
/// given radial node counts.
struct RefinementStudy {
  std::vector<int> n_r;
  std::vector<double> residual;
  double order = 0.0;
};
RefinementStudy bde_refinement(BdeKind kind, const std::vector<int>& n_r, int n_phi = 32,
                               double b2_shift = 0.0);

}  // namespace wakefar
