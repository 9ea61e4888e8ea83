#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wakefar/march.hpp"
#include "wakefar/profiles.hpp"

namespace wakefar {

/// 17 significant digits, scientific, independent of the locale.
std::string format_number(double v);
/// Inverse of format_number (also accepts any plain decimal). Throws
/// std::invalid_argument on trailing garbage.
double parse_number(std::string_view s);

inline constexpr const char* kProfileHeader = "tau,E,G,H,R1,R2,dE,dG,dH,dR1,dR2";

/// Profiles at their nodes. Throws DegenerateSeries (no file created) on
/// empty profiles and IoError with the path on write failures.
void export_profiles(const SolutionProfiles& p, const std::filesystem::path& path);

/// Rows of a profile CSV in the same column order.
std::vector<SimilarityState> read_profiles(const std::filesystem::path& path);

/// Writes text atomically enough for our purposes: to a temporary sibling,
/// then renamed over the target.
void write_text(const std::filesystem::path& path, const std::string& text);

std::string axis_csv(const DecayDiagnostics& d);
std::string snapshot_csv(const MarchState& s);
/// Reads an axis CSV written by axis_csv.
std::vector<AxisRecord> read_axis(const std::filesystem::path& path);

struct ExperimentPoint {
  double x_over_d = 0.0;
  double value = 0.0;
};

struct ExperimentSeries {
  std::string name;
  std::vector<ExperimentPoint> points;
  std::string provenance;
};

/// CSV with header `x_over_D,value`; `#` lines are comments and the
/// provenance note is taken from them. ParseError carries the line number;
/// MonotonicityError if x/D is not strictly increasing.
ExperimentSeries load_experiment(const std::filesystem::path& path);

struct ExperimentDeviation {
  double x_over_d = 0.0, measured = 0.0, computed = 0.0, relative = 0.0;
};

/// Relative deviation of the experiment from a computed decay curve
/// (log-log interpolation); points outside the computed range are dropped.
std::vector<ExperimentDeviation> compare_experiment(const ExperimentSeries& exp,
                                                    const std::vector<double>& x,
                                                    const std::vector<double>& value);

}  // namespace wakefar
