#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wakefar/io.hpp"
#include "wakefar/march.hpp"
#include "wakefar/profiles.hpp"

namespace wakefar {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool markers = false;  // points instead of a polyline
};

struct LinePlot {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<Series> series;
  std::string annotation;  // drawn in the upper right corner
};

/// Self-contained SVG. DegenerateSeries if a series has fewer than two
/// points (markers excepted) or a log axis meets a non-positive value.
std::string render_line_plot(const LinePlot& p);

/// Values on an n_h x n_v grid over [h0, h1] x [v0, v1], row-major with
/// the horizontal index fastest.
struct HeatMap {
  std::string title;
  int n_h = 0, n_v = 0;
  double h0 = 0, h1 = 1, v0 = 0, v1 = 1;
  std::vector<double> values;
};

std::string render_heat_map(const HeatMap& m);

/// Normalized profile plots E/E0, G/G0, H, R/R0 (R0 = R2(0)) against tau.
/// The H plot carries "max H = <value>" taken from the plotted data.
std::vector<std::filesystem::path> render_profile_plots(const SolutionProfiles& p,
                                                        const std::filesystem::path& dir);

/// Cross-stream maps of e, eps, rho1, rho2 from the lift at x = 1.
std::vector<std::filesystem::path> render_field_maps(const SolutionProfiles& p,
                                                     const ModelConstants& k,
                                                     const std::filesystem::path& dir,
                                                     int n = 81);

/// sqrt(e0)/U0 against x on log-log axes, with the experiment overlaid
/// when given.
std::filesystem::path render_decay_plot(const std::vector<AxisRecord>& axis,
                                        const ModelConstants& k,
                                        const ExperimentSeries* experiment,
                                        const std::filesystem::path& path);

}  // namespace wakefar
