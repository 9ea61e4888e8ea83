#include "wakefar/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "wakefar/errors.hpp"

namespace wakefar {

namespace fs = std::filesystem;

namespace {

constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 50;

std::string fmt(double v, int prec = 2) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, prec);
  return std::string(buf, r.ptr);
}

std::string tick_label(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, r.ptr);
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

struct Axis {
  double lo, hi;
  bool log;
  double map(double v, double p0, double p1) const {
    const double a = log ? std::log10(v) : v;
    return p0 + (a - lo) / (hi - lo) * (p1 - p0);
  }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (int k = static_cast<int>(std::floor(lo)); k <= static_cast<int>(std::ceil(hi)); ++k)
        if (k >= lo - 1e-9 && k <= hi + 1e-9) t.push_back(std::pow(10.0, k));
      if (t.size() < 2) {
        t = {std::pow(10.0, lo), std::pow(10.0, hi)};
      }
      return t;
    }
    const double span = hi - lo;
    const double raw = span / 5;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
      t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return t;
  }
};

Axis make_axis(const std::vector<const std::vector<double>*>& data, bool log) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto* d : data)
    for (double v : *d) {
      if (log && !(v > 0.0)) throw DegenerateSeries("log axis needs positive values");
      const double a = log ? std::log10(v) : v;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  if (!(hi > lo)) {
    const double pad = std::abs(lo) > 0 ? 0.05 * std::abs(lo) : 1.0;
    lo -= pad;
    hi += pad;
  } else if (!log) {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

std::string svg_open(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w, 0) + "\" height=\"" +
         fmt(h, 0) + "\" viewBox=\"0 0 " + fmt(w, 0) + " " + fmt(h, 0) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string color_of(double t) {
  // Five-stop blue -> yellow ramp.
  static const double stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int k = std::min(3, static_cast<int>(t));
  const double u = t - k;
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c)
    rgb[c] = static_cast<int>(std::lround(stops[k][c] + u * (stops[k + 1][c] - stops[k][c])));
  static const char* hex = "0123456789abcdef";
  buf[0] = '#';
  for (int c = 0; c < 3; ++c) {
    buf[1 + 2 * c] = hex[rgb[c] / 16];
    buf[2 + 2 * c] = hex[rgb[c] % 16];
  }
  buf[7] = 0;
  return buf;
}

}  // namespace

std::string render_line_plot(const LinePlot& p) {
  if (p.series.empty()) throw DegenerateSeries("plot without data");
  std::vector<const std::vector<double>*> xs, ys;
  for (const auto& s : p.series) {
    if (s.x.size() != s.y.size()) throw DegenerateSeries("series '" + s.label + "' has ragged data");
    if (s.x.size() < (s.markers ? 1u : 2u))
      throw DegenerateSeries("series '" + s.label + "' needs at least two points");
    xs.push_back(&s.x);
    ys.push_back(&s.y);
  }
  const Axis ax = make_axis(xs, p.logx), ay = make_axis(ys, p.logy);
  const double px0 = kL, px1 = kW - kR, py0 = kH - kB, py1 = kT;

  std::string o = svg_open(kW, kH);
  o += "<text x=\"" + fmt(kW / 2, 0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(p.title) + "</text>\n";
  o += "<rect x=\"" + fmt(px0) + "\" y=\"" + fmt(py1) + "\" width=\"" + fmt(px1 - px0) +
       "\" height=\"" + fmt(py0 - py1) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double X = ax.map(t, px0, px1);
    o += "<line x1=\"" + fmt(X) + "\" y1=\"" + fmt(py0) + "\" x2=\"" + fmt(X) + "\" y2=\"" +
         fmt(py0 + 5) + "\" stroke=\"black\"/>";
    o += "<text x=\"" + fmt(X) + "\" y=\"" + fmt(py0 + 18) + "\" text-anchor=\"middle\">" +
         tick_label(t) + "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double Y = ay.map(t, py0, py1);
    o += "<line x1=\"" + fmt(px0 - 5) + "\" y1=\"" + fmt(Y) + "\" x2=\"" + fmt(px0) + "\" y2=\"" +
         fmt(Y) + "\" stroke=\"black\"/>";
    o += "<text x=\"" + fmt(px0 - 8) + "\" y=\"" + fmt(Y + 4) + "\" text-anchor=\"end\">" +
         tick_label(t) + "</text>\n";
  }
  o += "<text x=\"" + fmt((px0 + px1) / 2) + "\" y=\"" + fmt(kH - 12) +
       "\" text-anchor=\"middle\">" + escape(p.xlabel) + "</text>\n";
  o += "<text x=\"16\" y=\"" + fmt((py0 + py1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fmt((py0 + py1) / 2) + ")\">" + escape(p.ylabel) + "</text>\n";

  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const Series& s = p.series[k];
    const std::string col = kColors[k % 5];
    o += "<g id=\"series-" + std::to_string(k) + "\" data-label=\"" + escape(s.label) + "\">";
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        o += "<circle cx=\"" + fmt(ax.map(s.x[i], px0, px1)) + "\" cy=\"" +
             fmt(ay.map(s.y[i], py0, py1)) + "\" r=\"3.5\" fill=\"none\" stroke=\"" + col + "\"/>";
    } else {
      o += "<polyline fill=\"none\" stroke=\"" + col + "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) o += ' ';
        o += fmt(ax.map(s.x[i], px0, px1)) + ',' + fmt(ay.map(s.y[i], py0, py1));
      }
      o += "\"/>";
    }
    o += "</g>\n";
    o += "<text x=\"" + fmt(px1 - 8) + "\" y=\"" + fmt(py1 + 16 + 16 * k) +
         "\" text-anchor=\"end\" fill=\"" + col + "\">" + escape(s.label) + "</text>\n";
  }
  if (!p.annotation.empty())
    o += "<text id=\"annotation\" x=\"" + fmt(px1 - 8) + "\" y=\"" +
         fmt(py1 + 16 + 16 * p.series.size()) + "\" text-anchor=\"end\">" +
         escape(p.annotation) + "</text>\n";
  o += "</svg>\n";
  return o;
}

std::string render_heat_map(const HeatMap& m) {
  if (m.n_h < 2 || m.n_v < 2 || m.values.size() != static_cast<std::size_t>(m.n_h) * m.n_v)
    throw DegenerateSeries("heat map needs at least a 2 x 2 grid");
  const auto [mn, mx] = std::minmax_element(m.values.begin(), m.values.end());
  const double lo = *mn, hi = *mx;
  const double side = 360, x0 = 60, y0 = 40;
  std::string o = svg_open(x0 + side + 110, y0 + side + 50);
  o += "<text x=\"" + fmt(x0 + side / 2, 0) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(m.title) + "</text>\n";
  const double cw = side / m.n_h, ch = side / m.n_v;
  for (int j = 0; j < m.n_v; ++j) {
    for (int i = 0; i < m.n_h; ++i) {
      const double v = m.values[static_cast<std::size_t>(j) * m.n_h + i];
      const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
      o += "<rect x=\"" + fmt(x0 + i * cw) + "\" y=\"" + fmt(y0 + (m.n_v - 1 - j) * ch) +
           "\" width=\"" + fmt(cw + 0.05) + "\" height=\"" + fmt(ch + 0.05) + "\" fill=\"" +
           color_of(t) + "\"/>";
    }
    o += '\n';
  }
  o += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(side) + "\" height=\"" +
       fmt(side) + "\" fill=\"none\" stroke=\"black\"/>\n";
  o += "<text x=\"" + fmt(x0) + "\" y=\"" + fmt(y0 + side + 18) + "\">" + tick_label(m.h0) + "</text>";
  o += "<text x=\"" + fmt(x0 + side) + "\" y=\"" + fmt(y0 + side + 18) + "\" text-anchor=\"end\">" +
       tick_label(m.h1) + "</text>";
  o += "<text x=\"" + fmt(x0 - 6) + "\" y=\"" + fmt(y0 + side) + "\" text-anchor=\"end\">" +
       tick_label(m.v0) + "</text>";
  o += "<text x=\"" + fmt(x0 - 6) + "\" y=\"" + fmt(y0 + 10) + "\" text-anchor=\"end\">" +
       tick_label(m.v1) + "</text>\n";
  const double bx = x0 + side + 20;
  for (int k = 0; k < 50; ++k)
    o += "<rect x=\"" + fmt(bx) + "\" y=\"" + fmt(y0 + side - (k + 1) * side / 50) +
         "\" width=\"16\" height=\"" + fmt(side / 50 + 0.05) + "\" fill=\"" + color_of((k + 0.5) / 50) +
         "\"/>";
  o += "\n<text x=\"" + fmt(bx + 20) + "\" y=\"" + fmt(y0 + side) + "\">" + tick_label(lo) + "</text>";
  o += "<text x=\"" + fmt(bx + 20) + "\" y=\"" + fmt(y0 + 10) + "\">" + tick_label(hi) + "</text>\n";
  o += "</svg>\n";
  return o;
}

std::vector<fs::path> render_profile_plots(const SolutionProfiles& p, const fs::path& dir) {
  if (p.nodes().size() < 2) throw DegenerateSeries("profiles need at least two nodes");
  fs::create_directories(dir);
  const auto& n = p.nodes();
  const SimilarityState& c = n.front();
  std::vector<double> tau, e, g, h, r;
  for (const auto& s : n) {
    tau.push_back(s.tau);
    e.push_back(s.e_val / c.e_val);
    g.push_back(s.g_val / c.g_val);
    h.push_back(s.h_val);
    r.push_back(s.r2_val / c.r2_val);
  }
  struct Item {
    const char* file;
    const char* title;
    const char* ylabel;
    std::vector<double>* y;
  };
  const Item items[] = {{"fig1_E.svg", "Normalized turbulent energy", "E/E0", &e},
                        {"fig1_G.svg", "Normalized dissipation", "G/G0", &g},
                        {"fig1_H.svg", "Density defect profile", "H", &h},
                        {"fig1_R.svg", "Normalized density variance", "R/R0", &r}};
  std::vector<fs::path> out;
  for (const auto& it : items) {
    LinePlot lp;
    lp.title = it.title;
    lp.xlabel = "tau";
    lp.ylabel = it.ylabel;
    lp.series.push_back({it.ylabel, tau, *it.y, false});
    if (it.y == &h) lp.annotation = "max H = " + format_number(*std::max_element(h.begin(), h.end()));
    const fs::path path = dir / it.file;
    write_text(path, render_line_plot(lp));
    out.push_back(path);
  }
  return out;
}

std::vector<fs::path> render_field_maps(const SolutionProfiles& p, const ModelConstants& k,
                                        const fs::path& dir, int n) {
  if (n < 2) throw DegenerateSeries("field maps need at least 2 samples per side");
  fs::create_directories(dir);
  const double L = 1.2 * p.support();
  std::array<HeatMap, 4> maps;
  const char* titles[] = {"e at x = 1", "eps at x = 1", "rho1 at x = 1", "rho2 at x = 1"};
  for (int f = 0; f < 4; ++f) {
    maps[f].title = titles[f];
    maps[f].n_h = maps[f].n_v = n;
    maps[f].h0 = maps[f].v0 = -L;
    maps[f].h1 = maps[f].v1 = L;
    maps[f].values.resize(static_cast<std::size_t>(n) * n);
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double y = -L + (i + 0.5) * 2 * L / n, z = -L + (j + 0.5) * 2 * L / n;
      const PhysicalPoint pt = similarity_lift(p, 1.0, y, z, k);
      const std::size_t q = static_cast<std::size_t>(j) * n + i;
      maps[0].values[q] = pt.e.value;
      maps[1].values[q] = pt.eps.value;
      maps[2].values[q] = pt.rho1.value;
      maps[3].values[q] = pt.rho2.value;
    }
  }
  const char* files[] = {"fig2_e.svg", "fig2_eps.svg", "fig2_rho1.svg", "fig2_rho2.svg"};
  std::vector<fs::path> out;
  for (int f = 0; f < 4; ++f) {
    const fs::path path = dir / files[f];
    write_text(path, render_heat_map(maps[f]));
    out.push_back(path);
  }
  return out;
}

fs::path render_decay_plot(const std::vector<AxisRecord>& axis, const ModelConstants& k,
                           const ExperimentSeries* experiment, const fs::path& path) {
  LinePlot lp;
  lp.title = "Turbulent energy on the wake axis";
  lp.xlabel = "x";
  lp.ylabel = "sqrt(e0)/U0";
  lp.logx = lp.logy = true;
  Series s{"computed", {}, {}, false};
  for (const auto& r : axis) {
    s.x.push_back(r.x);
    s.y.push_back(std::sqrt(r.e0) / k.u0);
  }
  lp.series.push_back(std::move(s));
  if (experiment != nullptr) {
    Series m{experiment->name, {}, {}, true};
    for (const auto& pt : experiment->points) {
      m.x.push_back(pt.x_over_d);
      m.y.push_back(pt.value);
    }
    lp.series.push_back(std::move(m));
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text(path, render_line_plot(lp));
  return path;
}

}  // namespace wakefar
