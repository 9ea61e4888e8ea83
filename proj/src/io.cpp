#include "wakefar/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wakefar/errors.hpp"

namespace wakefar {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  return std::string(buf, r.ptr);
}

double parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s == "nan") return NAN;
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t k = line.find(sep, start);
    out.push_back(line.substr(start, k == std::string_view::npos ? k : k - start));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

void export_profiles(const SolutionProfiles& p, const fs::path& path) {
  if (p.empty()) throw DegenerateSeries("refusing to write empty profiles to " + path.string());
  std::string out = kProfileHeader;
  out += '\n';
  for (const auto& s : p.nodes()) {
    const double row[] = {s.tau, s.e_val, s.g_val, s.h_val, s.r1_val, s.r2_val,
                          s.de,  s.dg,    s.dh,    s.dr1,   s.dr2};
    for (int c = 0; c < 11; ++c) {
      if (c) out += ',';
      out += format_number(row[c]);
    }
    out += '\n';
  }
  write_text(path, out);
}

std::vector<SimilarityState> read_profiles(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  int no = 0;
  std::vector<SimilarityState> rows;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (no == 1) {
      if (line != kProfileHeader) throw ParseError("expected header " + std::string(kProfileHeader), 1);
      continue;
    }
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw ParseError("expected 11 columns", no);
    double v[11];
    try {
      for (int c = 0; c < 11; ++c) v[c] = parse_number(f[c]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), no);
    }
    SimilarityState s;
    s.tau = v[0];
    s.e_val = v[1];
    s.g_val = v[2];
    s.h_val = v[3];
    s.r1_val = v[4];
    s.r2_val = v[5];
    s.de = v[6];
    s.dg = v[7];
    s.dh = v[8];
    s.dr1 = v[9];
    s.dr2 = v[10];
    rows.push_back(s);
  }
  if (no == 0) throw ParseError("empty file", 1);
  return rows;
}

std::string axis_csv(const DecayDiagnostics& d) {
  std::string out = "x,e0,eps0,rho2_0,slope_e,slope_eps\n";
  for (const auto& r : d.axis) {
    out += format_number(r.x) + ',' + format_number(r.e0) + ',' + format_number(r.eps0) + ',' +
           format_number(r.rho2_0) + ',' + format_number(r.slope_e) + ',' +
           format_number(r.slope_eps) + '\n';
  }
  return out;
}

std::vector<AxisRecord> read_axis(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  int no = 0;
  std::vector<AxisRecord> out;
  while (std::getline(in, line)) {
    ++no;
    const std::string_view t = trim(line);
    if (no == 1) {
      if (t != "x,e0,eps0,rho2_0,slope_e,slope_eps")
        throw ParseError("expected header x,e0,eps0,rho2_0,slope_e,slope_eps", 1);
      continue;
    }
    if (t.empty()) continue;
    const auto f = split(t, ',');
    if (f.size() != 6) throw ParseError("expected 6 columns", no);
    AxisRecord r;
    try {
      r.x = parse_number(f[0]);
      r.e0 = parse_number(f[1]);
      r.eps0 = parse_number(f[2]);
      r.rho2_0 = parse_number(f[3]);
      r.slope_e = parse_number(f[4]);
      r.slope_eps = parse_number(f[5]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), no);
    }
    out.push_back(r);
  }
  if (no == 0) throw ParseError("empty file", 1);
  return out;
}

std::string snapshot_csv(const MarchState& s) {
  std::string out = "y,z,e,eps,rho1,rho2\n";
  out.reserve(out.size() + s.mesh.size() * 6 * 24);
  for (int j = 0; j < s.mesh.nz; ++j) {
    for (int i = 0; i < s.mesh.ny; ++i) {
      const std::size_t n = s.at(i, j);
      out += format_number(s.mesh.y(i)) + ',' + format_number(s.mesh.z(j)) + ',' +
             format_number(s.e[n]) + ',' + format_number(s.eps[n]) + ',' +
             format_number(s.rho1[n]) + ',' + format_number(s.rho2[n]) + '\n';
    }
  }
  return out;
}

ExperimentSeries load_experiment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ExperimentSeries s;
  s.name = path.stem().string();
  std::string line;
  int no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++no;
    const std::string_view t = trim(line);
    if (!t.empty() && t.front() == '#') {
      std::string_view note = trim(t.substr(1));
      if (!s.provenance.empty()) s.provenance += ' ';
      s.provenance += note;
      continue;
    }
    if (!header) {
      if (t != "x_over_D,value") throw ParseError("expected header 'x_over_D,value'", no);
      header = true;
      continue;
    }
    if (t.empty()) continue;
    const auto f = split(t, ',');
    if (f.size() != 2) throw ParseError("expected two columns", no);
    ExperimentPoint p;
    try {
      p.x_over_d = parse_number(f[0]);
      p.value = parse_number(f[1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), no);
    }
    if (!std::isfinite(p.x_over_d) || !(p.value > 0.0) || !std::isfinite(p.value))
      throw ParseError("x_over_D must be finite and value positive", no);
    if (!s.points.empty() && !(p.x_over_d > s.points.back().x_over_d)) {
      std::ostringstream os;
      os << path.string() << " line " << no << ": x_over_D not strictly increasing";
      throw MonotonicityError(os.str());
    }
    s.points.push_back(p);
  }
  if (!header) throw ParseError("missing header 'x_over_D,value'", 1);
  return s;
}

std::vector<ExperimentDeviation> compare_experiment(const ExperimentSeries& exp,
                                                    const std::vector<double>& x,
                                                    const std::vector<double>& value) {
  std::vector<ExperimentDeviation> out;
  if (x.size() < 2) throw DegenerateSeries("computed curve needs two stations");
  for (const auto& p : exp.points) {
    if (p.x_over_d < x.front() || p.x_over_d > x.back()) continue;
    std::size_t k = 1;
    while (k + 1 < x.size() && x[k] < p.x_over_d) ++k;
    const double t = std::log(p.x_over_d / x[k - 1]) / std::log(x[k] / x[k - 1]);
    const double c = std::exp((1 - t) * std::log(value[k - 1]) + t * std::log(value[k]));
    out.push_back({p.x_over_d, p.value, c, (p.value - c) / c});
  }
  return out;
}

}  // namespace wakefar
