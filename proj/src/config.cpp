#include "wakefar/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wakefar/errors.hpp"
#include "wakefar/io.hpp"

namespace wakefar {

const std::vector<KeySpec>& config_keys() {
  using K = KeyKind;
  static const std::vector<KeySpec> keys = {
      // closure constants
      {"c_e", K::number, "energy diffusion constant"},
      {"delta", K::number, "c_e / c_eps"},
      {"c_eps2", K::number, "dissipation destruction constant"},
      {"c_rho", K::number, "density defect diffusion constant"},
      {"c_1rho", K::number, "density variance diffusion constant"},
      {"c_t", K::number, "density variance destruction constant"},
      {"u0", K::number, "free stream velocity"},
      {"alpha", K::number, "similarity exponent"},
      // solve
      {"out", K::text, "profile CSV path (sidecar: same name, .json)"},
      {"tau_match", K::number, "match point of the (E, G) shooting, fraction of a"},
      {"s0", K::number, "edge offset of the inward run"},
      {"tau_min", K::number, "axis offset of the outward run"},
      {"s_lin", K::number, "edge offset of the linear solves"},
      {"linear_match", K::number, "match point of the linear solves"},
      {"rtol", K::number, "integrator relative tolerance"},
      {"atol", K::number, "integrator absolute tolerance"},
      {"max_iterations", K::integer, "Newton iterations"},
      {"tolerance", K::number, "mismatch accepted as converged"},
      {"e0_guess", K::number, "initial E(0) at a = 1"},
      {"g0_guess", K::number, "initial G(0) at a = 1"},
      {"c1_guess", K::number, "initial edge amplitude at a = 1"},
      {"g_coefficient", K::text, "balanced | printed"},
      {"edge_order", K::text, "leading | first_correction"},
      {"norm_e0", K::number, "E(0) after rescaling (<= 0 keeps a = 1)"},
      {"max_spacing", K::number, "profile grid spacing cap"},
      {"oracle", K::boolean, "also run the collocation cross-check"},
      {"oracle_intervals", K::integer, "collocation intervals per side"},
      {"scan_alpha", K::text, "lo:hi:n mismatch floor sweep"},
      {"plots", K::text, "directory for SVG plots"},
      // march
      {"x0", K::number, "first station"},
      {"x1", K::number, "last station"},
      {"ny", K::integer, "nodes in y"},
      {"nz", K::integer, "nodes in z"},
      {"half_width", K::number, "mesh half-width (0 = smallest allowed)"},
      {"sigma", K::number, "step safety factor"},
      {"e_floor", K::number, "relative floor of e"},
      {"eps_floor", K::number, "relative floor of eps"},
      {"snapshots", K::integer, "stations written out"},
      {"records_per_decade", K::integer, "axis records per decade"},
      {"face", K::text, "arithmetic | harmonic face diffusivity"},
      {"init", K::text, "similarity | gaussian"},
      {"out_axis", K::text, "axis CSV path"},
      {"out_snapshots", K::text, "snapshot directory"},
      {"experiment", K::text, "experiment CSV (x_over_D,value)"},
      // verify
      {"suite", K::text, "ansatz | bde | riccati | collapse | all"},
      {"report", K::text, "verification report path"},
      // edge
      {"a", K::number, "edge radius"},
      {"c1", K::number, "edge amplitude"},
      {"printed_g1", K::boolean, "use the printed G coefficient"},
      // compare
      {"axis", K::text, "axis CSV from a march run"},
  };
  return keys;
}

namespace {

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : config_keys())
    if (k.key == key) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (find_key(key) == nullptr) throw ConfigError("unknown key '" + key + "'");
  values_[key] = value;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", no);
    if (find_key(key) == nullptr)
      throw ConfigError("unknown key '" + key + "' at line " + std::to_string(no));
    c.values_[key] = value;
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

double RunConfig::number(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    const double v = parse_number(it->second);
    if (!std::isfinite(v)) throw std::invalid_argument("not finite");
    return v;
  } catch (const std::invalid_argument&) {
    throw ConfigError("key '" + key + "': expected a finite number, got '" + it->second + "'");
  }
}

int RunConfig::integer(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw ConfigError("key '" + key + "': expected an integer, got '" + s + "'");
  return v;
}

std::string RunConfig::text(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

bool RunConfig::boolean(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + it->second + "'");
}

ModelConstants constants_from(const RunConfig& c) {
  ModelConstants k;
  k.c_e = c.number("c_e", k.c_e);
  k.delta = c.number("delta", k.delta);
  k.c_eps2 = c.number("c_eps2", k.c_eps2);
  k.c_rho = c.number("c_rho", k.c_rho);
  k.c_1rho = c.number("c_1rho", k.c_1rho);
  k.c_t = c.number("c_t", k.c_t);
  k.u0 = c.number("u0", k.u0);
  k.alpha = c.number("alpha", k.alpha);
  try {
    k.validate();
  } catch (const BadConstants& e) {
    // The message starts with the constant, which is also the key name.
    throw ConfigError(std::string("invalid constants: ") + e.what());
  }
  return k;
}

ShootingSpec shooting_from(const RunConfig& c, const ModelConstants& k) {
  ShootingSpec s;
  s.alpha = k.alpha;
  s.tau_match = c.number("tau_match", s.tau_match);
  s.s0 = c.number("s0", s.s0);
  s.tau_min = c.number("tau_min", s.tau_min);
  s.s_lin = c.number("s_lin", s.s_lin);
  s.linear_match = c.number("linear_match", s.linear_match);
  s.rtol = c.number("rtol", s.rtol);
  s.atol = c.number("atol", s.atol);
  s.newton.max_iterations = c.integer("max_iterations", s.newton.max_iterations);
  s.newton.tolerance = c.number("tolerance", s.newton.tolerance);
  s.e0_guess = c.number("e0_guess", s.e0_guess);
  s.g0_guess = c.number("g0_guess", s.g0_guess);
  s.c1_guess = c.number("c1_guess", s.c1_guess);
  s.norm_e0 = c.number("norm_e0", s.norm_e0);
  s.max_spacing = c.number("max_spacing", s.max_spacing);
  const std::string g = c.text("g_coefficient", "balanced");
  if (g == "balanced") s.g_choice = GCoefficient::balanced;
  else if (g == "printed") s.g_choice = GCoefficient::as_printed;
  else throw ConfigError("key 'g_coefficient': expected balanced or printed, got '" + g + "'");
  const std::string o = c.text("edge_order", "first_correction");
  if (o == "leading") s.edge_order = SeriesOrder::leading;
  else if (o == "first_correction") s.edge_order = SeriesOrder::first_correction;
  else throw ConfigError("key 'edge_order': expected leading or first_correction, got '" + o + "'");
  if (s.newton.max_iterations < 1) throw ConfigError("key 'max_iterations': must be positive");
  if (!(s.rtol > 0.0)) throw ConfigError("key 'rtol': must be positive");
  if (!(s.atol > 0.0)) throw ConfigError("key 'atol': must be positive");
  if (!(s.max_spacing > 0.0)) throw ConfigError("key 'max_spacing': must be positive");
  if (!(s.s0 > 0.0 && s.s0 < 0.05)) throw ConfigError("key 's0': must lie in (0, 0.05)");
  if (!(s.s_lin > 0.0 && s.s_lin < s.s0)) throw ConfigError("key 's_lin': must lie in (0, s0)");
  if (!(s.tau_match > 0.0 && s.tau_match < 1.0)) throw ConfigError("key 'tau_match': must lie in (0, 1)");
  if (!(s.tau_min > 0.0 && s.tau_min < s.tau_match))
    throw ConfigError("key 'tau_min': must lie in (0, tau_match)");
  s.validate();
  return s;
}

CollocationSpec collocation_from(const RunConfig& c, const ShootingSpec& s) {
  CollocationSpec o;
  o.alpha = s.alpha;
  o.tau_match = s.tau_match;
  o.s0 = s.s0;
  o.s_lin = s.s_lin;
  o.e0_guess = s.e0_guess;
  o.g0_guess = s.g0_guess;
  o.c1_guess = s.c1_guess;
  o.g_choice = s.g_choice;
  o.edge_order = s.edge_order;
  o.norm_e0 = s.norm_e0;
  o.intervals = c.integer("oracle_intervals", o.intervals);
  if (o.intervals < 10) throw ConfigError("key 'oracle_intervals': need at least 10");
  o.validate();
  return o;
}

MarchConfig march_from(const RunConfig& c) {
  MarchConfig m;
  m.x0 = c.number("x0", m.x0);
  m.x1 = c.number("x1", m.x1);
  m.sigma = c.number("sigma", m.sigma);
  m.e_floor = c.number("e_floor", m.e_floor);
  m.eps_floor = c.number("eps_floor", m.eps_floor);
  m.snapshots = c.integer("snapshots", m.snapshots);
  m.records_per_decade = c.integer("records_per_decade", m.records_per_decade);
  const std::string f = c.text("face", "arithmetic");
  if (f == "arithmetic") m.face = FaceAverage::arithmetic;
  else if (f == "harmonic") m.face = FaceAverage::harmonic;
  else throw ConfigError("key 'face': expected arithmetic or harmonic, got '" + f + "'");
  if (!(m.x0 > 0.0)) throw ConfigError("key 'x0': must be positive");
  if (!(m.x1 > m.x0)) throw ConfigError("key 'x1': must exceed x0");
  if (!(m.sigma > 0.0 && m.sigma <= 1.0)) throw ConfigError("key 'sigma': must lie in (0, 1]");
  if (!(m.e_floor > 0.0 && m.e_floor < 1.0)) throw ConfigError("key 'e_floor': must lie in (0, 1)");
  if (!(m.eps_floor > 0.0 && m.eps_floor < 1.0))
    throw ConfigError("key 'eps_floor': must lie in (0, 1)");
  if (m.snapshots < 2) throw ConfigError("key 'snapshots': need at least 2");
  if (m.records_per_decade < 1) throw ConfigError("key 'records_per_decade': must be positive");
  return m;
}

}  // namespace wakefar
