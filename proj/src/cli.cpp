#include "wakefar/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <ostream>
#include <sstream>

#include "wakefar/bvp.hpp"
#include "wakefar/config.hpp"
#include "wakefar/edge.hpp"
#include "wakefar/errors.hpp"
#include "wakefar/io.hpp"
#include "wakefar/march.hpp"
#include "wakefar/plot.hpp"
#include "wakefar/suites.hpp"

namespace wakefar {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::vector<std::string> kConstantKeys = {"c_e",    "delta", "c_eps2", "c_rho",
                                                "c_1rho", "c_t",   "u0",     "alpha"};
const std::vector<std::string> kSolverKeys = {
    "tau_match", "s0",       "tau_min",  "s_lin",         "linear_match", "rtol",
    "atol",      "max_iterations", "tolerance", "e0_guess", "g0_guess", "c1_guess",
    "g_coefficient", "edge_order", "norm_e0", "max_spacing"};

std::vector<std::string> keys_for(const std::string& cmd) {
  std::vector<std::string> k;
  auto add = [&](const std::vector<std::string>& v) { k.insert(k.end(), v.begin(), v.end()); };
  if (cmd == "solve") {
    add(kConstantKeys);
    add(kSolverKeys);
    add({"out", "oracle", "oracle_intervals", "scan_alpha", "plots"});
  } else if (cmd == "march") {
    add(kConstantKeys);
    add(kSolverKeys);
    add({"x0", "x1", "ny", "nz", "half_width", "sigma", "e_floor", "eps_floor", "snapshots",
         "records_per_decade", "face", "init", "out_axis", "out_snapshots", "experiment", "plots"});
  } else if (cmd == "verify") {
    add({"suite", "report"});
  } else if (cmd == "edge") {
    add(kConstantKeys);
    add({"a", "c1", "printed_g1"});
  } else if (cmd == "compare") {
    add({"u0", "axis", "experiment", "out", "plots"});
  }
  return k;
}

KeyKind kind_of(const std::string& key) {
  for (const auto& s : config_keys())
    if (s.key == key) return s.kind;
  return KeyKind::text;
}

std::string help_of(const std::string& key) {
  for (const auto& s : config_keys())
    if (s.key == key) return s.help;
  return {};
}

std::string flag_name(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

// Registered options of one subcommand and their storage.
struct Bound {
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> opts;
  std::string config;
  CLI::Option* config_opt = nullptr;
};

void bind(CLI::App* sub, const std::string& cmd, Bound& b) {
  b.config_opt = sub->add_option("--config", b.config, "flat key = value file; flags win");
  for (const auto& key : keys_for(cmd)) {
    if (kind_of(key) == KeyKind::boolean) {
      b.opts[key] = sub->add_flag(flag_name(key), b.flags[key], help_of(key));
    } else {
      b.opts[key] = sub->add_option(flag_name(key), b.text[key], help_of(key));
    }
  }
}

RunConfig merged(const std::string& cmd, const Bound& b) {
  RunConfig c;
  if (b.config_opt->count() > 0) c = RunConfig::load(b.config);
  const auto allowed = keys_for(cmd);
  for (const auto& [key, value] : c.values())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("key '" + key + "' does not apply to '" + cmd + "'");
  for (const auto& [key, opt] : b.opts) {
    if (opt->count() == 0) continue;
    if (kind_of(key) == KeyKind::boolean) c.set(key, b.flags.at(key) ? "true" : "false");
    else c.set(key, b.text.at(key));
  }
  return c;
}

void check_threads_env() {
  const char* env = std::getenv("WAKEFAR_THREADS");
  if (env == nullptr) return;
  const std::string s(env);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("WAKEFAR_THREADS: expected a non-negative integer, got '" + s + "'");
}

json meta_json(const ProfileMeta& m) {
  return json{{"alpha", m.alpha},
              {"a", m.a},
              {"c1", m.c1},
              {"e0", m.e0},
              {"g0", m.g0},
              {"h0", m.h0},
              {"r10", m.r10},
              {"r20", m.r20},
              {"h_max", m.h_max},
              {"mismatch", m.mismatch},
              {"residual_norm", m.residual_norm},
              {"residual_smooth", m.residual_smooth},
              {"tau_match", m.tau_match},
              {"scale", m.scale},
              {"iterations", m.iterations},
              {"converged", m.converged}};
}

// ------------------------------------------------------------ solve

int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const ModelConstants k = constants_from(c);
  const ShootingSpec spec = shooting_from(c, k);

  if (c.has("scan_alpha")) {
    const std::string v = c.text("scan_alpha", "");
    double lo = 0, hi = 0;
    int n = 0;
    {
      std::vector<std::string> parts;
      std::stringstream ss(v);
      std::string p;
      while (std::getline(ss, p, ':')) parts.push_back(p);
      try {
        if (parts.size() != 3) throw std::invalid_argument("three fields");
        lo = parse_number(parts[0]);
        hi = parse_number(parts[1]);
        std::size_t used = 0;
        n = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("count");
      } catch (const std::exception&) {
        throw ConfigError("key 'scan_alpha': expected lo:hi:n, got '" + v + "'");
      }
      if (!(lo > 0.0 && hi >= lo && n >= 1))
        throw ConfigError("key 'scan_alpha': need 0 < lo <= hi and n >= 1");
    }
    const auto pts = scan_alpha(lo, hi, n, spec, k);
    out << "alpha,floor,e0,g0,c1,converged,note\n";
    for (const auto& p : pts)
      out << format_number(p.alpha) << ',' << format_number(p.floor) << ',' << format_number(p.e0)
          << ',' << format_number(p.g0) << ',' << format_number(p.c1) << ','
          << (p.converged ? "true" : "false") << ",\"" << p.note << "\"\n";
    // stdout carries the table, so the summary goes to the error stream.
    err << json{{"command", "solve"}, {"scan_alpha", v}, {"points", n}}.dump() << '\n';
    return kExitOk;
  }

  const FullSolution fs = solve_profiles(spec, k);
  const ProfileMeta& m = fs.profiles.meta();
  const fs::path path = c.text("out", "profiles.csv");
  export_profiles(fs.profiles, path);

  json side = meta_json(m);
  side["status"] = fs.eg.report.status;
  side["unit"] = {{"e0", fs.eg.e0()}, {"g0", fs.eg.g0()}, {"c1", fs.eg.c1()}};
  side["constants"] = {{"c_e", k.c_e},       {"delta", k.delta}, {"c_eps2", k.c_eps2},
                       {"c_rho", k.c_rho},   {"c_1rho", k.c_1rho}, {"c_t", k.c_t},
                       {"u0", k.u0},         {"alpha", k.alpha}};

  if (c.boolean("oracle", false)) {
    const CollocationSpec cs = collocation_from(c, spec);
    const CollocationResult cr = collocation_oracle(cs, k);
    std::vector<double> taus;
    // Oracle nodes only: the profiles may carry a jump at the match point.
    for (const auto& n : cr.unit.nodes())
      if (n.tau <= 0.9) taus.push_back(n.tau);
    const double d = profile_distance([&](double t) { return fs.eval(t); },
                                      [&](double t) { return cr.unit.at(t); }, taus);
    side["oracle"] = {{"distance", d},           {"objective", cr.objective},
                      {"constraint", cr.constraint}, {"iterations", cr.iterations},
                      {"converged", cr.converged}, {"e0", cr.e0},
                      {"g0", cr.g0},             {"c1", cr.c1}};
  }

  fs::path sidecar = path;
  sidecar.replace_extension(".json");
  write_text(sidecar, side.dump(2) + "\n");

  std::vector<std::string> plots;
  if (c.has("plots")) {
    const fs::path dir = c.text("plots", "");
    for (const auto& p : render_profile_plots(fs.profiles, dir)) plots.push_back(p.string());
    for (const auto& p : render_field_maps(fs.profiles, k, dir)) plots.push_back(p.string());
  }

  json summary{{"command", "solve"},
               {"status", fs.eg.report.status},
               {"converged", m.converged},
               {"mismatch", m.mismatch},
               {"h0", m.h0},
               {"a", m.a},
               {"out", path.string()},
               {"sidecar", sidecar.string()}};
  if (side.contains("oracle")) summary["oracle_distance"] = side["oracle"]["distance"];
  if (!plots.empty()) summary["plots"] = plots;
  out << summary.dump() << '\n';
  return m.converged ? kExitOk : kExitFloor;
}

// ------------------------------------------------------------ march

int cmd_march(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const ModelConstants k = constants_from(c);
  const ShootingSpec spec = shooting_from(c, k);
  const MarchConfig mc = march_from(c);
  const std::string init = c.text("init", "similarity");
  if (init != "similarity" && init != "gaussian")
    throw ConfigError("key 'init': expected similarity or gaussian, got '" + init + "'");
  MarchMesh mesh;
  mesh.ny = c.integer("ny", 129);
  mesh.nz = c.integer("nz", 129);
  if (mesh.ny < 5) throw ConfigError("key 'ny': need at least 5 nodes");
  if (mesh.nz < 5) throw ConfigError("key 'nz': need at least 5 nodes");
  const double hw = c.number("half_width", 0.0);
  if (hw < 0.0) throw ConfigError("key 'half_width': must be >= 0");

  const FullSolution fs = solve_profiles(spec, k);
  const SolutionProfiles& prof = fs.profiles;
  const double need = required_half_width(prof.support(), mc.x1, k.alpha);
  mesh.ly = mesh.lz = hw > 0.0 ? hw : need;
  if (!fs.eg.report.converged)
    err << "note: profiles come from a least-squares floor (mismatch "
        << fs.eg.report.norm << ")\n";

  const MarchState start = init == "gaussian" ? init_gaussian(prof, mc.x0, mesh, k, mc)
                                              : init_from_similarity(prof, mc.x0, mesh, k, mc);

  const fs::path snap_dir = c.text("out_snapshots", "");
  std::string index = "index,x,file\n";
  int count = 0;
  if (!snap_dir.empty()) fs::create_directories(snap_dir);
  auto on_snapshot = [&](const MarchState& s) {
    if (snap_dir.empty()) return;
    char name[32];
    std::snprintf(name, sizeof name, "station_%02d.csv", count);
    write_text(snap_dir / name, snapshot_csv(s));
    index += std::to_string(count) + ',' + format_number(s.x) + ',' + name + '\n';
    ++count;
  };
  const MarchResult res = run_march(start, k, mc, ExplicitStepper(), on_snapshot);
  if (!snap_dir.empty()) write_text(snap_dir / "stations.csv", index);

  const fs::path axis_path = c.text("out_axis", "axis.csv");
  write_text(axis_path, axis_csv(res.diagnostics));

  json summary{{"command", "march"},
               {"init", init},
               {"steps", res.steps},
               {"x0", mc.x0},
               {"x1", mc.x1},
               {"ny", mesh.ny},
               {"nz", mesh.nz},
               {"half_width", mesh.ly},
               {"expected_slope_e", 2 * k.alpha - 2},
               {"expected_slope_eps", 2 * k.alpha - 3},
               {"collapse", res.diagnostics.collapse},
               {"out_axis", axis_path.string()}};
  try {
    const DecayFit f = fit_decay_exponents(res.diagnostics.axis, mc.x0, mc.x1);
    summary["slope_e"] = f.slope_e;
    summary["slope_eps"] = f.slope_eps;
  } catch (const WindowTooShort& e) {
    summary["slope_note"] = e.what();
  }

  std::unique_ptr<ExperimentSeries> exp;
  if (c.has("experiment")) exp = std::make_unique<ExperimentSeries>(load_experiment(c.text("experiment", "")));
  if (c.has("plots")) {
    const fs::path p = render_decay_plot(res.diagnostics.axis, k, exp.get(),
                                         fs::path(c.text("plots", "")) / "fig3_decay.svg");
    summary["plots"] = {p.string()};
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

// ------------------------------------------------------------ verify

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream&) {
  const std::string suite = c.text("suite", "all");
  const auto rows = run_suite(suite);
  const fs::path report = c.text("report", "verify_report.csv");
  write_text(report, report_csv(rows));
  int failed = 0;
  json checks = json::object();
  for (const auto& r : rows) {
    if (!r.pass) ++failed;
    checks[r.suite + "/" + r.name] = {{"value", r.value}, {"pass", r.pass}};
  }
  out << json{{"command", "verify"},
              {"suite", suite},
              {"passed", static_cast<int>(rows.size()) - failed},
              {"failed", failed},
              {"report", report.string()},
              {"checks", checks}}
             .dump()
      << '\n';
  return failed == 0 ? kExitOk : kExitFailure;
}

// ------------------------------------------------------------ edge

int cmd_edge(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (!c.has("a")) throw ConfigError("key 'a': required");
  if (!c.has("c1")) throw ConfigError("key 'c1': required");
  const ModelConstants k = constants_from(c);
  const double a = c.number("a", 1.0), c1 = c.number("c1", 1.0);
  if (!(a > 0.0)) throw ConfigError("key 'a': must be positive");
  if (!(c1 > 0.0)) throw ConfigError("key 'c1': must be positive");
  const bool printed = c.boolean("printed_g1", false);
  const GCoefficient g = printed ? GCoefficient::as_printed : GCoefficient::balanced;
  const EdgeExpansion ex = make_edge_expansion(a, c1, k, g, SeriesOrder::leading);
  const EdgeExpansion fc = make_edge_expansion(a, c1, k, g, SeriesOrder::first_correction);

  std::vector<double> taus;
  for (int i = 0; i <= 12; ++i) taus.push_back(a - a * std::pow(10.0, -4.0 + 2.0 * i / 12.0));
  const ResidualOrderReport ro = series_residual_order(ex, k, taus);
  const ResidualOrderReport rc = series_residual_order(fc, k, taus);

  out << "quantity,value\n";
  auto row = [&](const std::string& q, double v) { out << q << ',' << format_number(v) << '\n'; };
  row("a", a);
  row("c1", c1);
  row("alpha", k.alpha);
  row("p", ex.p);
  row("q", ex.q);
  row("g1", ex.g1);
  row("g1_balanced", ex.g1_balanced);
  row("g1_printed", ex.g1_printed);
  row("e_corr", fc.e_corr);
  row("g_corr", fc.g_corr);
  row("h_slope", ex.h_slope);
  row("r1_coef", ex.r1_coef);
  row("r2_coef", ex.r2_coef);
  row("r1_printed", ex.r1_printed);
  row("r2_printed", ex.r2_printed);
  const char* names[] = {"E", "G", "H", "R1", "R2"};
  for (int i = 0; i < 5; ++i) row(std::string("residual_order_") + names[i], ro.fitted_order[i]);
  for (int i = 0; i < 5; ++i)
    row(std::string("residual_order_corrected_") + names[i], rc.fitted_order[i]);
  err << json{{"command", "edge"}, {"g_coefficient", printed ? "printed" : "balanced"},
              {"h_slope", ex.h_slope}, {"g1", ex.g1}}
             .dump()
      << '\n';
  return kExitOk;
}

// ------------------------------------------------------------ compare

int cmd_compare(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (!c.has("axis")) throw ConfigError("key 'axis': required");
  if (!c.has("experiment")) throw ConfigError("key 'experiment': required");
  const ModelConstants k = constants_from(c);
  const auto axis = read_axis(c.text("axis", ""));
  const ExperimentSeries exp = load_experiment(c.text("experiment", ""));
  std::vector<double> x, v;
  for (const auto& r : axis) {
    x.push_back(r.x);
    v.push_back(std::sqrt(r.e0) / k.u0);
  }
  const auto dev = compare_experiment(exp, x, v);
  std::string csv = "x_over_D,measured,computed,relative\n";
  double worst = 0.0;
  for (const auto& d : dev) {
    csv += format_number(d.x_over_d) + ',' + format_number(d.measured) + ',' +
           format_number(d.computed) + ',' + format_number(d.relative) + '\n';
    worst = std::max(worst, std::abs(d.relative));
  }
  const fs::path path = c.text("out", "deviations.csv");
  write_text(path, csv);
  json summary{{"command", "compare"},
               {"experiment", exp.name},
               {"points", exp.points.size()},
               {"compared", dev.size()},
               {"max_relative_deviation", worst},
               {"out", path.string()}};
  if (c.has("plots")) {
    const fs::path p =
        render_decay_plot(axis, k, &exp, fs::path(c.text("plots", "")) / "fig3_decay.svg");
    summary["plots"] = {p.string()};
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-similar far-wake solver and verification tools", "wakefar"};
  app.require_subcommand(1);
  struct Cmd {
    const char* name;
    const char* help;
  };
  const Cmd cmds[] = {{"solve", "solve the similarity boundary value problem"},
                      {"march", "march the full model from similarity or Gaussian data"},
                      {"verify", "run the reduction and ansatz verification suites"},
                      {"edge", "edge series coefficients and residual orders"},
                      {"compare", "compare an axis decay curve with experimental data"}};
  std::map<std::string, Bound> bound;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cm : cmds) {
    subs[cm.name] = app.add_subcommand(cm.name, cm.help);
    bind(subs[cm.name], cm.name, bound[cm.name]);
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) out << sub->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "wakefar: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    check_threads_env();
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const RunConfig c = merged(name, bound[name]);
      if (name == "solve") return cmd_solve(c, out, err);
      if (name == "march") return cmd_march(c, out, err);
      if (name == "verify") return cmd_verify(c, out, err);
      if (name == "edge") return cmd_edge(c, out, err);
      if (name == "compare") return cmd_compare(c, out, err);
    }
  } catch (const ConfigError& e) {
    err << "wakefar: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "wakefar: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MonotonicityError& e) {
    err << "wakefar: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "wakefar: " << e.what() << '\n';
    return kExitFailure;
  }
  err << "wakefar: no subcommand\n";
  return kExitUsage;
}

}  // namespace wakefar
