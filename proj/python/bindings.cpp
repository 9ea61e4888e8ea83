#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wakefar/bvp.hpp"
#include "wakefar/cli.hpp"
#include "wakefar/edge.hpp"
#include "wakefar/errors.hpp"
#include "wakefar/march.hpp"
#include "wakefar/suites.hpp"

namespace py = pybind11;
using namespace wakefar;

namespace {

ModelConstants constants_with(double alpha) {
  ModelConstants k;
  k.alpha = alpha;
  k.validate();
  return k;
}

py::dict meta_dict(const ProfileMeta& m) {
  py::dict d;
  d["alpha"] = m.alpha;
  d["a"] = m.a;
  d["c1"] = m.c1;
  d["e0"] = m.e0;
  d["g0"] = m.g0;
  d["h0"] = m.h0;
  d["r10"] = m.r10;
  d["r20"] = m.r20;
  d["h_max"] = m.h_max;
  d["mismatch"] = m.mismatch;
  d["residual_norm"] = m.residual_norm;
  d["residual_smooth"] = m.residual_smooth;
  d["converged"] = m.converged;
  return d;
}

py::array_t<double> as_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict profile_arrays(const SolutionProfiles& p) {
  std::vector<double> cols[6];
  for (const auto& n : p.nodes()) {
    cols[0].push_back(n.tau);
    cols[1].push_back(n.e_val);
    cols[2].push_back(n.g_val);
    cols[3].push_back(n.h_val);
    cols[4].push_back(n.r1_val);
    cols[5].push_back(n.r2_val);
  }
  const char* names[] = {"tau", "E", "G", "H", "R1", "R2"};
  py::dict d;
  for (int i = 0; i < 6; ++i) d[names[i]] = as_array(cols[i]);
  return d;
}

py::dict solve(double alpha, double tau_match, bool oracle) {
  const ModelConstants k = constants_with(alpha);
  ShootingSpec spec;
  spec.alpha = alpha;
  spec.tau_match = tau_match;
  spec.validate();
  FullSolution fs;
  {
    py::gil_scoped_release release;
    fs = solve_profiles(spec, k);
  }
  py::dict out = meta_dict(fs.profiles.meta());
  out["status"] = fs.eg.report.status;
  out["profiles"] = profile_arrays(fs.profiles);
  if (oracle) {
    CollocationSpec cs;
    cs.alpha = alpha;
    cs.tau_match = tau_match;
    CollocationResult cr;
    {
      py::gil_scoped_release release;
      cr = collocation_oracle(cs, k);
    }
    std::vector<double> taus;
    for (const auto& n : cr.unit.nodes())
      if (n.tau <= 0.9) taus.push_back(n.tau);
    out["oracle_distance"] = profile_distance([&](double t) { return fs.eval(t); },
                                              [&](double t) { return cr.unit.at(t); }, taus);
  }
  return out;
}

py::dict edge(double a, double c1, double alpha, bool printed_g1) {
  const ModelConstants k = constants_with(alpha);
  const EdgeExpansion ex = make_edge_expansion(
      a, c1, k, printed_g1 ? GCoefficient::as_printed : GCoefficient::balanced);
  std::vector<double> taus;
  for (int i = 0; i <= 12; ++i) taus.push_back(a - a * std::pow(10.0, -4.0 + 2.0 * i / 12.0));
  const auto ro = series_residual_order(ex, k, taus);
  py::dict d;
  d["p"] = ex.p;
  d["q"] = ex.q;
  d["g1"] = ex.g1;
  d["h_slope"] = ex.h_slope;
  d["r1_coef"] = ex.r1_coef;
  d["r2_coef"] = ex.r2_coef;
  d["residual_order"] = std::vector<double>(ro.fitted_order.begin(), ro.fitted_order.end());
  return d;
}

py::list verify(const std::string& suite) {
  py::list rows;
  for (const auto& r : run_suite(suite)) {
    py::dict d;
    d["suite"] = r.suite;
    d["check"] = r.name;
    d["value"] = r.value;
    d["threshold"] = r.threshold;
    d["pass"] = r.pass;
    d["detail"] = r.detail;
    rows.append(d);
  }
  return rows;
}

py::dict march(int n, double x1, const std::string& init, double alpha) {
  const ModelConstants k = constants_with(alpha);
  ShootingSpec spec;
  spec.alpha = alpha;
  MarchConfig cfg;
  cfg.x1 = x1;
  cfg.validate();
  if (init != "similarity" && init != "gaussian") throw ConfigError("init must be similarity or gaussian");
  MarchResult r;
  {
    py::gil_scoped_release release;
    const FullSolution fs = solve_profiles(spec, k);
    MarchMesh mesh;
    mesh.ny = mesh.nz = n;
    mesh.ly = mesh.lz = required_half_width(fs.profiles.support(), x1, alpha);
    const MarchState s = init == "similarity"
                             ? init_from_similarity(fs.profiles, cfg.x0, mesh, k, cfg)
                             : init_gaussian(fs.profiles, cfg.x0, mesh, k, cfg);
    r = run_march(s, k, cfg, ExplicitStepper());
  }
  std::vector<double> x, e0, eps0;
  for (const auto& a : r.diagnostics.axis) {
    x.push_back(a.x);
    e0.push_back(a.e0);
    eps0.push_back(a.eps0);
  }
  py::dict d;
  d["x"] = as_array(x);
  d["e0"] = as_array(e0);
  d["eps0"] = as_array(eps0);
  d["collapse"] = r.diagnostics.collapse;
  d["steps"] = r.steps;
  return d;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full{"wakefar"};
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out, err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = run(full, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Far-wake similarity solver bindings";
  auto base = py::register_exception<WakeError>(m, "WakeError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<BadConstants>(m, "BadConstants", base.ptr());
  py::register_exception<MeshTooSmall>(m, "MeshTooSmall", base.ptr());

  m.def("solve", &solve, py::arg("alpha") = 0.23, py::arg("tau_match") = 0.5,
        py::arg("oracle") = false,
        "Solve the similarity problem; returns metadata and normalized profile arrays.");
  m.def("edge", &edge, py::arg("a"), py::arg("c1"), py::arg("alpha") = 0.23,
        py::arg("printed_g1") = false, "Edge series coefficients and residual orders.");
  m.def("verify", &verify, py::arg("suite") = "all", "Run a verification suite.");
  m.def("march", &march, py::arg("n") = 65, py::arg("x1") = 10.0,
        py::arg("init") = "similarity", py::arg("alpha") = 0.23,
        "March the full model on an n x n mesh; returns axis decay and collapse errors.");
  m.def("run_cli", &run_cli, py::arg("args"),
        "Run the command line tool in-process; returns (exit_code, stdout, stderr).");
}
