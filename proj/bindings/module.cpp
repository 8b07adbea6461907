#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "weylflow/catalog.hpp"
#include "weylflow/flow.hpp"
#include "weylflow/identities.hpp"
#include "weylflow/report.hpp"
#include "weylflow/soliton.hpp"

namespace py = pybind11;
using namespace weylflow;

namespace {

py::array_t<double> tensor_to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.rank(), t.dim());
  py::array_t<double> arr(shape);
  auto data = t.data();
  std::copy(data.begin(), data.end(), arr.mutable_data());
  return arr;
}

std::map<std::string, double> params_from_dict(const py::dict& d) {
  std::map<std::string, double> out;
  for (auto item : d) out[py::cast<std::string>(item.first)] = py::cast<double>(item.second);
  return out;
}

py::dict curvature(const std::string& name, const py::dict& params,
                   const std::vector<double>& point) {
  CatalogEntry e = get_metric(name, params_from_dict(params));
  CurvaturePack pk = curvature_pack(e.chart, point);
  py::dict out;
  out["metric"] = tensor_to_array(pk.metric);
  out["inverse_metric"] = tensor_to_array(pk.inverse_metric);
  out["christoffel"] = tensor_to_array(pk.gamma);
  out["riemann"] = tensor_to_array(pk.riem);
  out["ricci"] = tensor_to_array(pk.ric);
  out["scalar"] = pk.scalar;
  out["ric_norm2"] = pk.ric_norm2;
  out["weyl"] = tensor_to_array(pk.weyl);
  out["schouten"] = tensor_to_array(pk.schouten);
  out["c_tensor"] = tensor_to_array(pk.c_tensor);
  out["d_tensor"] = tensor_to_array(pk.d_tensor);
  return out;
}

py::list sample(const std::string& name, const py::dict& params, int count, std::uint64_t seed) {
  CatalogEntry e = get_metric(name, params_from_dict(params));
  py::list out;
  for (const auto& p : sample_points(e, count, seed)) out.append(p);
  return out;
}

py::list check(const std::vector<std::string>& selectors, std::uint64_t seed, int points) {
  std::vector<CatalogEntry> entries;
  if (selectors.empty())
    entries = default_catalog();
  else
    for (const auto& s : selectors) entries.push_back(parse_metric_selector(s));
  auto reports = run_suite(entries, seed, points);
  py::list out;
  for (const auto& r : reports) {
    py::dict d;
    d["check_id"] = r.check_id;
    d["statement"] = r.statement;
    d["metric"] = r.metric;
    d["n_points"] = r.n_points;
    d["max_residual"] = r.max_residual;
    d["tolerance"] = r.tolerance;
    d["pass"] = r.pass;
    d["status"] = r.status;
    out.append(d);
  }
  return out;
}

py::dict flow(const std::string& family_name, const py::dict& kwargs, double dt, int steps) {
  FlowFamily fam;
  std::vector<double> s0;
  auto p = params_from_dict(kwargs);
  auto get = [&](const char* k, double dflt) { return p.count(k) ? p.at(k) : dflt; };
  if (family_name == "round_sphere") {
    fam = FlowFamily::round_sphere(static_cast<int>(get("n", 4)));
    const double r0 = get("r0", 1.0);
    s0 = {r0 * r0};
  } else if (family_name == "product_spheres") {
    fam = FlowFamily::product_spheres(static_cast<int>(get("p", 2)),
                                      static_cast<int>(get("q", 2)));
    const double a0 = get("a0", 1.0), b0 = get("b0", 1.0);
    s0 = {a0 * a0, b0 * b0};
  } else if (family_name == "cylinder") {
    fam = FlowFamily::cylinder(static_cast<int>(get("n", 4)));
    const double r0 = get("r0", 1.0);
    s0 = {get("c0", 1.0), r0 * r0};
  } else {
    throw std::invalid_argument("unknown family: " + family_name);
  }
  FlowTrajectory traj = integrate_flow(fam, s0, dt, steps);
  py::dict out;
  out["times"] = traj.times;
  out["states"] = traj.states;
  out["state_names"] = fam.state_names();
  if (traj.blowup_time) out["blowup_time"] = *traj.blowup_time;
  SingularityReport rep = singularity_type(traj);
  switch (rep.kind) {
    case SingularityKind::TypeI: out["singularity"] = "TypeI"; break;
    case SingularityKind::TypeIIa: out["singularity"] = "TypeIIa"; break;
    case SingularityKind::NoSingularity: out["singularity"] = "NoSingularity"; break;
    case SingularityKind::Inconclusive: out["singularity"] = "Inconclusive"; break;
  }
  out["type_one_limit"] = rep.limit;
  return out;
}

py::dict bryant(int n, double length, double tol) {
  BryantProfile prof = bryant_solve(n, length, tol);
  py::dict out;
  out["n"] = prof.n;
  out["L"] = prof.L;
  std::vector<double> t, h, hp, fp;
  for (size_t i = 0; i < prof.ts.size(); i += 50) {
    t.push_back(prof.ts[i]);
    h.push_back(prof.states[i][0]);
    hp.push_back(prof.states[i][1]);
    fp.push_back(prof.states[i][2]);
  }
  out["t"] = t;
  out["h"] = h;
  out["hp"] = hp;
  out["fp"] = fp;
  return out;
}

}  // namespace

PYBIND11_MODULE(_weylflow, m) {
  m.doc() = "numerical curvature identities, reduced Ricci flows and soliton profiles";
  m.def("catalog_names", &catalog_names, "names of the built-in metric families");
  m.def("curvature", &curvature, py::arg("name"), py::arg("params") = py::dict(),
        py::arg("point"),
        "all curvature tensors of a catalog metric at a point, as numpy arrays");
  m.def("sample", &sample, py::arg("name"), py::arg("params") = py::dict(), py::arg("count") = 8,
        py::arg("seed") = 42, "deterministic sample points inside the chart domain");
  m.def("check", &check, py::arg("selectors") = std::vector<std::string>{}, py::arg("seed") = 42,
        py::arg("points") = 20, "run the identity suite; returns one record per (check, metric)");
  m.def("flow", &flow, py::arg("family"), py::arg("params") = py::dict(), py::arg("dt") = 1e-3,
        py::arg("steps") = 100, "integrate a reduced Ricci flow and classify its singularity");
  m.def("bryant", &bryant, py::arg("n") = 4, py::arg("length") = 2.0, py::arg("tol") = 1e-6,
        "solve the steady warped soliton profile");
  m.def("catalog_document", [](const std::string& selector) {
    return catalog_document(parse_metric_selector(selector));
  });
}
