#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "weylflow/catalog.hpp"
#include "weylflow/flow.hpp"
#include "weylflow/identities.hpp"
#include "weylflow/report.hpp"
#include "weylflow/soliton.hpp"

namespace {

using namespace weylflow;

void write_output(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << payload;
}

struct CurvatureRow {
  double scalar = 0;
  double ric2 = 0;
  double max_rm = 0;
};

CurvatureRow curvature_row(const FlowFamily& family, std::span<const double> state) {
  MetricChart chart = family.chart(state);
  std::vector<double> p(family.n);
  for (int i = 0; i < family.n; ++i) p[i] = 0.05 * (i + 1);
  JetCurvature jc(chart, p, 2, false);
  CurvatureRow row;
  row.scalar = jc.scalar.value();
  row.ric2 = jc.ric2.value();
  row.max_rm = riemann_norm(family, state);
  return row;
}

int cmd_check(const std::vector<std::string>& selectors, bool all, std::uint64_t seed, int points,
              const std::string& out_path) {
  std::vector<CatalogEntry> entries;
  if (all || selectors.empty()) {
    entries = default_catalog();
  } else {
    for (const auto& sel : selectors) entries.push_back(parse_metric_selector(sel));
  }
  auto reports = run_suite(entries, seed, points);
  write_output(out_path, reports_to_json(reports, seed, points));
  return count_failures(reports) == 0 ? 0 : 1;
}

int cmd_flow(const std::string& family_name, int n, int p, int q, double a0, double b0, double r0,
             double c0, double dt, int steps, const std::string& out_path) {
  FlowFamily family;
  std::vector<double> state0;
  if (family_name == "round_sphere") {
    family = FlowFamily::round_sphere(n);
    state0 = {r0 * r0};
  } else if (family_name == "product_spheres") {
    family = FlowFamily::product_spheres(p, q);
    state0 = {a0 * a0, b0 * b0};
  } else if (family_name == "cylinder") {
    family = FlowFamily::cylinder(n);
    state0 = {c0, r0 * r0};
  } else {
    throw CLI::ValidationError("--family must be round_sphere, product_spheres or cylinder");
  }
  FlowTrajectory traj = integrate_flow(family, state0, dt, steps);
  std::ostringstream os;
  os << "t";
  for (const auto& name : family.state_names()) os << "," << name;
  os << ",R,ric_norm2,max_rm,gap_max_rm\n";
  for (size_t i = 0; i < traj.times.size(); ++i) {
    CurvatureRow row = curvature_row(family, traj.states[i]);
    std::vector<double> vals = {traj.times[i]};
    for (double s : traj.states[i]) vals.push_back(s);
    vals.push_back(row.scalar);
    vals.push_back(row.ric2);
    vals.push_back(row.max_rm);
    std::string line = csv_line(vals);
    line.pop_back();  // re-append after the optional last column
    if (traj.blowup_time)
      line += "," + format_double((*traj.blowup_time - traj.times[i]) * row.max_rm);
    else
      line += ",";
    os << line << "\n";
  }
  write_output(out_path, os.str());
  return 0;
}

int cmd_bryant(int n, double length, double tol, const std::string& out_path,
               const std::string& summary_path) {
  BryantProfile prof = bryant_solve(n, length, tol);
  std::ostringstream os;
  os << "t,h,hp,hpp,fp,R,lambda,mu\n";
  const size_t stride = std::max<size_t>(1, prof.ts.size() / 200);
  for (size_t i = 0; i < prof.ts.size(); i += stride) {
    const auto& s = prof.states[i];
    const auto d = bryant_rhs(n, {s[0], s[1], s[2]});
    const double h = s[0], hp = s[1], hpp = d[1];
    const double lambda = -(n - 1) * hpp / h;
    const double mu = ((n - 2) * 1.0 - h * hpp - (n - 2) * hp * hp) / (h * h);
    const double R = lambda + (n - 1) * mu;
    os << csv_line(std::vector<double>{prof.ts[i], h, hp, hpp, s[2], R, lambda, mu});
  }
  write_output(out_path, os.str());

  // residual summary through the curvature pipeline
  CatalogEntry entry = get_metric("bryant_profile", {{"n", static_cast<double>(n)},
                                                     {"L", length},
                                                     {"tol", tol}});
  auto pts = sample_points(entry, 8, 42);
  auto data = make_soliton_data(entry);
  double max_sol = 0, max_weyl = 0, max_div = 0, max_radial = 0;
  std::string pattern = "?";
  for (const auto& pt : pts) {
    Tensor res = soliton_residual(*data, pt);
    CurvaturePack pk = curvature_pack(entry.chart, pt);
    max_sol = std::max(max_sol, max_abs(res) / std::max(max_abs(pk.metric), kResidualFloor));
    max_weyl = std::max(max_weyl, max_abs(pk.weyl) / std::max(max_abs(pk.riem), kResidualFloor));
    auto gr = gradient_identity_residuals(*data, pt);
    max_div = std::max(max_div, gr.div_res);
    if (gr.radial_applicable) max_radial = std::max(max_radial, gr.radial_res);
    EigenStructure eig = classify_eigenstructure(pk);
    pattern = eig.pattern == RicciPattern::Split
                  ? "Split(" + std::to_string(n - 1) + ",1)"
                  : (eig.pattern == RicciPattern::Proportional ? "Proportional" : "Other");
  }
  std::ostringstream js;
  js << "{\"schema\":1,\"n\":" << n << ",\"L\":" << format_double(length)
     << ",\"tol\":" << format_double(tol)
     << ",\"max_soliton_residual\":" << format_double(max_sol)
     << ",\"max_weyl_residual\":" << format_double(max_weyl)
     << ",\"max_grad_div_residual\":" << format_double(max_div)
     << ",\"max_radial_residual\":" << format_double(max_radial) << ",\"eigen_pattern\":\""
     << pattern << "\"}";
  if (summary_path.empty())
    std::cout << js.str() << "\n";
  else
    write_output(summary_path, js.str());
  return 0;
}

int cmd_list(const std::string& out_path) {
  std::ostringstream os;
  os << "[";
  auto entries = default_catalog();
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i) os << ",";
    os << catalog_document(entries[i]);
  }
  os << "]";
  write_output(out_path, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weylflow: curvature identities, reduced Ricci flows and soliton profiles"};
  app.require_subcommand(1);

  // check
  auto* check = app.add_subcommand("check", "run the identity suite and emit a JSON report");
  bool all = false;
  std::vector<std::string> selectors;
  std::uint64_t seed = 42;
  int points = 20;
  std::string check_out;
  check->add_flag("--all", all, "run the full default catalog");
  check->add_option("--metric", selectors, "metric selector name:key=val,... (repeatable)");
  check->add_option("--seed", seed, "sample-point seed (default 42)");
  check->add_option("--points", points, "points per metric (default 20)");
  check->add_option("--out", check_out, "output path (default stdout)");

  // flow
  auto* flow = app.add_subcommand("flow", "integrate a reduced Ricci flow and emit CSV");
  std::string family;
  int fn = 4, fp = 2, fq = 2, steps = 100;
  double a0 = 1, b0 = 1, r0 = 1, c0 = 1, dt = 1e-3;
  flow->add_option("--family", family, "round_sphere | product_spheres | cylinder")->required();
  flow->add_option("--n", fn, "dimension (round_sphere, cylinder)");
  flow->add_option("--p", fp, "first factor dimension (product_spheres)");
  flow->add_option("--q", fq, "second factor dimension (product_spheres)");
  flow->add_option("--a0", a0, "initial first factor radius");
  flow->add_option("--b0", b0, "initial second factor radius");
  flow->add_option("--r0", r0, "initial radius (round_sphere, cylinder sphere factor)");
  flow->add_option("--c0", c0, "initial flat-factor scale (cylinder)");
  flow->add_option("--dt", dt, "time step (default 1e-3)");
  flow->add_option("--steps", steps, "number of steps (default 100)");
  std::string flow_out;
  flow->add_option("--out", flow_out, "output path (default stdout)");

  // bryant
  auto* bryant = app.add_subcommand("bryant", "solve the steady warped soliton profile");
  int bn = 4;
  double blen = 2.0, btol = 1e-6;
  std::string bryant_out, bryant_summary;
  bryant->add_option("--n", bn, "dimension (default 4)");
  bryant->add_option("--length", blen, "profile half-length (default 2)");
  bryant->add_option("--tol", btol, "pipeline residual tolerance (default 1e-6)");
  bryant->add_option("--out", bryant_out, "CSV output path (default stdout)");
  bryant->add_option("--summary", bryant_summary, "JSON residual summary path (default stdout)");

  // list
  auto* list = app.add_subcommand("list", "print the metric catalog as JSON documents");
  std::string list_out;
  list->add_option("--out", list_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (check->parsed()) return cmd_check(selectors, all, seed, points, check_out);
    if (flow->parsed()) return cmd_flow(family, fn, fp, fq, a0, b0, r0, c0, dt, steps, flow_out);
    if (bryant->parsed()) return cmd_bryant(bn, blen, btol, bryant_out, bryant_summary);
    if (list->parsed()) return cmd_list(list_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
