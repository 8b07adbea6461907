#include "weylflow/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace weylflow {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string sum_of_squares(int from, int to) {  // 1-based inclusive
  std::string s = "(";
  for (int a = from; a <= to; ++a) {
    if (a > from) s += "+";
    s += "x" + std::to_string(a) + "^2";
  }
  s += ")";
  return s;
}

void fill_zero_offdiag(MetricChart& chart) {
  for (int i = 0; i < chart.n; ++i)
    for (int j = i + 1; j < chart.n; ++j)
      if (chart.component(i, j).empty()) chart.set_component(i, j, parse_expr("0"));
}

std::map<std::string, double> with_defaults(const std::map<std::string, double>& params,
                                            const std::map<std::string, double>& defaults,
                                            const std::string& family) {
  std::map<std::string, double> out = defaults;
  for (const auto& [k, v] : params) {
    auto it = out.find(k);
    if (it == out.end())
      throw CatalogError("unknown parameter '" + k + "' for family '" + family + "'");
    it->second = v;
  }
  return out;
}

int dim_param(const std::map<std::string, double>& p, const char* key = "n") {
  double v = p.at(key);
  int n = static_cast<int>(std::lround(v));
  if (std::abs(v - n) > 1e-9 || n < 2 || n > kMaxVars)
    throw CatalogError(std::string("dimension parameter '") + key + "' must be an integer in 2.." +
                       std::to_string(kMaxVars));
  return n;
}

std::string make_label(const std::string& name, const std::map<std::string, double>& params) {
  std::string label = name;
  char sep = ':';
  for (const auto& [k, v] : params) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    label += sep;
    label += k + "=" + os.str();
    sep = ',';
  }
  return label;
}

Jet closed_form_h_jet(int kind, double t, int order) {
  Jet x = Jet::variable(1, order, 0, t);
  switch (kind) {
    case 0: return Jet::constant(1, order, 1.0);
    case 1: return sin(x);
    case 2: return x;
    case 3: return (exp(x) + exp(-x)) * 0.5;
    default: throw CatalogError("warp kind must be 0 (1), 1 (sin t), 2 (t) or 3 (cosh t)");
  }
}

CatalogEntry euclidean_entry(const std::map<std::string, double>& params) {
  auto p = with_defaults(params, {{"n", 4}}, "euclidean");
  const int n = dim_param(p);
  CatalogEntry e;
  e.name = "euclidean";
  e.n = n;
  e.params = p;
  e.chart = MetricChart(n, "euclidean");
  for (int i = 0; i < n; ++i) e.chart.set_component(i, i, parse_expr("1"));
  fill_zero_offdiag(e.chart);
  e.chart.domain = Domain::box(n, -1, 1);
  e.facts.flat = true;
  e.facts.scalar_curvature = 0;
  e.facts.sectional = 0;
  e.facts.einstein_factor = 0;
  e.facts.weyl_zero = true;
  e.facts.lcf_flow_invariant = true;
  e.facts.ricci_eigenvalues = std::vector<double>(n, 0.0);
  return e;
}

CatalogEntry sphere_entry(const std::map<std::string, double>& params) {
  auto p = with_defaults(params, {{"n", 4}, {"r", 1}}, "sphere");
  const int n = dim_param(p);
  const double r = p.at("r");
  if (r <= 0) throw CatalogError("sphere radius must be positive");
  CatalogEntry e;
  e.name = "sphere";
  e.n = n;
  e.params = p;
  e.chart = MetricChart(n, "sphere");
  e.chart.bindings.params["r2"] = r * r;
  const std::string f = "4*r2/(1+" + sum_of_squares(1, n) + ")^2";
  for (int i = 0; i < n; ++i) e.chart.set_component(i, i, parse_expr(f));
  fill_zero_offdiag(e.chart);
  e.chart.domain = Domain::ball(n, 1.0);
  const double K = 1.0 / (r * r);
  e.facts.sectional = K;
  e.facts.scalar_curvature = n * (n - 1) * K;
  e.facts.einstein_factor = (n - 1) * K;
  e.facts.weyl_zero = true;
  e.facts.lcf_flow_invariant = true;
  e.facts.ricci_eigenvalues = std::vector<double>(n, (n - 1) * K);
  return e;
}

CatalogEntry hyperbolic_entry(const std::map<std::string, double>& params) {
  auto p = with_defaults(params, {{"n", 4}, {"r", 1}}, "hyperbolic");
  const int n = dim_param(p);
  const double r = p.at("r");
  if (r <= 0) throw CatalogError("hyperbolic radius must be positive");
  CatalogEntry e;
  e.name = "hyperbolic";
  e.n = n;
  e.params = p;
  e.chart = MetricChart(n, "hyperbolic");
  e.chart.bindings.params["r2"] = r * r;
  const std::string f = "4*r2/(1-" + sum_of_squares(1, n) + ")^2";
  for (int i = 0; i < n; ++i) e.chart.set_component(i, i, parse_expr(f));
  fill_zero_offdiag(e.chart);
  e.chart.domain = Domain::ball(n, 1.0);
  const double K = -1.0 / (r * r);
  e.facts.sectional = K;
  e.facts.scalar_curvature = n * (n - 1) * K;
  e.facts.einstein_factor = (n - 1) * K;
  e.facts.weyl_zero = true;
  e.facts.lcf_flow_invariant = true;
  e.facts.ricci_eigenvalues = std::vector<double>(n, (n - 1) * K);
  return e;
}

CatalogEntry cylinder_entry(const std::map<std::string, double>& params) {
  auto p = with_defaults(params, {{"n", 4}, {"K", 1}}, "cylinder_RxS");
  const int n = dim_param(p);
  const double K = p.at("K");
  if (K <= 0) throw CatalogError("cylinder sphere-factor curvature K must be positive");
  CatalogEntry e;
  e.name = "cylinder_RxS";
  e.n = n;
  e.params = p;
  e.chart = MetricChart(n, "cylinder_RxS");
  e.chart.bindings.params["rf2"] = 1.0 / K;
  e.chart.set_component(0, 0, parse_expr("1"));
  const std::string f = "4*rf2/(1+" + sum_of_squares(2, n) + ")^2";
  for (int a = 1; a < n; ++a) e.chart.set_component(a, a, parse_expr(f));
  fill_zero_offdiag(e.chart);
  Domain d;
  d.groups.push_back({0, 1, false, -1, 1, 0});
  d.groups.push_back({1, n - 1, true, 0, 0, 1.0});
  e.chart.domain = d;
  e.facts.weyl_zero = true;
  e.facts.lcf_flow_invariant = true;
  e.facts.scalar_curvature = (n - 1) * (n - 2) * K;
  std::vector<double> eig(n, (n - 2) * K);
  eig[0] = 0;
  std::sort(eig.begin(), eig.end());
  e.facts.ricci_eigenvalues = eig;
  // warped form of this chart: constant warp 1/sqrt(K) over the unit fiber
  const double rf = 1.0 / std::sqrt(K);
  e.warped = WarpedInfo{1.0, [rf](double, int order) { return Jet::constant(1, order, rf); }};
  return e;
}

CatalogEntry product_spheres_entry(const std::map<std::string, double>& params) {
  auto p = with_defaults(params, {{"p", 2}, {"q", 2}, {"a", 1}, {"b", 1}}, "product_spheres");
  auto factor_dim = [&](const char* key) {
    double v = p.at(key);
    int d = static_cast<int>(std::lround(v));
    if (std::abs(v - d) > 1e-9 || d < 1 || d >= kMaxVars)
      throw CatalogError(std::string("factor dimension '") + key + "' must be an integer in 1.." +
                         std::to_string(kMaxVars - 1));
    return d;
  };
  const int dp = factor_dim("p"), dq = factor_dim("q");
  const double a = p.at("a"), b = p.at("b");
  if (a <= 0 || b <= 0) throw CatalogError("sphere scales must be positive");
  const int n = dp + dq;
  if (n > kMaxVars) throw CatalogError("total dimension exceeds " + std::to_string(kMaxVars));
  CatalogEntry e;
  e.name = "product_spheres";
  e.n = n;
  e.params = p;
  e.chart = MetricChart(n, "product_spheres");
  e.chart.bindings.params["a2"] = a * a;
  e.chart.bindings.params["b2"] = b * b;
  const std::string fa =
      dp >= 2 ? "4*a2/(1+" + sum_of_squares(1, dp) + ")^2" : std::string("a2");
  const std::string fb =
      dq >= 2 ? "4*b2/(1+" + sum_of_squares(dp + 1, n) + ")^2" : std::string("b2");
  for (int i = 0; i < dp; ++i) e.chart.set_component(i, i, parse_expr(fa));
  for (int i = dp; i < n; ++i) e.chart.set_component(i, i, parse_expr(fb));
  fill_zero_offdiag(e.chart);
  Domain d;
  d.groups.push_back({0, dp, true, 0, 0, 1.0});
  d.groups.push_back({dp, dq, true, 0, 0, 1.0});
  e.chart.domain = d;
  const double la = (dp - 1) / (a * a), lb = (dq - 1) / (b * b);
  e.facts.scalar_curvature = dp * (dp - 1) / (a * a) + dq * (dq - 1) / (b * b);
  std::vector<double> eig;
  for (int i = 0; i < dp; ++i) eig.push_back(la);
  for (int i = 0; i < dq; ++i) eig.push_back(lb);
  std::sort(eig.begin(), eig.end());
  e.facts.ricci_eigenvalues = eig;
  if (std::abs(la - lb) < 1e-14) e.facts.einstein_factor = la;
  if (dp == 1 && dq == 1) {
    e.facts.flat = true;
    e.facts.weyl_zero = true;
    e.facts.lcf_flow_invariant = true;
  }
  return e;
}

CatalogEntry warped_entry(const std::map<std::string, double>& params) {
  auto p = with_defaults(params, {{"n", 4}, {"K", 1}, {"hk", 1}}, "warped_interval");
  const int n = dim_param(p);
  const double K = p.at("K");
  const int hk = static_cast<int>(std::lround(p.at("hk")));
  std::string h_src;
  double t_lo = -1, t_hi = 1;
  switch (hk) {
    case 0: h_src = "1"; break;
    case 1:
      h_src = "sin(x1)";
      t_lo = 0;
      t_hi = 3.141592653589793;
      break;
    case 2:
      h_src = "x1";
      t_lo = 0;
      t_hi = 2.2;
      break;
    case 3: h_src = "(exp(x1)+exp(0-x1))/2"; break;
    default: throw CatalogError("hk must be 0 (h=1), 1 (h=sin t), 2 (h=t) or 3 (h=cosh t)");
  }
  CatalogEntry e;
  e.name = "warped_interval";
  e.n = n;
  e.params = p;
  e.chart = warped_chart(n, K, h_src, t_lo, t_hi);
  e.chart.name = "warped_interval";
  e.facts.weyl_zero = true;  // warped over a constant-curvature fiber
  if (hk == 1 && K == 1) {
    e.facts.scalar_curvature = n * (n - 1);
    e.facts.einstein_factor = n - 1;
    e.facts.sectional = 1;
    e.facts.lcf_flow_invariant = true;
  } else if (hk == 3 && K == -1) {
    e.facts.scalar_curvature = -n * (n - 1);
    e.facts.einstein_factor = -(n - 1);
    e.facts.sectional = -1;
    e.facts.lcf_flow_invariant = true;
  } else if (hk == 2 && K == 1) {
    e.facts.flat = true;
    e.facts.scalar_curvature = 0;
    e.facts.lcf_flow_invariant = true;
  } else if (hk == 0) {
    e.facts.scalar_curvature = (n - 1) * (n - 2) * K;
    std::vector<double> eig(n, (n - 2) * K);
    eig[0] = 0;
    std::sort(eig.begin(), eig.end());
    e.facts.ricci_eigenvalues = eig;
    e.facts.lcf_flow_invariant = true;
  }
  e.warped = WarpedInfo{K, [hk](double t, int order) { return closed_form_h_jet(hk, t, order); }};
  return e;
}

CatalogEntry lcf_example_entry(const std::map<std::string, double>& params) {
  auto p = with_defaults(params, {{"n", 4}}, "lcf_example");
  const int n = dim_param(p);
  if (n < 3) throw CatalogError("lcf_example needs n >= 3");
  CatalogEntry e;
  e.name = "lcf_example";
  e.n = n;
  e.params = p;
  e.chart = MetricChart(n, "lcf_example");
  const std::string f = "1/(1+" + sum_of_squares(1, n - 1) + ")^2";
  for (int i = 0; i < n; ++i) e.chart.set_component(i, i, parse_expr(f));
  fill_zero_offdiag(e.chart);
  e.chart.domain = Domain::box(n, -1, 1);
  e.facts.weyl_zero = true;
  // radially symmetric conformal factor: the Ricci spectrum splits (n-1, 1),
  // so the eigenvalue quadratic is gated here as well
  e.facts.lcf_flow_invariant = true;
  return e;
}

CatalogEntry gaussian_entry(const std::map<std::string, double>& params) {
  auto p = with_defaults(params, {{"n", 4}, {"alpha", 1}}, "gaussian_soliton");
  const int n = dim_param(p);
  CatalogEntry e = euclidean_entry({{"n", static_cast<double>(n)}});
  e.name = "gaussian_soliton";
  e.params = p;
  e.chart.name = "gaussian_soliton";
  e.chart.bindings.params["alpha"] = p.at("alpha");
  SolitonSpec sp;
  sp.gradient = true;
  sp.f = parse_expr("alpha*" + sum_of_squares(1, n) + "/" + num(2.0 * n));
  sp.alpha = p.at("alpha");
  e.soliton = sp;
  return e;
}

CatalogEntry bryant_entry(const std::map<std::string, double>& params) {
  auto p = with_defaults(params, {{"n", 4}, {"L", 2}, {"tol", 1e-6}}, "bryant_profile");
  const int n = dim_param(p);
  const double L = p.at("L");
  auto prof = std::make_shared<BryantProfile>(bryant_solve(n, L, p.at("tol")));
  CatalogEntry e;
  e.name = "bryant_profile";
  e.n = n;
  e.params = p;
  e.bryant = prof;
  e.chart = warped_chart(n, 1.0, "h", 0.0, L);
  e.chart.name = "bryant_profile";
  e.chart.bindings.profiles["h"] = bryant_h_profile(prof);
  e.chart.bindings.profiles["fpot"] = bryant_fpot_profile(prof);
  e.facts.weyl_zero = true;
  e.facts.lcf_flow_invariant = true;
  SolitonSpec sp;
  sp.gradient = true;
  sp.f = parse_expr("fpot");
  sp.alpha = 0;
  e.soliton = sp;
  e.warped = WarpedInfo{1.0, [prof](double t, int order) { return prof->h_jet(t, order); }};
  // numeric-profile entries run the soliton-structure checks at the budget
  // of the interpolated profile rather than at closed-form tightness
  e.check_tolerance["grad_soliton_divergence"] = 1e-5;
  e.check_tolerance["radial_weyl_zero"] = 1e-5;
  e.check_tolerance["eigen_quadratic"] = 1e-6;
  e.check_tolerance["known_facts"] = 1e-6;
  e.check_tolerance["warped_ricci"] = 1e-6;
  return e;
}

CatalogEntry perturbed_flat_entry(const std::map<std::string, double>& params) {
  auto p = with_defaults(params, {{"n", 4}, {"eps", 0.1}}, "perturbed_flat");
  const int n = dim_param(p);
  const double eps = p.at("eps");
  CatalogEntry e;
  e.name = "perturbed_flat";
  e.n = n;
  e.params = p;
  e.chart = MetricChart(n, "perturbed_flat");
  e.chart.bindings.params["eps"] = eps;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const int u = (i + j) % n + 1;
      const int v = (2 * i + j) % n + 1;
      const int w = (i + 2 * j + 1) % n + 1;
      const double c2 = 0.3 + 0.05 * ((3 * i + 5 * j) % 7);
      const double c1 = 0.2 + 0.05 * ((2 * i + 3 * j) % 5);
      std::string s = num(c2) + "*x" + std::to_string(u) + "*x" + std::to_string(v) + " + " +
                      num(c1) + "*x" + std::to_string(w);
      if (i == j)
        e.chart.set_component(i, i, parse_expr("1 + eps*(" + s + ")"));
      else
        e.chart.set_component(i, j, parse_expr("eps*(" + s + ")"));
    }
  }
  e.chart.domain = Domain::box(n, -1, 1);
  return e;
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"euclidean",       "sphere",      "hyperbolic",       "cylinder_RxS",
          "product_spheres", "warped_interval", "lcf_example",  "gaussian_soliton",
          "bryant_profile",  "perturbed_flat"};
}

CatalogEntry get_metric(const std::string& name, const std::map<std::string, double>& params) {
  CatalogEntry e;
  if (name == "euclidean") e = euclidean_entry(params);
  else if (name == "sphere") e = sphere_entry(params);
  else if (name == "hyperbolic") e = hyperbolic_entry(params);
  else if (name == "cylinder_RxS") e = cylinder_entry(params);
  else if (name == "product_spheres") e = product_spheres_entry(params);
  else if (name == "warped_interval") e = warped_entry(params);
  else if (name == "lcf_example") e = lcf_example_entry(params);
  else if (name == "gaussian_soliton") e = gaussian_entry(params);
  else if (name == "bryant_profile") e = bryant_entry(params);
  else if (name == "perturbed_flat") e = perturbed_flat_entry(params);
  else throw CatalogError("unknown metric family '" + name + "'");
  e.label = make_label(e.name, e.params);
  return e;
}

CatalogEntry parse_metric_selector(const std::string& selector) {
  std::string name = selector;
  std::map<std::string, double> params;
  if (auto colon = selector.find(':'); colon != std::string::npos) {
    name = selector.substr(0, colon);
    std::string rest = selector.substr(colon + 1);
    std::istringstream is(rest);
    std::string item;
    while (std::getline(is, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw CatalogError("bad metric selector item '" + item + "' (want key=value)");
      const std::string key = item.substr(0, eq);
      char* end = nullptr;
      const std::string vs = item.substr(eq + 1);
      double v = std::strtod(vs.c_str(), &end);
      if (end == vs.c_str() || *end != '\0')
        throw CatalogError("bad numeric value in metric selector: '" + vs + "'");
      params[key] = v;
    }
  }
  return get_metric(name, params);
}

namespace {

double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0, r = 0.0;
  while (i) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

constexpr int kPrimes[kMaxVars] = {2, 3, 5, 7, 11, 13};

}  // namespace

std::vector<std::vector<double>> sample_points(const CatalogEntry& entry, int count,
                                               std::uint64_t seed) {
  if (count < 1) throw CatalogError("sample count must be >= 1");
  const int n = entry.n;
  std::vector<std::vector<double>> out;
  out.reserve(count);
  std::uint64_t idx = (seed % (1u << 20)) * 4096 + 1;
  while (static_cast<int>(out.size()) < count) {
    std::vector<double> u(n);
    for (int d = 0; d < n; ++d) u[d] = radical_inverse(idx, kPrimes[d]);
    ++idx;
    std::vector<double> x(n);
    bool ok = true;
    for (const auto& g : entry.chart.domain.groups) {
      if (g.ball) {
        double r2 = 0;
        const double R = 0.8 * g.radius;
        for (int i = 0; i < g.count; ++i) {
          x[g.start + i] = (2 * u[g.start + i] - 1) * R;
          r2 += x[g.start + i] * x[g.start + i];
        }
        if (r2 > R * R) {
          ok = false;
          break;
        }
      } else {
        const double c = 0.5 * (g.lo + g.hi), half = 0.5 * (g.hi - g.lo);
        for (int i = 0; i < g.count; ++i)
          x[g.start + i] = c + (2 * u[g.start + i] - 1) * 0.8 * half;
      }
    }
    if (ok) out.push_back(std::move(x));
  }
  return out;
}

std::vector<CatalogEntry> default_catalog() {
  std::vector<CatalogEntry> out;
  out.push_back(get_metric("euclidean", {{"n", 4}}));
  out.push_back(get_metric("sphere", {{"n", 4}, {"r", 1}}));
  out.push_back(get_metric("sphere", {{"n", 3}, {"r", 1}}));
  out.push_back(get_metric("hyperbolic", {{"n", 4}, {"r", 1}}));
  out.push_back(get_metric("cylinder_RxS", {{"n", 4}, {"K", 1}}));
  out.push_back(get_metric("product_spheres", {{"p", 2}, {"q", 2}, {"a", 1}, {"b", 1}}));
  out.push_back(get_metric("warped_interval", {{"n", 4}, {"hk", 1}, {"K", 1}}));
  out.push_back(get_metric("warped_interval", {{"n", 4}, {"hk", 3}, {"K", -1}}));
  out.push_back(get_metric("lcf_example", {{"n", 4}}));
  out.push_back(get_metric("gaussian_soliton", {{"n", 4}, {"alpha", 1}}));
  out.push_back(get_metric("perturbed_flat", {{"n", 4}, {"eps", 0.1}}));
  out.push_back(get_metric("perturbed_flat", {{"n", 3}, {"eps", 0.1}}));
  out.push_back(get_metric("bryant_profile", {{"n", 4}, {"L", 2}, {"tol", 1e-6}}));
  return out;
}

std::string catalog_document(const CatalogEntry& entry) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"name\":\"" << entry.name << "\",\"label\":\"" << entry.label
     << "\",\"n\":" << entry.n << ",\"parameters\":{";
  bool first = true;
  for (const auto& [k, v] : entry.params) {
    if (!first) os << ",";
    first = false;
    os << "\"" << k << "\":" << v;
  }
  os << "},\"components\":{";
  first = true;
  for (int i = 0; i < entry.n; ++i)
    for (int j = i; j < entry.n; ++j) {
      if (!first) os << ",";
      first = false;
      os << "\"g_" << (i + 1) << "_" << (j + 1) << "\":\""
         << entry.chart.component(i, j).source() << "\"";
    }
  os << "},\"profiles\":[";
  first = true;
  for (const auto& [k, v] : entry.chart.bindings.profiles) {
    if (!first) os << ",";
    first = false;
    os << "\"" << k << "\"";
  }
  os << "],\"domain\":[";
  first = true;
  for (const auto& g : entry.chart.domain.groups) {
    if (!first) os << ",";
    first = false;
    if (g.ball)
      os << "{\"type\":\"ball\",\"start\":" << g.start << ",\"count\":" << g.count
         << ",\"radius\":" << g.radius << "}";
    else
      os << "{\"type\":\"interval\",\"start\":" << g.start << ",\"count\":" << g.count
         << ",\"lo\":" << g.lo << ",\"hi\":" << g.hi << "}";
  }
  os << "]}";
  return os.str();
}

std::optional<SolitonData> make_soliton_data(const CatalogEntry& entry) {
  if (!entry.soliton) return std::nullopt;
  SolitonData d;
  d.chart = entry.chart;
  d.gradient = entry.soliton->gradient;
  d.f = entry.soliton->f;
  d.omega = entry.soliton->omega;
  d.alpha = entry.soliton->alpha;
  return d;
}

}  // namespace weylflow
