#include "weylflow/soliton.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace weylflow {

Tensor soliton_residual(const SolitonData& data, std::span<const double> p) {
  const int n = data.chart.n;
  JetCurvature jc(data.chart, p, 2, false);
  Tensor res(n, {Variance::Dn, Variance::Dn});
  Tensor second(n, {Variance::Dn, Variance::Dn});
  if (data.gradient) {
    Jet fj = eval_jet(data.f, p, 2, data.chart.bindings);
    JetField fld(n, 0, 2);
    fld.c[0] = fj;
    JetField d2 = covariant_derivative(covariant_derivative(fld, jc), jc);
    second = d2.values({Variance::Dn, Variance::Dn});
  } else {
    if (static_cast<int>(data.omega.size()) != n)
      throw SolitonError("1-form needs one component per coordinate");
    second = sym_covariant_oneform(data.chart, p, data.omega);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      res(i, j) = jc.ric[static_cast<size_t>(i) * n + j].value() + second(i, j) -
                  (data.alpha / n) * jc.g_at(i, j).value();
  return res;
}

EigenStructure classify_eigenstructure(const CurvaturePack& pack) {
  const int n = pack.metric.dim();
  EigenStructure out;
  std::vector<std::vector<double>> vecs;
  generalized_sym_eig(pack.ric, pack.metric, out.eigenvalues, vecs);
  const double scale = std::max(std::abs(out.eigenvalues.front()),
                                std::abs(out.eigenvalues.back()));
  const double gap = 1e-6 * std::max(scale, kResidualFloor);
  out.cluster_values.clear();
  out.multiplicities.clear();
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || out.eigenvalues[i] - out.eigenvalues[i - 1] > gap) {
      double mean = 0;
      for (int k = start; k < i; ++k) mean += out.eigenvalues[k];
      out.cluster_values.push_back(mean / (i - start));
      out.multiplicities.push_back(i - start);
      start = i;
    }
  }
  // flag splits sitting near the clustering threshold
  for (int i = 1; i < n; ++i) {
    const double d = out.eigenvalues[i] - out.eigenvalues[i - 1];
    if (d > gap && d < 10 * gap) {
      std::ostringstream os;
      os << "near-degenerate gap " << d << " close to threshold " << gap;
      out.diagnostics = os.str();
    }
  }
  if (out.cluster_values.size() == 1) {
    out.pattern = RicciPattern::Proportional;
    out.simple_value = out.repeated_value = out.cluster_values[0];
  } else if (out.cluster_values.size() == 2 &&
             std::max(out.multiplicities[0], out.multiplicities[1]) == n - 1) {
    out.pattern = RicciPattern::Split;
    if (out.multiplicities[0] == 1) {
      out.simple_value = out.cluster_values[0];
      out.repeated_value = out.cluster_values[1];
    } else {
      out.simple_value = out.cluster_values[1];
      out.repeated_value = out.cluster_values[0];
    }
  } else {
    out.pattern = RicciPattern::Other;
  }
  return out;
}

Tensor warped_ricci(int n, double K, const Jet& h_at_t, std::span<const double> point) {
  const double h = h_at_t.value();
  if (h <= 0) throw SolitonError("warp factor must be positive");
  const double hp = h_at_t.deriv1(0);
  const double hpp = h_at_t.deriv2(0, 0);
  Tensor ric(n, {Variance::Dn, Variance::Dn});
  ric(0, 0) = -(n - 1) * hpp / h;
  double y2 = 0;
  for (int a = 1; a < n; ++a) y2 += point[a] * point[a];
  const double conf = 4.0 / ((1 + K * y2) * (1 + K * y2));
  const double coeff = (n - 2) * K - h * hpp - (n - 2) * hp * hp;
  for (int a = 1; a < n; ++a) ric(a, a) = coeff * conf;
  return ric;
}

MetricChart warped_chart(int n, double K, const std::string& h_src, double t_lo, double t_hi) {
  MetricChart chart(n, "warped");
  chart.bindings.params["K"] = K;
  chart.set_component(0, 0, parse_expr("1"));
  std::string y2 = "(";
  for (int a = 2; a <= n; ++a) {
    if (a > 2) y2 += "+";
    y2 += "x" + std::to_string(a) + "^2";
  }
  y2 += ")";
  const std::string fiber = "(" + h_src + ")^2 * 4/(1 + K*" + y2 + ")^2";
  for (int a = 1; a < n; ++a) chart.set_component(a, a, parse_expr(fiber));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) chart.set_component(i, j, parse_expr("0"));
  Domain d;
  d.groups.push_back({0, 1, false, t_lo, t_hi, 0});
  const double fiber_radius = K < 0 ? std::sqrt(-1.0 / K) : 1.0;
  d.groups.push_back({1, n - 1, true, 0, 0, fiber_radius});
  chart.domain = d;
  return chart;
}

std::array<double, 3> bryant_rhs(int n, const std::array<double, 3>& s) {
  const double h = s[0], k = s[1], phi = s[2];
  const double hpp = ((n - 2) * (1 - k * k) + h * k * phi) / h;
  return {k, hpp, (n - 1) * hpp / h};
}

namespace {

// Cubic Hermite for (value, slope) data on [t0, t1].
double hermite(double t0, double y0, double d0, double t1, double y1, double d1, double t) {
  const double w = t1 - t0;
  const double s = (t - t0) / w;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * w * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * w * d1;
}

// Taylor coefficients of (h, f) at a state point, generated from the steady
// system itself so every supplied derivative is ODE-consistent.
void taylor_from_state(int n, double h0, double k0, double phi0, double f0,
                       std::array<double, 5>& hc, std::array<double, 5>& fc) {
  Jet H = Jet::constant(1, 4, h0);
  Jet K = Jet::constant(1, 4, k0);
  Jet Phi = Jet::constant(1, 4, phi0);
  hc = {h0, 0, 0, 0, 0};
  std::array<double, 5> kc = {k0, 0, 0, 0, 0};
  std::array<double, 5> pc = {phi0, 0, 0, 0, 0};
  fc = {f0, 0, 0, 0, 0};
  for (int m = 0; m <= 3; ++m) {
    Jet F = ((n - 2) * (1.0 - K * K) + H * K * Phi) / H;
    Jet G = (n - 1) * F / H;
    hc[m + 1] = kc[m] / (m + 1);
    kc[m + 1] = F.coeff(m) / (m + 1);
    pc[m + 1] = G.coeff(m) / (m + 1);
    fc[m + 1] = pc[m] / (m + 1);
    H.coeff(m + 1) = hc[m + 1];
    K.coeff(m + 1) = kc[m + 1];
    Phi.coeff(m + 1) = pc[m + 1];
  }
}

Jet univariate_from_coeffs(std::span<const double> c, int order) {
  Jet j(1, order);
  for (int m = 0; m <= order; ++m) j.coeff(m) = c[m];
  return j;
}

// Embeds a univariate jet in t as an n-variable jet in x1.
Jet embed_in_first_coordinate(const Jet& uni, int nvars, int order) {
  Jet out(nvars, order);
  const auto& table = multi_index_table(nvars);
  for (int m = 0; m <= order; ++m) {
    std::array<int, kMaxVars> a{};
    a[0] = m;
    out.coeff(table.index_of(std::span<const int>(a.data(), nvars))) = uni.coeff(m);
  }
  return out;
}

struct CapSeries {
  double a3, a5, b1, b3;
};

CapSeries cap_series(int n) {
  // Dilation gauge: Ric = g at the cap, i.e. f''(0) = -1.
  CapSeries s{};
  s.a3 = -1.0 / (6.0 * (n - 1));
  s.a5 = 3.0 * (13 * n - 10) * s.a3 * s.a3 / (10.0 * (n + 2));
  s.b1 = 6.0 * (n - 1) * s.a3;
  s.b3 = (n - 1) * (20 * s.a5 - 6 * s.a3 * s.a3) / 3.0;
  return s;
}

std::array<double, 4> cap_state(const CapSeries& s, double t) {
  const double t2 = t * t;
  return {
      t * (1 + t2 * (s.a3 + t2 * s.a5)),
      1 + t2 * (3 * s.a3 + 5 * s.a5 * t2),
      t * (s.b1 + s.b3 * t2),
      t2 * (s.b1 / 2 + s.b3 * t2 / 4),
  };
}

}  // namespace

std::array<double, 4> BryantProfile::state_at(double t) const {
  if (t <= t_start) {
    CapSeries s{cap_a3, cap_a5, 6 * (n - 1) * cap_a3,
                (n - 1) * (20 * cap_a5 - 6 * cap_a3 * cap_a3) / 3.0};
    return cap_state(s, t);
  }
  if (t >= ts.back()) return states.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  size_t hi = std::max<size_t>(1, static_cast<size_t>(it - ts.begin()));
  size_t lo = hi - 1;
  const auto& s0 = states[lo];
  const auto& s1 = states[hi];
  auto r0 = bryant_rhs(n, {s0[0], s0[1], s0[2]});
  auto r1 = bryant_rhs(n, {s1[0], s1[1], s1[2]});
  std::array<double, 4> out{};
  out[0] = hermite(ts[lo], s0[0], s0[1], ts[hi], s1[0], s1[1], t);
  out[1] = hermite(ts[lo], s0[1], r0[1], ts[hi], s1[1], r1[1], t);
  out[2] = hermite(ts[lo], s0[2], r0[2], ts[hi], s1[2], r1[2], t);
  out[3] = hermite(ts[lo], s0[3], s0[2], ts[hi], s1[3], s1[2], t);
  return out;
}

Jet BryantProfile::h_jet(double t, int order) const {
  auto s = state_at(t);
  std::array<double, 5> hc{}, fc{};
  taylor_from_state(n, s[0], s[1], s[2], s[3], hc, fc);
  return univariate_from_coeffs(std::span<const double>(hc.data(), 5), order);
}

Jet BryantProfile::fpot_jet(double t, int order) const {
  auto s = state_at(t);
  std::array<double, 5> hc{}, fc{};
  taylor_from_state(n, s[0], s[1], s[2], s[3], hc, fc);
  return univariate_from_coeffs(std::span<const double>(fc.data(), 5), order);
}

ProfileFn BryantProfile::h_profile() const {
  const BryantProfile* self = this;
  return [self](std::span<const double> point, int order) {
    return embed_in_first_coordinate(self->h_jet(point[0], order), static_cast<int>(point.size()),
                                     order);
  };
}

ProfileFn BryantProfile::fpot_profile() const {
  const BryantProfile* self = this;
  return [self](std::span<const double> point, int order) {
    return embed_in_first_coordinate(self->fpot_jet(point[0], order),
                                     static_cast<int>(point.size()), order);
  };
}

ProfileFn bryant_h_profile(std::shared_ptr<const BryantProfile> prof) {
  return [prof](std::span<const double> point, int order) {
    return embed_in_first_coordinate(prof->h_jet(point[0], order),
                                     static_cast<int>(point.size()), order);
  };
}

ProfileFn bryant_fpot_profile(std::shared_ptr<const BryantProfile> prof) {
  return [prof](std::span<const double> point, int order) {
    return embed_in_first_coordinate(prof->fpot_jet(point[0], order),
                                     static_cast<int>(point.size()), order);
  };
}

BryantProfile bryant_solve(int n, double L, double tol) {
  if (n < 4) throw SolitonError("profile requires dimension >= 4");
  if (L <= 0) throw SolitonError("profile half-length must be positive");
  const CapSeries s = cap_series(n);
  BryantProfile prof;
  prof.n = n;
  prof.L = L;
  prof.t_start = 1e-4;
  prof.cap_a3 = s.a3;
  prof.cap_a5 = s.a5;

  const double dt_target = 2e-4;
  const int steps = std::max(1, static_cast<int>(std::ceil((L - prof.t_start) / dt_target)));
  const double dt = (L - prof.t_start) / steps;

  std::array<double, 4> state = cap_state(s, prof.t_start);
  double t = prof.t_start;
  prof.ts.push_back(t);
  prof.states.push_back(state);
  auto deriv = [&](const std::array<double, 4>& u) {
    auto r = bryant_rhs(n, {u[0], u[1], u[2]});
    return std::array<double, 4>{r[0], r[1], r[2], u[2]};
  };
  for (int i = 0; i < steps; ++i) {
    auto k1 = deriv(state);
    std::array<double, 4> u2{}, u3{}, u4{};
    for (int c = 0; c < 4; ++c) u2[c] = state[c] + 0.5 * dt * k1[c];
    auto k2 = deriv(u2);
    for (int c = 0; c < 4; ++c) u3[c] = state[c] + 0.5 * dt * k2[c];
    auto k3 = deriv(u3);
    for (int c = 0; c < 4; ++c) u4[c] = state[c] + dt * k3[c];
    auto k4 = deriv(u4);
    for (int c = 0; c < 4; ++c)
      state[c] += dt / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    t = prof.t_start + (i + 1) * dt;
    if (!(state[0] > 0) || !(state[1] > 0)) {
      std::ostringstream os;
      os << "integration failure at t = " << t << " (h = " << state[0] << ", h' = " << state[1]
         << ")";
      throw SolitonError(os.str());
    }
    prof.ts.push_back(t);
    prof.states.push_back(state);
  }

  // certify by pushing the profile through the full curvature pipeline
  MetricChart chart = warped_chart(n, 1.0, "h", 0.0, L);
  chart.name = "bryant";
  chart.bindings.profiles["h"] = prof.h_profile();
  SolitonData data;
  data.chart = chart;
  data.gradient = true;
  data.f = parse_expr("fpot");
  data.chart.bindings.profiles["fpot"] = prof.fpot_profile();
  data.alpha = 0;
  for (double tc : {0.2 * L, 0.5 * L, 0.8 * L}) {
    std::vector<double> p(n, 0.0);
    p[0] = tc;
    for (int a = 1; a < n; ++a) p[a] = 0.05 * a;
    Tensor res = soliton_residual(data, p);
    Tensor g = data.chart.metric(p);
    const double rel = max_abs(res) / std::max(max_abs(g), kResidualFloor);
    if (rel > tol) {
      std::ostringstream os;
      os << "soliton residual " << rel << " exceeds " << tol << " at t = " << tc;
      throw SolitonError(os.str());
    }
  }
  return prof;
}

GradientIdentityResiduals gradient_identity_residuals(const SolitonData& data,
                                                      std::span<const double> p) {
  if (!data.gradient) throw SolitonError("gradient identities need gradient data");
  const int n = data.chart.n;
  JetCurvature jc(data.chart, p, 3, n >= 3);
  Jet fj = eval_jet(data.f, p, 3, data.chart.bindings);

  GradientIdentityResiduals out;

  std::vector<double> df(n), gradf(n);
  for (int i = 0; i < n; ++i) df[i] = fj.deriv1(i);
  for (int l = 0; l < n; ++l) {
    double s = 0;
    for (int k = 0; k < n; ++k) s += jc.ginv_val(l, k) * df[k];
    gradf[l] = s;
  }
  auto ric_v = [&](int i, int j) { return jc.ric[static_cast<size_t>(i) * n + j].value(); };

  // dR_i = 2 R_il grad^l f
  double diff = 0, scale = 0;
  for (int i = 0; i < n; ++i) {
    const double dRi = jc.scalar.deriv1(i);
    double rhs = 0;
    for (int l = 0; l < n; ++l) rhs += 2 * ric_v(i, l) * gradf[l];
    diff = std::max(diff, std::abs(dRi - rhs));
    scale = std::max({scale, std::abs(dRi), std::abs(rhs)});
  }
  out.div_res = diff / std::max(scale, 1.0);

  // radial identity, valid on locally conformally flat data
  if (n >= 3) {
    double wmax = 0, rmax = 0;
    for (const auto& j : jc.weyl) wmax = std::max(wmax, std::abs(j.value()));
    for (const auto& j : jc.riem) rmax = std::max(rmax, std::abs(j.value()));
    if (wmax <= 1e-8 * rmax + kResidualFloor) {
      out.radial_applicable = true;
      double fnorm2 = 0;
      for (int i = 0; i < n; ++i) fnorm2 += df[i] * gradf[i];
      if (fnorm2 > 1e-20) {
        // g-orthonormal frame starting from u = grad f / |grad f|
        std::vector<std::vector<double>> frame;
        std::vector<double> u = gradf;
        auto inner = [&](const std::vector<double>& a, const std::vector<double>& b) {
          double s = 0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += jc.g_at(i, j).value() * a[i] * b[j];
          return s;
        };
        double nu = std::sqrt(inner(u, u));
        for (auto& x : u) x /= nu;
        frame.push_back(u);
        for (int axis = 0; axis < n && static_cast<int>(frame.size()) < n; ++axis) {
          std::vector<double> v(n, 0.0);
          v[axis] = 1.0;
          for (const auto& e : frame) {
            const double c = inner(v, e);
            for (int i = 0; i < n; ++i) v[i] -= c * e[i];
          }
          const double nv2 = inner(v, v);
          if (nv2 < 1e-12) continue;
          const double nv = std::sqrt(nv2);
          for (auto& x : v) x /= nv;
          frame.push_back(v);
        }
        auto riem_v = [&](int i, int j, int k, int l) {
          return jc.riem[((static_cast<size_t>(i) * n + j) * n + k) * n + l].value();
        };
        double rdiff = 0, rscale = 0;
        for (size_t e = 1; e < frame.size(); ++e) {
          const auto& v = frame[e];
          double lhs = 0, rhs = 0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                  lhs += riem_v(a, b, c, d) * u[a] * v[b] * u[c] * gradf[d];
          for (int b = 0; b < n; ++b)
            for (int d = 0; d < n; ++d) rhs += ric_v(b, d) * v[b] * gradf[d] / (n - 1);
          rdiff = std::max(rdiff, std::abs(lhs - rhs));
          rscale = std::max({rscale, std::abs(lhs), std::abs(rhs)});
        }
        out.radial_res = rdiff / std::max(rscale, 1.0);
      } else {
        out.radial_res = 0;  // vanishing gradient: both sides are zero
      }
    }
  }
  return out;
}

}  // namespace weylflow
