#include "weylflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace weylflow {

namespace {

std::string sum_of_squares(int from, int to) {
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
    for (int j = i + 1; j < chart.n; ++j) chart.set_component(i, j, parse_expr("0"));
}

}  // namespace

FlowFamily FlowFamily::round_sphere(int n) {
  if (n < 2 || n > kMaxVars) throw FlowError("round_sphere dimension out of range");
  FlowFamily f;
  f.kind = FamilyKind::RoundSphere;
  f.n = n;
  return f;
}

FlowFamily FlowFamily::product_spheres(int p, int q) {
  if (p < 1 || q < 1 || p + q > kMaxVars) throw FlowError("product factor dimensions out of range");
  FlowFamily f;
  f.kind = FamilyKind::ProductSpheres;
  f.p = p;
  f.q = q;
  f.n = p + q;
  return f;
}

FlowFamily FlowFamily::cylinder(int n) {
  if (n < 3 || n > kMaxVars) throw FlowError("cylinder dimension out of range");
  FlowFamily f;
  f.kind = FamilyKind::Cylinder;
  f.n = n;
  return f;
}

std::string FlowFamily::name() const {
  switch (kind) {
    case FamilyKind::RoundSphere: return "round_sphere";
    case FamilyKind::ProductSpheres: return "product_spheres";
    case FamilyKind::Cylinder: return "cylinder";
  }
  return "?";
}

int FlowFamily::state_size() const { return kind == FamilyKind::RoundSphere ? 1 : 2; }

std::vector<std::string> FlowFamily::state_names() const {
  switch (kind) {
    case FamilyKind::RoundSphere: return {"r2"};
    case FamilyKind::ProductSpheres: return {"a2", "b2"};
    case FamilyKind::Cylinder: return {"c", "r2"};
  }
  return {};
}

std::vector<double> FlowFamily::rhs(std::span<const double> state) const {
  (void)state;
  switch (kind) {
    case FamilyKind::RoundSphere:
      return {-2.0 * (n - 1)};
    case FamilyKind::ProductSpheres:
      return {-2.0 * (p - 1), -2.0 * (q - 1)};
    case FamilyKind::Cylinder:
      return {0.0, -2.0 * (n - 2)};
  }
  return {};
}

MetricChart FlowFamily::chart(std::span<const double> state) const {
  switch (kind) {
    case FamilyKind::RoundSphere: {
      MetricChart c(n, "round_sphere");
      c.bindings.params["s1"] = state[0];
      const std::string f = "4*s1/(1+" + sum_of_squares(1, n) + ")^2";
      for (int i = 0; i < n; ++i) c.set_component(i, i, parse_expr(f));
      fill_zero_offdiag(c);
      c.domain = Domain::ball(n, 1.0);
      return c;
    }
    case FamilyKind::ProductSpheres: {
      MetricChart c(n, "product_spheres");
      c.bindings.params["s1"] = state[0];
      c.bindings.params["s2"] = state[1];
      const std::string fa = p >= 2 ? "4*s1/(1+" + sum_of_squares(1, p) + ")^2" : std::string("s1");
      const std::string fb =
          q >= 2 ? "4*s2/(1+" + sum_of_squares(p + 1, n) + ")^2" : std::string("s2");
      for (int i = 0; i < p; ++i) c.set_component(i, i, parse_expr(fa));
      for (int i = p; i < n; ++i) c.set_component(i, i, parse_expr(fb));
      fill_zero_offdiag(c);
      Domain d;
      d.groups.push_back({0, p, true, 0, 0, 1.0});
      d.groups.push_back({p, q, true, 0, 0, 1.0});
      c.domain = d;
      return c;
    }
    case FamilyKind::Cylinder: {
      MetricChart c(n, "cylinder");
      c.bindings.params["s1"] = state[0];
      c.bindings.params["s2"] = state[1];
      c.set_component(0, 0, parse_expr("s1"));
      const std::string f = "4*s2/(1+" + sum_of_squares(2, n) + ")^2";
      for (int i = 1; i < n; ++i) c.set_component(i, i, parse_expr(f));
      fill_zero_offdiag(c);
      Domain d;
      d.groups.push_back({0, 1, false, -1, 1, 0});
      d.groups.push_back({1, n - 1, true, 0, 0, 1.0});
      c.domain = d;
      return c;
    }
  }
  throw FlowError("bad family");
}

double reduction_residual(const FlowFamily& family, std::span<const double> state,
                          std::span<const double> point) {
  MetricChart chart = family.chart(state);
  JetCurvature jc(chart, point, 2, false);
  const int n = family.n;
  // the embedding is affine in the state, so unit finite differences of the
  // chart metric reproduce the exact shape derivatives dg/ds_i
  std::vector<Tensor> shapes;
  const auto rhs = family.rhs(state);
  Tensor g0 = chart.metric(point);
  for (size_t i = 0; i < rhs.size(); ++i) {
    std::vector<double> s(state.begin(), state.end());
    s[i] += 1.0;
    Tensor g1 = family.chart(s).metric(point);
    g1 -= g0;
    shapes.push_back(g1);
  }
  double diff = 0, scale = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double lhs = -2.0 * jc.ric[static_cast<size_t>(i) * n + j].value();
      double rhsv = 0;
      for (size_t k = 0; k < rhs.size(); ++k) rhsv += rhs[k] * shapes[k](i, j);
      diff = std::max(diff, std::abs(lhs - rhsv));
      scale = std::max({scale, std::abs(lhs), std::abs(rhsv)});
    }
  return diff / std::max(scale, kResidualFloor);
}

FlowTrajectory integrate_flow(const FlowFamily& family, std::span<const double> g0, double dt,
                              int steps) {
  if (dt <= 0) throw FlowError("time step must be positive");
  if (static_cast<int>(g0.size()) != family.state_size())
    throw FlowError("state size mismatch for family " + family.name());
  for (double s : g0)
    if (s <= 0) throw FlowError("initial state must be positive");
  FlowTrajectory traj;
  traj.family = family;
  std::vector<double> state(g0.begin(), g0.end());
  traj.times.push_back(0.0);
  traj.states.push_back(state);
  const size_t m = state.size();
  auto rk4 = [&](std::vector<double>& s, double h) {
    auto k1 = family.rhs(s);
    std::vector<double> tmp(m);
    for (size_t c = 0; c < m; ++c) tmp[c] = s[c] + 0.5 * h * k1[c];
    auto k2 = family.rhs(tmp);
    for (size_t c = 0; c < m; ++c) tmp[c] = s[c] + 0.5 * h * k2[c];
    auto k3 = family.rhs(tmp);
    for (size_t c = 0; c < m; ++c) tmp[c] = s[c] + h * k3[c];
    auto k4 = family.rhs(tmp);
    for (size_t c = 0; c < m; ++c) s[c] += h / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
  };
  for (int i = 0; i < steps; ++i) {
    std::vector<double> next = state;
    rk4(next, dt);
    const double t_next = dt * (i + 1);
    bool dead = false;
    for (double s : next)
      if (s <= 1e-6) dead = true;
    if (dead) {
      // blow-up estimate by linear extrapolation of the vanishing scale
      auto f = family.rhs(state);
      double T = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < m; ++c)
        if (f[c] < 0) T = std::min(T, traj.times.back() + state[c] / (-f[c]));
      traj.blowup_time = T;
      traj.stopped_early = true;
      return traj;
    }
    state = next;
    traj.times.push_back(t_next);
    traj.states.push_back(state);
  }
  // forward estimate of the singular time for trajectories that stopped
  // before any scale collapsed
  auto f = family.rhs(state);
  double T = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < m; ++c)
    if (f[c] < 0) T = std::min(T, traj.times.back() + state[c] / (-f[c]));
  if (std::isfinite(T)) traj.blowup_time = T;
  return traj;
}

std::vector<double> FlowTrajectory::state_at(double t) const {
  if (times.empty()) throw FlowError("empty trajectory");
  if (t < times.front() - 1e-12 || t > times.back() + 1e-12)
    throw FlowError("time outside trajectory");
  auto it = std::upper_bound(times.begin(), times.end(), t);
  size_t idx = it == times.begin() ? 0 : static_cast<size_t>(it - times.begin()) - 1;
  std::vector<double> s = states[idx];
  double h = t - times[idx];
  if (std::abs(h) < 1e-15) return s;
  const size_t m = s.size();
  auto k1 = family.rhs(s);
  std::vector<double> tmp(m);
  for (size_t c = 0; c < m; ++c) tmp[c] = s[c] + 0.5 * h * k1[c];
  auto k2 = family.rhs(tmp);
  for (size_t c = 0; c < m; ++c) tmp[c] = s[c] + 0.5 * h * k2[c];
  auto k3 = family.rhs(tmp);
  for (size_t c = 0; c < m; ++c) tmp[c] = s[c] + h * k3[c];
  auto k4 = family.rhs(tmp);
  for (size_t c = 0; c < m; ++c) s[c] += h / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
  return s;
}

Tensor fd_time_derivative(const FlowTrajectory& traj, const StateQuantity& quantity, double t,
                          double h) {
  if (h <= 0) throw FlowError("finite-difference step must be positive");
  if (t - h < traj.times.front() - 1e-12 || t + h > traj.times.back() + 1e-12)
    throw FlowError("stencil outside trajectory");
  Tensor fwd = quantity(traj.state_at(t + h));
  Tensor bwd = quantity(traj.state_at(t - h));
  fwd -= bwd;
  fwd *= 1.0 / (2.0 * h);
  return fwd;
}

double riemann_norm(const FlowFamily& family, std::span<const double> state) {
  MetricChart chart = family.chart(state);
  std::vector<double> p(family.n);
  for (int i = 0; i < family.n; ++i) p[i] = 0.05 * (i + 1);
  JetCurvature jc(chart, p, 2, false);
  Tensor riem = jc.riemann_field().values(
      {Variance::Dn, Variance::Dn, Variance::Dn, Variance::Dn});
  Tensor ginv(family.n, {Variance::Up, Variance::Up});
  for (int i = 0; i < family.n; ++i)
    for (int j = 0; j < family.n; ++j) ginv(i, j) = jc.ginv_val(i, j);
  return std::sqrt(std::max(0.0, tensor_norm2(riem, ginv)));
}

SingularityReport singularity_type(const FlowTrajectory& traj) {
  SingularityReport rep;
  if (traj.times.size() < 4) {
    rep.note = "trajectory too short";
    return rep;
  }
  const auto& fam = traj.family;
  if (!traj.blowup_time) {
    // nothing is shrinking: curvature stays bounded for all time
    auto f = fam.rhs(traj.states.back());
    bool shrinking = false;
    for (double v : f)
      if (v < -1e-14) shrinking = true;
    if (!shrinking) {
      rep.kind = SingularityKind::NoSingularity;
      rep.note = "no contracting scale";
      return rep;
    }
    rep.note = "blow-up time not determined";
    return rep;
  }
  const double T = *traj.blowup_time;
  rep.T = T;
  const double t_last = traj.t_end();
  if (T - t_last > 1e-4) {
    rep.note = "trajectory stops short of the singular time";
    return rep;
  }
  // sample (T-t) max|Rm| over the last decade of T-t
  const double d_near = std::max(T - t_last, 1e-12);
  const double d_far = std::min(10.0 * d_near, 0.5 * T);
  std::vector<double> q;
  const int samples = 12;
  for (int i = 0; i < samples; ++i) {
    const double frac = static_cast<double>(i) / (samples - 1);
    const double gap = d_far * std::pow(d_near / d_far, frac);
    const double t = T - gap;
    if (t < traj.times.front() || t > t_last) continue;
    q.push_back(gap * riemann_norm(fam, traj.state_at(t)));
  }
  if (q.size() < 4) {
    rep.note = "not enough usable samples near the singular time";
    return rep;
  }
  const double qmax = *std::max_element(q.begin(), q.end());
  const double qmin = *std::min_element(q.begin(), q.end());
  if (qmax <= 0) {
    rep.kind = SingularityKind::NoSingularity;
    rep.note = "curvature vanishes";
    return rep;
  }
  const double variation = (qmax - qmin) / qmax;
  if (variation < 0.05) {
    rep.kind = SingularityKind::TypeI;
    rep.limit = q.back();
    return rep;
  }
  bool increasing = true;
  for (size_t i = 1; i < q.size(); ++i)
    if (q[i] <= q[i - 1]) increasing = false;
  if (increasing) {
    rep.kind = SingularityKind::TypeIIa;
    rep.note = "(T-t) max|Rm| grows toward the singular time";
    return rep;
  }
  rep.note = "nonmonotone (T-t) max|Rm| with variation above 5%";
  return rep;
}

}  // namespace weylflow
