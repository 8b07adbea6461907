#include "weylflow/chart.hpp"

#include <cmath>

namespace weylflow {

Domain Domain::box(int n, double lo, double hi) {
  Domain d;
  d.groups.push_back({0, n, false, lo, hi, 0});
  return d;
}

Domain Domain::ball(int n, double radius) {
  Domain d;
  d.groups.push_back({0, n, true, 0, 0, radius});
  return d;
}

bool Domain::contains(std::span<const double> p) const {
  for (const auto& g : groups) {
    if (g.ball) {
      double r2 = 0;
      for (int i = 0; i < g.count; ++i) r2 += p[g.start + i] * p[g.start + i];
      if (r2 >= g.radius * g.radius) return false;
    } else {
      for (int i = 0; i < g.count; ++i) {
        double x = p[g.start + i];
        if (x <= g.lo || x >= g.hi) return false;
      }
    }
  }
  return true;
}

MetricChart::MetricChart(int n, std::string name)
    : n(n), name(std::move(name)), comps(static_cast<size_t>(n) * n) {
  domain = Domain::box(n, -1, 1);
}

void MetricChart::set_component(int i, int j, Expr e) {
  if (e.max_coord() > n)
    throw EvalError("component references coordinate x" + std::to_string(e.max_coord()) +
                        " beyond dimension " + std::to_string(n),
                    0);
  comps[static_cast<size_t>(i) * n + j] = e;
  comps[static_cast<size_t>(j) * n + i] = std::move(e);
}

std::vector<Jet> MetricChart::metric_jets(std::span<const double> p, int order) const {
  std::vector<Jet> g(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Jet jij = eval_jet(component(i, j), p, order, bindings);
      g[static_cast<size_t>(i) * n + j] = jij;
      if (j != i) g[static_cast<size_t>(j) * n + i] = std::move(jij);
    }
  }
  return g;
}

Tensor MetricChart::metric(std::span<const double> p) const {
  Tensor g(n, {Variance::Dn, Variance::Dn});
  auto jets = metric_jets(p, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = jets[static_cast<size_t>(i) * n + j].value();
  return g;
}

bool MetricChart::positive_definite(std::span<const double> p) const {
  Tensor g = metric(p);
  std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = g(i, j);
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0) return false;
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  return true;
}

}  // namespace weylflow
