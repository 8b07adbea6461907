#pragma once

#include <span>
#include <string>
#include <vector>

#include "weylflow/expr.hpp"
#include "weylflow/tensor.hpp"

namespace weylflow {

/// Coordinate domain of a chart: a list of groups, each either a per-axis
/// interval block or a ball over a block of consecutive coordinates.
/// Sampling stays in the central 80% of intervals and within 0.8 of ball
/// radii, keeping points away from chart singularities.
struct Domain {
  struct Group {
    int start = 0;
    int count = 0;
    bool ball = false;
    double lo = -1, hi = 1;  // interval groups
    double radius = 1;       // ball groups
  };
  std::vector<Group> groups;

  static Domain box(int n, double lo, double hi);
  static Domain ball(int n, double radius);
  bool contains(std::span<const double> p) const;
};

/// A named coordinate chart with metric components given as expressions.
struct MetricChart {
  int n = 0;
  std::string name;
  std::vector<Expr> comps;  // n*n, symmetric
  Bindings bindings;
  Domain domain;

  MetricChart() = default;
  MetricChart(int n, std::string name);

  void set_component(int i, int j, Expr e);
  const Expr& component(int i, int j) const { return comps[static_cast<size_t>(i) * n + j]; }

  /// Metric component jets at p; the (i,j) and (j,i) entries share one
  /// evaluation. Throws EvalError on domain violations.
  std::vector<Jet> metric_jets(std::span<const double> p, int order) const;

  /// Plain (0,2) metric tensor at p.
  Tensor metric(std::span<const double> p) const;

  /// True if the metric at p admits a Cholesky factorization.
  bool positive_definite(std::span<const double> p) const;
};

}  // namespace weylflow
