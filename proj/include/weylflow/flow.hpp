#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weylflow/geometry.hpp"

namespace weylflow {

struct FlowError : std::runtime_error {
  explicit FlowError(const std::string& what) : std::runtime_error(what) {}
};

enum class FamilyKind { RoundSphere, ProductSpheres, Cylinder };

/// A symmetry-reduced family whose Ricci flow dg/dt = -2 Ric closes into a
/// finite ODE on the scale parameters.
struct FlowFamily {
  FamilyKind kind = FamilyKind::RoundSphere;
  int n = 4;      // total dimension
  int p = 2, q = 2;  // product factor dimensions

  static FlowFamily round_sphere(int n);
  static FlowFamily product_spheres(int p, int q);
  static FlowFamily cylinder(int n);  // R x S^{n-1}

  std::string name() const;
  int state_size() const;
  std::vector<std::string> state_names() const;

  /// Reduced right-hand side of dg/dt = -2 Ric on the scale parameters.
  std::vector<double> rhs(std::span<const double> state) const;

  /// Embedding of the reduced state as a coordinate chart; affine in the
  /// state, so the flow of the chart components is exactly reproduced.
  MetricChart chart(std::span<const double> state) const;
};

/// Max-abs mismatch between -2 Ric of the embedded chart and the reduced
/// right-hand side pushed through the embedding, relative to |Ric|.
double reduction_residual(const FlowFamily& family, std::span<const double> state,
                          std::span<const double> point);

struct FlowTrajectory {
  FlowFamily family;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  bool stopped_early = false;
  std::optional<double> blowup_time;

  /// Dense evaluation: one Runge-Kutta step from the nearest earlier node.
  std::vector<double> state_at(double t) const;
  double t_end() const { return times.back(); }
};

/// Classical fourth-order fixed-step integration; stops early when any scale
/// drops to 1e-6, recording a blow-up time estimate.
FlowTrajectory integrate_flow(const FlowFamily& family, std::span<const double> g0, double dt,
                              int steps);

using StateQuantity = std::function<Tensor(std::span<const double> state)>;

/// Central difference (O(h^2)) of a state-dependent quantity held at a fixed
/// coordinate point.
Tensor fd_time_derivative(const FlowTrajectory& traj, const StateQuantity& quantity, double t,
                          double h);

enum class SingularityKind { TypeI, TypeIIa, NoSingularity, Inconclusive };

struct SingularityReport {
  SingularityKind kind = SingularityKind::Inconclusive;
  double limit = 0;  // Type I: limit of (T-t) max|Rm|
  std::optional<double> T;
  std::string note;
};

/// Type I / IIa diagnostic: behavior of (T-t) max|Rm| over the last decade of
/// T-t covered by the trajectory.
SingularityReport singularity_type(const FlowTrajectory& traj);

/// sqrt(R_ijkl R^ijkl) of the family chart at a fixed generic point.
double riemann_norm(const FlowFamily& family, std::span<const double> state);

}  // namespace weylflow
