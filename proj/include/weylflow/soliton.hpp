#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weylflow/geometry.hpp"

namespace weylflow {

struct SolitonError : std::runtime_error {
  explicit SolitonError(const std::string& what) : std::runtime_error(what) {}
};

enum class SolitonKind { Shrinking, Steady, Expanding };

/// A metric together with 1-form (or gradient potential) soliton data:
/// Ric + (1/2) L_omega g = (alpha/n) g.
struct SolitonData {
  MetricChart chart;
  bool gradient = true;
  Expr f;                   // potential, gradient case
  std::vector<Expr> omega;  // 1-form components otherwise
  double alpha = 0;

  SolitonKind kind() const {
    return alpha > 0 ? SolitonKind::Shrinking
                     : (alpha < 0 ? SolitonKind::Expanding : SolitonKind::Steady);
  }
};

/// R_ij + (1/2)(nabla_i w_j + nabla_j w_i) - (alpha/n) g_ij, with Hess f in
/// place of the symmetrized derivative for gradient data.
Tensor soliton_residual(const SolitonData& data, std::span<const double> p);

enum class RicciPattern { Proportional, Split, Other };

/// Ricci eigenvalue clustering at relative gap 1e-6.
struct EigenStructure {
  std::vector<double> eigenvalues;    // ascending, one per dimension
  std::vector<double> cluster_values; // one representative per cluster
  std::vector<int> multiplicities;
  RicciPattern pattern = RicciPattern::Other;
  double simple_value = 0;    // Split: the multiplicity-1 eigenvalue (lambda)
  double repeated_value = 0;  // Split: the multiplicity-(n-1) eigenvalue (mu)
  std::string diagnostics;
};

EigenStructure classify_eigenstructure(const CurvaturePack& pack);

/// Closed-form Ricci of dt^2 + h(t)^2 sigma_K at a chart point, where the
/// fiber carries the conformal constant-curvature-K metric 4 delta/(1+K|y|^2)^2:
///   Ric = -(n-1) (h''/h) dt^2 + ((n-2)K - h h'' - (n-2) h'^2) sigma_K.
/// h_at_t is a univariate jet carrying h, h', h''.
Tensor warped_ricci(int n, double K, const Jet& h_at_t, std::span<const double> point);

/// Builds the warped-product chart dt^2 + h^2 sigma_K over coordinates
/// (x1 = t, fiber x2..xn); h_src is the warp-factor expression, e.g. a
/// closed form like "sin(x1)" or a bound profile name like "h".
MetricChart warped_chart(int n, double K, const std::string& h_src, double t_lo, double t_hi);

/// Steady warped gradient-soliton system in the state (h, h', f'):
///   h'' = ((n-2)(1 - h'^2) + h h' f') / h,   f'' = (n-1) h'' / h.
std::array<double, 3> bryant_rhs(int n, const std::array<double, 3>& s);

/// Rotationally symmetric steady gradient soliton profile on [0, L].
struct BryantProfile {
  int n = 0;
  double L = 0;
  double t_start = 0;                         // series handoff point
  double cap_a3 = 0;                          // h = t + a3 t^3 + a5 t^5 near 0
  double cap_a5 = 0;
  std::vector<double> ts;
  std::vector<std::array<double, 4>> states;  // h, h', f', f

  std::array<double, 4> state_at(double t) const;

  /// Univariate jets in t, made derivative-consistent with the steady system
  /// by a Taylor recurrence on the interpolated state.
  Jet h_jet(double t, int order) const;
  Jet fpot_jet(double t, int order) const;

  /// Profile bindings for an n-variable chart whose first coordinate is t.
  /// The returned callables reference this profile; see the shared-ownership
  /// variants below for bindings that outlive local solves.
  ProfileFn h_profile() const;
  ProfileFn fpot_profile() const;
};

/// Profile bindings that keep the solved profile alive inside the callable,
/// safe to store in charts that are copied around.
ProfileFn bryant_h_profile(std::shared_ptr<const BryantProfile> prof);
ProfileFn bryant_fpot_profile(std::shared_ptr<const BryantProfile> prof);

/// Solves the profile with the smooth-cap conditions h(0)=0, h'(0)=1,
/// f'(0)=0, normalized so that Ric = g at the cap. Verifies the soliton
/// residual through the full curvature pipeline against tol.
BryantProfile bryant_solve(int n, double L, double tol);

struct GradientIdentityResiduals {
  double div_res = 0;     // dR_i - 2 R_il grad^l f
  double radial_res = 0;  // R(u, e_i, u, grad f) - Ric(e_i, grad f)/(n-1), u = grad f direction
  bool radial_applicable = false;
};

/// Pointwise gradient-soliton identities; radial_res requires the Weyl
/// residual at p to be below 1e-8 (locally conformally flat data).
GradientIdentityResiduals gradient_identity_residuals(const SolitonData& data,
                                                      std::span<const double> p);

}  // namespace weylflow
