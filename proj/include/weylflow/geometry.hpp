#pragma once

#include <functional>
#include <span>
#include <vector>

#include "weylflow/chart.hpp"
#include "weylflow/tensor.hpp"

namespace weylflow {

struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor with jet-valued components, all slots covariant unless noted.
/// Internal carrier for the curvature pipeline run in jet arithmetic.
struct JetField {
  int n = 0;
  int rank = 0;
  std::vector<Jet> c;

  JetField() = default;
  JetField(int n, int rank, int order);

  size_t flat(std::span<const int> idx) const {
    size_t f = 0;
    for (int v : idx) f = f * n + static_cast<size_t>(v);
    return f;
  }
  Jet& at(std::span<const int> idx) { return c[flat(idx)]; }
  const Jet& at(std::span<const int> idx) const { return c[flat(idx)]; }

  Tensor values(std::vector<Variance> valence) const;
};

/// All curvature objects at one point, carried as jets so that covariant
/// derivatives and the rough Laplacian are exact truncations.
///
/// The Riemann convention is pinned so that on the round sphere
/// Riem(v,w,v,w) = +K for orthonormal v, w; concretely
///   R^m_ijk = d_j Gamma^m_ik - d_i Gamma^m_jk
///           + Gamma^m_jp Gamma^p_ik - Gamma^m_ip Gamma^p_jk,
/// which makes Riem = K (g_ik g_jl - g_il g_jk) on space forms and
/// Ric = (n-1) K g.
class JetCurvature {
 public:
  /// order = jet order of the metric components (2..4). Curvature entries
  /// come out at order-2, their first covariant derivatives at order-3, and
  /// the rough Laplacian needs order 4. with_weyl requires n >= 3.
  JetCurvature(const MetricChart& chart, std::span<const double> p, int order,
               bool with_weyl = true);

  int n = 0;
  int g_order = 0;
  std::vector<double> point;
  std::vector<Jet> g, ginv;      // n*n                (order)
  std::vector<Jet> gamma;        // n^3, [k][i][j]     (order-1)
  std::vector<Jet> riem;         // n^4, R_ijkl        (order-2)
  std::vector<Jet> ric;          // n*n                (order-2)
  std::vector<Jet> ric_up;       // n*n, R^{ij}        (order-2)
  Jet scalar;                    // R                  (order-2)
  Jet ric2;                      // |Ric|^2            (order-2)
  std::vector<Jet> weyl, a_t, b_t;  // n^4             (order-2; empty for n < 3)
  std::vector<Jet> schouten;     // n*n                (order-2)

  const Jet& g_at(int i, int j) const { return g[static_cast<size_t>(i) * n + j]; }
  const Jet& ginv_at(int i, int j) const { return ginv[static_cast<size_t>(i) * n + j]; }
  const Jet& gamma_at(int k, int i, int j) const {
    return gamma[(static_cast<size_t>(k) * n + i) * n + j];
  }
  double ginv_val(int i, int j) const { return ginv_at(i, j).value(); }

  JetField riemann_field() const;
  JetField weyl_field() const;
  JetField ricci_field() const;
  JetField schouten_field() const;
  JetField scalar_field() const;
  JetField metric_field() const;
};

/// Covariant derivative of an all-covariant jet tensor field; the new
/// derivative slot comes first. Jet order drops by one.
JetField covariant_derivative(const JetField& t, const JetCurvature& jc);

/// Rough Laplacian g^{ab} nabla_a nabla_b applied slotwise; plain values.
Tensor rough_laplacian(const JetField& t, const JetCurvature& jc);

/// Everything the identity suite consumes at a point.
struct CurvaturePack {
  std::vector<double> point;
  Tensor metric;          // (0,2)
  Tensor inverse_metric;  // (2,0)
  Tensor gamma;           // (1,2)
  Tensor riem;            // (0,4)
  Tensor ric;             // (0,2)
  double scalar = 0;
  double ric_norm2 = 0;
  Tensor weyl, a_tensor, b_tensor;  // (0,4)
  Tensor schouten;                  // (0,2)
  Tensor c_tensor, d_tensor;        // (0,4)
};

Tensor christoffel(const MetricChart& chart, std::span<const double> p);
Tensor riemann(const MetricChart& chart, std::span<const double> p);

/// Full pack; requires n >= 3 (the Weyl part is undefined in dimension 2).
CurvaturePack curvature_pack(const MetricChart& chart, std::span<const double> p);

/// Quadratic curvature product g^{pq} g^{rs} X_pijr Y_slkq of two
/// (0,4) component grids, contracted with the given inverse metric.
Tensor quad_product(const Tensor& x, const Tensor& y, const Tensor& ginv);

enum class GeomField { Metric, Ricci, ScalarCurvature, Riemann, Weyl, Schouten };

Tensor covariant_derivative(const MetricChart& chart, std::span<const double> p, GeomField f);
Tensor rough_laplacian(const MetricChart& chart, std::span<const double> p, GeomField f);

/// nabla^l W_ijkl (divergence in the last slot); requires n >= 4.
Tensor divergence_weyl(const MetricChart& chart, std::span<const double> p);

/// Codazzi combination (n-3)/(n-2) (nabla_j S_ik - nabla_i S_jk), the
/// second-Bianchi route to the same quantity.
Tensor divergence_weyl_codazzi(const MetricChart& chart, std::span<const double> p);

/// Scalar-field helpers (f evaluated with the chart bindings).
Tensor gradient_scalar(const MetricChart& chart, std::span<const double> p, const Expr& f);
Tensor hessian_scalar(const MetricChart& chart, std::span<const double> p, const Expr& f);
double laplacian_scalar(const MetricChart& chart, std::span<const double> p, const Expr& f);

/// Symmetrized covariant derivative (nabla_i w_j + nabla_j w_i)/2 of a
/// 1-form with components given as expressions.
Tensor sym_covariant_oneform(const MetricChart& chart, std::span<const double> p,
                             std::span<const Expr> omega);

/// |T|^2 with all slots raised by the inverse metric.
double tensor_norm2(const Tensor& t, const Tensor& ginv);

}  // namespace weylflow
