#include "weylflow/identities.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <thread>

namespace weylflow {

namespace {

using Points = std::span<const std::vector<double>>;
constexpr Variance Dn = Variance::Dn;
constexpr Variance Up = Variance::Up;
const std::vector<Variance> kV4 = {Dn, Dn, Dn, Dn};

// ---- small algebra helpers on a CurvaturePack ------------------------------

// R^{pq}
Tensor ric_up(const CurvaturePack& pk) {
  const int n = pk.metric.dim();
  Tensor out(n, {Up, Up});
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      double s = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += pk.inverse_metric(p, i) * pk.inverse_metric(q, j) * pk.ric(i, j);
      out(p, q) = s;
    }
  return out;
}

// RR_{ik} = g^{pq} R_pi R_qk
Tensor ric_sq(const CurvaturePack& pk) {
  const int n = pk.metric.dim();
  Tensor out(n, {Dn, Dn});
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double s = 0;
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) s += pk.inverse_metric(p, q) * pk.ric(p, i) * pk.ric(q, k);
      out(i, k) = s;
    }
  return out;
}

// X_ijkl - X_ijlk + X_ikjl - X_iljk
Tensor alt4(const Tensor& x) {
  const int n = x.dim();
  Tensor out(n, kV4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          out(i, j, k, l) = x(i, j, k, l) - x(i, j, l, k) + x(i, k, j, l) - x(i, l, j, k);
  return out;
}

// T2_{xy} = W_{a x y b} R^{ab}
Tensor weyl_ric_trace(const CurvaturePack& pk, const Tensor& rup) {
  const int n = pk.metric.dim();
  Tensor out(n, {Dn, Dn});
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      double s = 0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) s += rup(a, b) * pk.weyl(a, x, y, b);
      out(x, y) = s;
    }
  return out;
}

// g^{pa} (R_ip T_ajkl + R_jp T_iakl + R_kp T_ijal + R_lp T_ijka)
Tensor ric_hook(const Tensor& t4, const CurvaturePack& pk) {
  const int n = pk.metric.dim();
  Tensor out(n, kV4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0;
          for (int p = 0; p < n; ++p)
            for (int a = 0; a < n; ++a) {
              const double gpa = pk.inverse_metric(p, a);
              s += gpa * (pk.ric(i, p) * t4(a, j, k, l) + pk.ric(j, p) * t4(i, a, k, l) +
                          pk.ric(k, p) * t4(i, j, a, l) + pk.ric(l, p) * t4(i, j, k, a));
            }
          out(i, j, k, l) = s;
        }
  return out;
}

double pair_diff_scale(const Tensor& lhs, const Tensor& rhs, double* scale) {
  Tensor d = lhs;
  d -= rhs;
  *scale = std::max(max_abs(lhs), max_abs(rhs));
  return max_abs(d);
}

struct EigenClusters {
  std::vector<double> values;
  std::vector<int> mult;
};

EigenClusters cluster_eigenvalues(const CurvaturePack& pk) {
  std::vector<double> lam;
  std::vector<std::vector<double>> vecs;
  generalized_sym_eig(pk.ric, pk.metric, lam, vecs);
  EigenClusters out;
  const int n = static_cast<int>(lam.size());
  const double scale = std::max(std::abs(lam.front()), std::abs(lam.back()));
  const double gap = 1e-6 * std::max(scale, kResidualFloor);
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || lam[i] - lam[i - 1] > gap) {
      double mean = 0;
      for (int k = start; k < i; ++k) mean += lam[k];
      out.values.push_back(mean / (i - start));
      out.mult.push_back(i - start);
      start = i;
    }
  }
  return out;
}

double eigen_quadratic_value(int n, double li, double lj, double r, double ric2) {
  return (n - 1) * (li * li + lj * lj) - (n - 1) * r * (li + lj) + (n - 1) * (n - 2) * li * lj +
         r * r - ric2;
}

// ---- per-point residual evaluators (diff and scale) ------------------------

double check_weyl_traces(const CurvaturePack& pk, double* scale) {
  const int n = pk.metric.dim();
  double diff = 0;
  for (int s1 = 0; s1 < 4; ++s1)
    for (int s2 = s1 + 1; s2 < 4; ++s2) {
      std::array<int, 4> idx{};
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          // free indices a,b run over the two non-traced slots
          double tr = 0;
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) {
              int f = 0;
              for (int s = 0; s < 4; ++s) {
                if (s == s1) idx[s] = p;
                else if (s == s2) idx[s] = q;
                else idx[s] = (f++ == 0) ? a : b;
              }
              tr += pk.inverse_metric(p, q) * pk.weyl(idx[0], idx[1], idx[2], idx[3]);
            }
          diff = std::max(diff, std::abs(tr));
        }
    }
  // traces of a vanishing Weyl tensor carry rounding noise at the Riemann
  // scale, so that is the reference magnitude
  *scale = std::max(max_abs(pk.weyl), max_abs(pk.riem));
  return diff;
}

double check_product_aa(const CurvaturePack& pk, double* scale) {
  const int n = pk.metric.dim();
  Tensor lhs = quad_product(pk.a_tensor, pk.a_tensor, pk.inverse_metric);
  Tensor rhs(n, kV4);
  const double c = pk.scalar * pk.scalar / ((n - 1.0) * (n - 1.0) * (n - 2.0) * (n - 2.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          rhs(i, j, k, l) =
              c * (pk.metric(i, k) * pk.metric(j, l) + (n - 2) * pk.metric(i, j) * pk.metric(l, k));
  return pair_diff_scale(lhs, rhs, scale);
}

double check_product_bb(const CurvaturePack& pk, double* scale) {
  const int n = pk.metric.dim();
  Tensor lhs = quad_product(pk.b_tensor, pk.b_tensor, pk.inverse_metric);
  Tensor rr = ric_sq(pk);
  Tensor rhs(n, kV4);
  const double c = 1.0 / ((n - 2.0) * (n - 2.0));
  const auto& g = pk.metric;
  const auto& r = pk.ric;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          rhs(i, j, k, l) =
              c * (2 * r(i, k) * r(l, j) + (n - 4) * r(i, j) * r(l, k) + rr(j, l) * g(i, k) +
                   rr(k, i) * g(l, j) - 2 * rr(j, i) * g(l, k) - 2 * rr(l, k) * g(i, j) +
                   pk.scalar * r(i, j) * g(l, k) + pk.scalar * r(l, k) * g(i, j) +
                   pk.ric_norm2 * g(i, j) * g(l, k));
  return pair_diff_scale(lhs, rhs, scale);
}

double check_product_ab_ba(const CurvaturePack& pk, double* scale) {
  const int n = pk.metric.dim();
  Tensor ab = quad_product(pk.a_tensor, pk.b_tensor, pk.inverse_metric);
  Tensor ba = quad_product(pk.b_tensor, pk.a_tensor, pk.inverse_metric);
  const auto& g = pk.metric;
  const auto& r = pk.ric;
  const double c = -pk.scalar / ((n - 1.0) * (n - 2.0) * (n - 2.0));
  Tensor rhs_ab(n, kV4), rhs_ba(n, kV4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          rhs_ab(i, j, k, l) =
              c * (r(i, k) * g(l, j) + r(l, j) * g(i, k) - r(i, j) * g(l, k) +
                   (n - 3) * r(l, k) * g(i, j) + pk.scalar * g(i, j) * g(l, k));
          rhs_ba(i, j, k, l) =
              c * (r(l, j) * g(i, k) + r(i, k) * g(l, j) - r(l, k) * g(i, j) +
                   (n - 3) * r(i, j) * g(l, k) + pk.scalar * g(i, j) * g(l, k));
        }
  double s1 = 0, s2 = 0;
  const double d1 = pair_diff_scale(ab, rhs_ab, &s1);
  const double d2 = pair_diff_scale(ba, rhs_ba, &s2);
  *scale = std::max(s1, s2);
  return std::max(d1, d2);
}

double check_product_wa_aw(const CurvaturePack& pk, double* scale) {
  const int n = pk.metric.dim();
  Tensor wa = quad_product(pk.weyl, pk.a_tensor, pk.inverse_metric);
  Tensor aw = quad_product(pk.a_tensor, pk.weyl, pk.inverse_metric);
  const double c = pk.scalar / ((n - 1.0) * (n - 2.0));
  Tensor rhs_wa(n, kV4), rhs_aw(n, kV4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          rhs_wa(i, j, k, l) = c * pk.weyl(l, i, j, k);
          rhs_aw(i, j, k, l) = c * pk.weyl(i, l, k, j);
        }
  double s1 = 0, s2 = 0;
  const double d1 = pair_diff_scale(wa, rhs_wa, &s1);
  const double d2 = pair_diff_scale(aw, rhs_aw, &s2);
  // the alternating combinations must cancel identically
  const double z1 = max_abs(alt4(wa));
  const double z2 = max_abs(alt4(aw));
  // quadratic curvature products carry rounding noise at the |Riem|^2 scale
  const double r = max_abs(pk.riem);
  *scale = std::max({s1, s2, r * r});
  return std::max({d1, d2, z1, z2});
}

double check_product_wb_bw(const CurvaturePack& pk, double* scale) {
  const int n = pk.metric.dim();
  Tensor wb = quad_product(pk.weyl, pk.b_tensor, pk.inverse_metric);
  Tensor bw = quad_product(pk.b_tensor, pk.weyl, pk.inverse_metric);
  Tensor rup = ric_up(pk);
  Tensor t2 = weyl_ric_trace(pk, rup);
  const auto& g = pk.metric;
  const auto& gi = pk.inverse_metric;
  const auto& w = pk.weyl;
  const auto& r = pk.ric;
  const double c = -1.0 / (n - 2.0);
  Tensor rhs_wb(n, kV4), rhs_bw(n, kV4);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double w_lij_rk = 0, w_ijk_rl = 0, w_ilk_rj = 0, w_lkj_ri = 0;
          for (int p = 0; p < n; ++p)
            for (int a = 0; a < n; ++a) {
              const double gpa = gi(p, a);
              w_lij_rk += gpa * w(l, i, j, a) * r(p, k);
              w_ijk_rl += gpa * w(a, i, j, k) * r(l, p);
              w_ilk_rj += gpa * w(i, l, k, a) * r(p, j);
              w_lkj_ri += gpa * w(a, l, k, j) * r(p, i);
            }
          rhs_wb(i, j, k, l) = c * (w_lij_rk + w_ijk_rl - t2(i, j) * g(l, k));
          rhs_bw(i, j, k, l) = c * (w_ilk_rj + w_lkj_ri - t2(l, k) * g(i, j));
        }
  double s1 = 0, s2 = 0;
  const double d1 = pair_diff_scale(wb, rhs_wb, &s1);
  const double d2 = pair_diff_scale(bw, rhs_bw, &s2);
  // eight-term alternating identity
  Tensor lhs8 = alt4(wb);
  lhs8 += alt4(bw);
  lhs8 *= -1.0;
  const double rr_scale = max_abs(pk.riem) * max_abs(pk.riem);
  Tensor rhs8(n, kV4);
  const double c8 = 1.0 / (n - 2.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          rhs8(i, j, k, l) = c8 * (t2(i, l) * g(k, j) + t2(k, j) * g(i, l) - t2(i, k) * g(j, l) -
                                   t2(l, j) * g(i, k));
  double s3 = 0;
  const double d3 = pair_diff_scale(lhs8, rhs8, &s3);
  *scale = std::max({s1, s2, s3, rr_scale});
  return std::max({d1, d2, d3});
}

double check_ccc_sum(const CurvaturePack& pk, double* scale) {
  const int n = pk.metric.dim();
  Tensor lhs = alt4(pk.c_tensor);
  lhs *= 2.0;
  Tensor rhs = alt4(pk.d_tensor);
  rhs *= 2.0;
  Tensor rr = ric_sq(pk);
  Tensor rup = ric_up(pk);
  Tensor t2 = weyl_ric_trace(pk, rup);
  const auto& g = pk.metric;
  const auto& r = pk.ric;
  const double n1 = n - 1.0, n2 = n - 2.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double gg = g(i, k) * g(j, l) - g(i, l) * g(j, k);
          double v = rhs(i, j, k, l);
          v += (2 * n1 * pk.ric_norm2 - 2 * pk.scalar * pk.scalar) / (n1 * n2 * n2) * gg;
          v += 2.0 / n2 * (r(i, k) * r(l, j) - r(i, l) * r(j, k));
          v -= 2.0 / (n2 * n2) *
               (rr(j, l) * g(i, k) + rr(k, i) * g(l, j) - rr(l, i) * g(j, k) - rr(k, j) * g(i, l));
          v += 2.0 * pk.scalar / (n1 * n2 * n2) *
               (r(i, k) * g(j, l) + r(j, l) * g(i, k) - r(j, k) * g(i, l) - r(i, l) * g(j, k));
          v += 2.0 / n2 *
               (t2(i, l) * g(k, j) + t2(k, j) * g(i, l) - t2(i, k) * g(j, l) - t2(l, j) * g(i, k));
          rhs(i, j, k, l) = v;
        }
  return pair_diff_scale(lhs, rhs, scale);
}

double check_ricci_term_expansion(const CurvaturePack& pk, double* scale) {
  const int n = pk.metric.dim();
  Tensor lhs = ric_hook(pk.riem, pk);
  Tensor rhs = ric_hook(pk.weyl, pk);
  Tensor rr = ric_sq(pk);
  const auto& g = pk.metric;
  const auto& r = pk.ric;
  const double n1 = n - 1.0, n2 = n - 2.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = rhs(i, j, k, l);
          v += 2.0 / n2 *
               (rr(i, k) * g(j, l) - rr(i, l) * g(j, k) + rr(j, l) * g(i, k) - rr(j, k) * g(i, l));
          v += 4.0 / n2 * (r(i, k) * r(j, l) - r(j, k) * r(i, l));
          v -= 2.0 * pk.scalar / (n1 * n2) *
               (r(i, k) * g(j, l) - r(i, l) * g(j, k) + r(j, l) * g(i, k) - r(j, k) * g(i, l));
          rhs(i, j, k, l) = v;
        }
  return pair_diff_scale(lhs, rhs, scale);
}

double check_rpq_traces(const CurvaturePack& pk, double* scale) {
  const int n = pk.metric.dim();
  Tensor rup = ric_up(pk);
  Tensor rr = ric_sq(pk);
  double diff = 0, sc = 0;
  const double ca = pk.scalar / ((n - 1.0) * (n - 2.0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double ta = 0, tb = 0;
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          ta += rup(p, q) * pk.a_tensor(p, i, q, k);
          tb += rup(p, q) * pk.b_tensor(p, i, q, k);
        }
      const double ra = ca * (pk.scalar * pk.metric(i, k) - pk.ric(i, k));
      const double rb = -1.0 / (n - 2.0) *
                        (pk.ric_norm2 * pk.metric(i, k) + pk.scalar * pk.ric(i, k) - 2 * rr(i, k));
      diff = std::max({diff, std::abs(ta - ra), std::abs(tb - rb)});
      sc = std::max({sc, std::abs(ta), std::abs(ra), std::abs(tb), std::abs(rb)});
    }
  *scale = sc;
  return diff;
}

// ---- evolution equations along reduced flows -------------------------------

enum class EvolField { Scalar, Ricci, Riemann, Weyl };

Tensor evol_quantity(const FlowFamily& family, std::span<const double> state,
                     std::span<const double> pt, EvolField field) {
  MetricChart chart = family.chart(state);
  const bool weyl = field == EvolField::Weyl;
  JetCurvature jc(chart, pt, 2, weyl);
  switch (field) {
    case EvolField::Scalar: {
      Tensor t(family.n, std::vector<Variance>{});
      t.data()[0] = jc.scalar.value();
      return t;
    }
    case EvolField::Ricci:
      return jc.ricci_field().values({Dn, Dn});
    case EvolField::Riemann:
      return jc.riemann_field().values(kV4);
    case EvolField::Weyl:
      return jc.weyl_field().values(kV4);
  }
  throw IdentityError("bad field");
}

// LHS - RHS of the evolution equation at one (point, h); both sides are
// assembled from independent ingredients: the time slope from the flow
// trajectory, the Laplacian from the jet pipeline, the algebra from the pack.
double evolution_residual(const FlowContext& fc, std::span<const double> pt, EvolField field,
                          double h, double* scale) {
  const FlowFamily& fam = fc.family;
  const int n = fam.n;
  Tensor dt = fd_time_derivative(
      fc.traj, [&](std::span<const double> s) { return evol_quantity(fam, s, pt, field); }, fc.t,
      h);

  std::vector<double> s0 = fc.traj.state_at(fc.t);
  MetricChart chart = fam.chart(s0);
  JetCurvature jc(chart, pt, 4, n >= 3);
  CurvaturePack pk = curvature_pack(chart, pt);

  Tensor lap(n, std::vector<Variance>{});
  Tensor rhs(n, std::vector<Variance>{});
  switch (field) {
    case EvolField::Scalar: {
      lap = rough_laplacian(jc.scalar_field(), jc);
      rhs = Tensor(n, std::vector<Variance>{});
      rhs.data()[0] = 2.0 * pk.ric_norm2;
      break;
    }
    case EvolField::Ricci: {
      lap = rough_laplacian(jc.ricci_field(), jc);
      rhs = Tensor(n, {Dn, Dn});
      Tensor rup = ric_up(pk);
      Tensor rr = ric_sq(pk);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0;
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) s += rup(k, l) * pk.riem(k, i, l, j);
          rhs(i, j) = 2.0 * s - 2.0 * rr(i, j);
        }
      break;
    }
    case EvolField::Riemann: {
      lap = rough_laplacian(jc.riemann_field(), jc);
      Tensor calt = alt4(pk.c_tensor);
      calt *= 2.0;
      Tensor hook = ric_hook(pk.riem, pk);
      calt -= hook;
      rhs = calt;
      break;
    }
    case EvolField::Weyl: {
      lap = rough_laplacian(jc.weyl_field(), jc);
      Tensor dalt = alt4(pk.d_tensor);
      dalt *= 2.0;
      Tensor hook = ric_hook(pk.weyl, pk);
      dalt -= hook;
      Tensor rr = ric_sq(pk);
      const auto& g = pk.metric;
      const auto& r = pk.ric;
      const double n1 = n - 1.0, n2 = n - 2.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
              double v = dalt(i, j, k, l);
              v += 2.0 / (n2 * n2) *
                   (rr(i, k) * g(j, l) - rr(i, l) * g(j, k) + rr(j, l) * g(i, k) -
                    rr(j, k) * g(i, l));
              v -= 2.0 * pk.scalar / (n2 * n2) *
                   (r(i, k) * g(j, l) - r(i, l) * g(j, k) + r(j, l) * g(i, k) - r(j, k) * g(i, l));
              v += 2.0 / n2 * (r(i, k) * r(j, l) - r(j, k) * r(i, l));
              v += 2.0 * (pk.scalar * pk.scalar - pk.ric_norm2) / (n1 * n2 * n2) *
                   (g(i, k) * g(j, l) - g(i, l) * g(j, k));
              dalt(i, j, k, l) = v;
            }
      rhs = dalt;
      break;
    }
  }
  Tensor resid = dt;
  resid -= lap;
  resid -= rhs;
  // every term of the equation is assembled from Riemann-sized pieces, so
  // the curvature magnitude anchors the scale; this keeps the residual
  // meaningful when the equation degenerates to 0 = 0 (Einstein metrics,
  // conformally flat families)
  const double curv_scale = std::max(max_abs(pk.riem), max_abs(evol_quantity(fam, s0, pt, field)));
  *scale = std::max({max_abs(dt), max_abs(lap), max_abs(rhs), curv_scale});
  return max_abs(resid);
}

void run_evolution_check(const CatalogEntry& entry, Points points, const FlowContext* fc,
                         EvolField field, double tol, CheckReport& rep) {
  (void)entry;
  if (!fc) throw IdentityError("missing flow context");
  const int npts = std::min<int>(4, static_cast<int>(points.size()));
  double res_h = 0, res_h2 = 0, scale_acc = 1;
  for (int pi = 0; pi < npts; ++pi) {
    double s1 = 0, s2 = 0;
    const double d1 = evolution_residual(*fc, points[pi], field, fc->h, &s1);
    const double d2 = evolution_residual(*fc, points[pi], field, fc->h / 2, &s2);
    res_h = std::max(res_h, gated_residual(d1, s1, tol));
    res_h2 = std::max(res_h2, gated_residual(d2, s2, tol));
    scale_acc = std::max(scale_acc, s1);
  }
  rep.n_points = npts;
  rep.max_residual = res_h;
  rep.convergence = {{fc->h, res_h}, {fc->h / 2, res_h2}};
  const bool below_floor = res_h2 <= 1e-8;
  const double order = (res_h2 > 0 && res_h > 0) ? std::log2(res_h / res_h2) : 99.0;
  rep.pass = res_h <= tol && (below_floor || order >= 1.9);
  if (!rep.pass && res_h <= tol) rep.status = "error:convergence order below 1.9";
}

// ---- registry ---------------------------------------------------------------

using PointEval = double (*)(const CurvaturePack&, double*);

void run_pointwise(const CatalogEntry& entry, Points points, PointEval eval, double tol,
                   CheckReport& rep) {
  double worst = 0;
  for (const auto& p : points) {
    CurvaturePack pk = curvature_pack(entry.chart, p);
    double scale = 0;
    const double diff = eval(pk, &scale);
    worst = std::max(worst, gated_residual(diff, scale, tol));
  }
  rep.n_points = static_cast<int>(points.size());
  rep.max_residual = worst;
  rep.pass = worst <= tol;
}

CheckDef::Mode gated_if(bool cond) {
  return cond ? CheckDef::Mode::Gated : CheckDef::Mode::Skip;
}

std::vector<CheckDef> build_registry() {
  std::vector<CheckDef> defs;

  auto add = [&](CheckDef d) { defs.push_back(std::move(d)); };

  auto pointwise = [&](const std::string& id, const std::string& stmt, double tol, PointEval eval,
                       std::function<CheckDef::Mode(const CatalogEntry&)> mode) {
    CheckDef d;
    d.id = id;
    d.statement = stmt;
    d.tolerance = tol;
    d.needs_flow = false;
    d.mode = std::move(mode);
    d.run = [eval](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      run_pointwise(e, pts, eval, rep.tolerance, rep);
    };
    add(std::move(d));
  };

  auto n_at_least = [](int k) {
    return [k](const CatalogEntry& e) { return gated_if(e.n >= k); };
  };

  pointwise("weyl_traces", "every metric trace of the Weyl tensor vanishes", 1e-10,
            check_weyl_traces, n_at_least(3));

  {
    CheckDef d;
    d.id = "weyl_dim3";
    d.statement = "the Weyl tensor vanishes identically in dimension 3";
    d.tolerance = 1e-10;
    d.mode = [](const CatalogEntry& e) { return gated_if(e.n == 3); };
    d.run = [](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      double worst = 0;
      for (const auto& p : pts) {
        CurvaturePack pk = curvature_pack(e.chart, p);
        worst = std::max(worst, gated_residual(max_abs(pk.weyl), max_abs(pk.riem), rep.tolerance));
      }
      rep.n_points = static_cast<int>(pts.size());
      rep.max_residual = worst;
      rep.pass = worst <= rep.tolerance;
    };
    add(std::move(d));
  }

  pointwise("product_AA", "A*A product reduces to R^2 (g_ik g_jl + (n-2) g_ij g_lk) terms", 1e-9,
            check_product_aa, n_at_least(3));
  pointwise("product_BB", "B*B product reduces to Ricci-quadratic and |Ric|^2 terms", 1e-9,
            check_product_bb, n_at_least(3));
  pointwise("product_AB_BA", "mixed A*B and B*A products reduce to R times Ricci terms", 1e-9,
            check_product_ab_ba, n_at_least(3));
  pointwise("product_WA_AW",
            "W*A products are proportional to W and their alternating sums vanish", 1e-10,
            check_product_wa_aw, n_at_least(3));
  pointwise("product_WB_BW", "W*B products reduce to Weyl-Ricci contractions", 1e-9,
            check_product_wb_bw, n_at_least(3));
  pointwise("ccc_sum",
            "the alternating Riemann product equals its Weyl/Ricci/scalar expansion", 1e-9,
            check_ccc_sum, n_at_least(3));
  pointwise("ricci_term_expansion",
            "the four-fold Ricci-Riemann contraction expands through the decomposition", 1e-9,
            check_ricci_term_expansion, n_at_least(3));

  auto flow_check = [&](const std::string& id, const std::string& stmt, EvolField field) {
    CheckDef d;
    d.id = id;
    d.statement = stmt;
    d.tolerance = 1e-3;
    d.needs_flow = true;
    d.mode = [field](const CatalogEntry& e) {
      (void)field;
      const bool has_family =
          e.name == "sphere" || e.name == "product_spheres" || e.name == "cylinder_RxS";
      if (!has_family || e.n < 3) return CheckDef::Mode::Skip;
      return CheckDef::Mode::Gated;
    };
    d.run = [field](const CatalogEntry& e, Points pts, const FlowContext* fc, CheckReport& rep) {
      run_evolution_check(e, pts, fc, field, rep.tolerance, rep);
    };
    add(std::move(d));
  };
  flow_check("weyl_evolution",
             "d/dt W = Lap W + 2 alt(D) - Ric-hook(W) + quadratic Ricci terms along the flow",
             EvolField::Weyl);
  flow_check("scalar_evolution", "d/dt R = Lap R + 2 |Ric|^2 along the flow", EvolField::Scalar);
  flow_check("ricci_evolution",
             "d/dt Ric = Lap Ric + 2 R^kl Riem_kilj - 2 Ric^2 along the flow", EvolField::Ricci);
  flow_check("riemann_evolution",
             "d/dt Riem = Lap Riem + 2 alt(C) - Ric-hook(Riem) along the flow",
             EvolField::Riemann);

  {
    CheckDef d;
    d.id = "eigen_quadratic";
    d.statement =
        "Ricci eigenvalue pairs satisfy the quadratic constraint when the flow preserves W = 0";
    d.tolerance = 1e-8;
    d.mode = [](const CatalogEntry& e) {
      if (e.n < 4) return CheckDef::Mode::Skip;
      return e.facts.lcf_flow_invariant ? CheckDef::Mode::Gated : CheckDef::Mode::Descriptive;
    };
    d.run = [](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      const int n = e.n;
      double worst = 0;
      for (const auto& p : pts) {
        CurvaturePack pk = curvature_pack(e.chart, p);
        EigenClusters cl = cluster_eigenvalues(pk);
        const double scale = pk.scalar * pk.scalar + pk.ric_norm2;
        const int m = static_cast<int>(cl.values.size());
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) {
            if (a == b && cl.mult[a] < 2) continue;
            const double v =
                eigen_quadratic_value(n, cl.values[a], cl.values[b], pk.scalar, pk.ric_norm2);
            worst = std::max(worst, gated_residual(std::abs(v), scale, rep.tolerance));
          }
      }
      rep.n_points = static_cast<int>(pts.size());
      rep.max_residual = worst;
      rep.pass = worst <= rep.tolerance;
    };
    add(std::move(d));
  }

  {
    CheckDef d;
    d.id = "dim3_void";
    d.statement = "in dimension 3 the eigenvalue quadratic is identically zero";
    d.tolerance = 1e-10;
    d.mode = [](const CatalogEntry& e) { return gated_if(e.n == 3); };
    d.run = [](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      double worst = 0;
      for (const auto& p : pts) {
        CurvaturePack pk = curvature_pack(e.chart, p);
        std::vector<double> lam;
        std::vector<std::vector<double>> vecs;
        generalized_sym_eig(pk.ric, pk.metric, lam, vecs);
        const double scale = pk.scalar * pk.scalar + pk.ric_norm2;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            const double v = eigen_quadratic_value(3, lam[i], lam[j], pk.scalar, pk.ric_norm2);
            worst = std::max(worst, gated_residual(std::abs(v), scale, rep.tolerance));
          }
      }
      rep.n_points = static_cast<int>(pts.size());
      rep.max_residual = worst;
      rep.pass = worst <= rep.tolerance;
    };
    add(std::move(d));
  }

  {
    CheckDef d;
    d.id = "div_weyl_codazzi";
    d.statement = "div W equals the (n-3)/(n-2) antisymmetrized Schouten derivative";
    d.tolerance = 1e-6;
    d.mode = [](const CatalogEntry& e) { return gated_if(e.n >= 4); };
    d.run = [](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      double worst = 0;
      for (const auto& p : pts) {
        Tensor lhs = divergence_weyl(e.chart, p);
        Tensor rhs = divergence_weyl_codazzi(e.chart, p);
        double scale = 0;
        const double diff = pair_diff_scale(lhs, rhs, &scale);
        worst = std::max(worst, gated_residual(diff, scale, rep.tolerance));
      }
      rep.n_points = static_cast<int>(pts.size());
      rep.max_residual = worst;
      rep.pass = worst <= rep.tolerance;
    };
    add(std::move(d));
  }

  {
    CheckDef d;
    d.id = "lcf_example_ricci";
    d.statement = "conformally flat example: pipeline Ricci matches the flat-derivative formula";
    d.tolerance = 1e-8;
    d.mode = [](const CatalogEntry& e) { return gated_if(e.name == "lcf_example"); };
    d.run = [](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      const int n = e.n;
      double worst = 0;
      for (const auto& p : pts) {
        CurvaturePack pk = curvature_pack(e.chart, p);
        // closed form with flat derivatives of A = 1 + sum_{a<n} x_a^2
        double A = 1;
        for (int a = 0; a + 1 < n; ++a) A += p[a] * p[a];
        std::vector<double> dA(n, 0.0);
        for (int a = 0; a + 1 < n; ++a) dA[a] = 2 * p[a];
        double dA2 = 0;
        for (int a = 0; a < n; ++a) dA2 += dA[a] * dA[a];
        const double lapA = 2.0 * (n - 1);
        // log A derivatives
        const double laplog = lapA / A - dA2 / (A * A);
        const double dlog2 = dA2 / (A * A);
        Tensor rhs(n, {Dn, Dn});
        // conformal Ricci of delta/A^2 in flat derivatives:
        //   (n-2)(Hess log A + dlogA dlogA) + (Lap log A - (n-2)|dlogA|^2) delta
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double hessA = (i == j && i + 1 < n) ? 2.0 : 0.0;
            const double hesslog = hessA / A - dA[i] * dA[j] / (A * A);
            const double dlogi = dA[i] / A, dlogj = dA[j] / A;
            double v = (n - 2) * (hesslog + dlogi * dlogj);
            if (i == j) v += laplog - (n - 2) * dlog2;
            rhs(i, j) = v;
          }
        double scale = 0;
        const double diff = pair_diff_scale(pk.ric, rhs, &scale);
        worst = std::max(worst, gated_residual(diff, scale, rep.tolerance));
      }
      rep.n_points = static_cast<int>(pts.size());
      rep.max_residual = worst;
      rep.pass = worst <= rep.tolerance;
    };
    add(std::move(d));
  }

  {
    CheckDef d;
    d.id = "lcf_example_sigma1";
    d.statement = "conformally flat example: g^{nn} Ric_nn equals -2(n-1)(A-2)";
    d.tolerance = 1e-8;
    d.mode = [](const CatalogEntry& e) { return gated_if(e.name == "lcf_example"); };
    d.run = [](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      const int n = e.n;
      double worst = 0;
      for (const auto& p : pts) {
        CurvaturePack pk = curvature_pack(e.chart, p);
        double A = 1;
        for (int a = 0; a + 1 < n; ++a) A += p[a] * p[a];
        const double sigma1 = pk.inverse_metric(n - 1, n - 1) * pk.ric(n - 1, n - 1);
        const double expected = -2.0 * (n - 1) * (A - 2);
        worst = std::max(worst, gated_residual(std::abs(sigma1 - expected),
                                               std::max(std::abs(sigma1), std::abs(expected)),
                                               rep.tolerance));
      }
      rep.n_points = static_cast<int>(pts.size());
      rep.max_residual = worst;
      rep.pass = worst <= rep.tolerance;
    };
    add(std::move(d));
  }

  {
    CheckDef d;
    d.id = "warped_ricci";
    d.statement = "two-block warped-product Ricci formula matches the pipeline";
    d.tolerance = 1e-8;
    d.mode = [](const CatalogEntry& e) { return gated_if(e.warped.has_value()); };
    d.run = [](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      double worst = 0;
      for (const auto& p : pts) {
        CurvaturePack pk = curvature_pack(e.chart, p);
        Jet h = e.warped->h_jet(p[0], 2);
        Tensor rhs = warped_ricci(e.n, e.warped->K, h, p);
        double scale = 0;
        const double diff = pair_diff_scale(pk.ric, rhs, &scale);
        worst = std::max(worst, gated_residual(diff, scale, rep.tolerance));
      }
      rep.n_points = static_cast<int>(pts.size());
      rep.max_residual = worst;
      rep.pass = worst <= rep.tolerance;
    };
    add(std::move(d));
  }

  {
    CheckDef d;
    d.id = "grad_soliton_divergence";
    d.statement = "gradient solitons satisfy dR = 2 Ric(grad f, .)";
    d.tolerance = 1e-6;
    d.mode = [](const CatalogEntry& e) {
      return gated_if(e.soliton.has_value() && e.soliton->gradient);
    };
    d.run = [](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      auto data = make_soliton_data(e);
      double worst = 0;
      for (const auto& p : pts)
        worst = std::max(worst, gradient_identity_residuals(*data, p).div_res);
      rep.n_points = static_cast<int>(pts.size());
      rep.max_residual = worst;
      rep.pass = worst <= rep.tolerance;
    };
    add(std::move(d));
  }

  {
    CheckDef d;
    d.id = "radial_weyl_zero";
    d.statement =
        "on conformally flat gradient solitons, Riem(u,v,u,grad f) = Ric(v,grad f)/(n-1)";
    d.tolerance = 1e-6;
    d.mode = [](const CatalogEntry& e) {
      return gated_if(e.soliton.has_value() && e.soliton->gradient && e.facts.weyl_zero);
    };
    d.run = [](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      auto data = make_soliton_data(e);
      double worst = 0;
      int used = 0;
      for (const auto& p : pts) {
        auto r = gradient_identity_residuals(*data, p);
        if (!r.radial_applicable) continue;
        ++used;
        worst = std::max(worst, r.radial_res);
      }
      rep.n_points = used;
      rep.max_residual = worst;
      rep.pass = worst <= rep.tolerance;
      if (used == 0) {
        rep.status = "inconclusive";
        rep.pass = true;
      }
    };
    add(std::move(d));
  }

  pointwise("rpq_ApB_traces", "Ricci traces of A and B reduce to closed forms in Ric, R, |Ric|^2",
            1e-9, check_rpq_traces, n_at_least(3));

  {
    CheckDef d;
    d.id = "known_facts";
    d.statement = "catalog ground truth (scalar curvature, eigenvalues, flags) re-verified";
    d.tolerance = 1e-8;
    d.mode = [](const CatalogEntry& e) { return gated_if(e.n >= 3); };
    d.run = [](const CatalogEntry& e, Points pts, const FlowContext*, CheckReport& rep) {
      double worst = 0;
      const double tol = rep.tolerance;
      for (const auto& p : pts) {
        CurvaturePack pk = curvature_pack(e.chart, p);
        const auto& f = e.facts;
        if (f.scalar_curvature)
          worst = std::max(worst, gated_residual(std::abs(pk.scalar - *f.scalar_curvature),
                                                 std::abs(*f.scalar_curvature), tol));
        if (f.einstein_factor) {
          Tensor diff = pk.ric;
          Tensor eg = pk.metric;
          eg *= *f.einstein_factor;
          diff -= eg;
          worst = std::max(
              worst, gated_residual(max_abs(diff),
                                    std::max(max_abs(pk.ric), max_abs(eg)), tol));
        }
        if (f.flat) worst = std::max(worst, gated_residual(max_abs(pk.riem), 1.0, tol));
        if (f.weyl_zero)
          worst = std::max(worst, gated_residual(max_abs(pk.weyl), max_abs(pk.riem), tol));
        if (f.ricci_eigenvalues) {
          std::vector<double> lam;
          std::vector<std::vector<double>> vecs;
          generalized_sym_eig(pk.ric, pk.metric, lam, vecs);
          double scale = 0, diff = 0;
          for (size_t i = 0; i < lam.size(); ++i) {
            diff = std::max(diff, std::abs(lam[i] - (*f.ricci_eigenvalues)[i]));
            scale = std::max(scale, std::abs((*f.ricci_eigenvalues)[i]));
          }
          worst = std::max(worst, gated_residual(diff, scale, tol));
        }
        if (f.sectional) {
          const int n = e.n;
          for (int a = 0; a < std::min(3, n - 1); ++a) {
            const int b = a + 1;
            const double num = pk.riem(a, b, a, b);
            const double den =
                pk.metric(a, a) * pk.metric(b, b) - pk.metric(a, b) * pk.metric(a, b);
            worst = std::max(
                worst, gated_residual(std::abs(num / den - *f.sectional),
                                      std::max(std::abs(*f.sectional), 1.0), tol));
          }
        }
      }
      rep.n_points = static_cast<int>(pts.size());
      rep.max_residual = worst;
      rep.pass = worst <= tol;
    };
    add(std::move(d));
  }

  return defs;
}

}  // namespace

const std::vector<CheckDef>& check_registry() {
  static const std::vector<CheckDef> defs = build_registry();
  return defs;
}

double check_tolerance_for(const CheckDef& def, const CatalogEntry& entry) {
  if (auto it = entry.check_tolerance.find(def.id); it != entry.check_tolerance.end())
    return it->second;
  return def.tolerance;
}

double eigen_quadratic_residual(const CurvaturePack& pack, int i, int j) {
  std::vector<double> lam;
  std::vector<std::vector<double>> vecs;
  generalized_sym_eig(pack.ric, pack.metric, lam, vecs);
  const int n = pack.metric.dim();
  if (i < 0 || j < 0 || i >= n || j >= n) throw IdentityError("eigen index out of range");
  return eigen_quadratic_value(n, lam[i], lam[j], pack.scalar, pack.ric_norm2);
}

CheckReport run_check(const std::string& id, const CatalogEntry& entry,
                      std::span<const std::vector<double>> points, const FlowContext* flow) {
  const CheckDef* def = nullptr;
  for (const auto& d : check_registry())
    if (d.id == id) def = &d;
  if (!def) throw IdentityError("unknown check '" + id + "'");

  CheckReport rep;
  rep.check_id = def->id;
  rep.statement = def->statement;
  rep.metric = entry.label;
  rep.tolerance = check_tolerance_for(*def, entry);

  const CheckDef::Mode mode = def->mode(entry);
  if (mode == CheckDef::Mode::Skip) {
    rep.status = "skipped";
    rep.pass = true;
    return rep;
  }
  if (def->needs_flow && !flow) {
    rep.status = "error:missing flow context";
    rep.pass = false;
    return rep;
  }
  if (points.empty()) {
    rep.status = "inconclusive";
    rep.pass = true;
    return rep;
  }
  try {
    def->run(entry, points, flow, rep);
  } catch (const std::exception& err) {
    rep.status = std::string("error:") + err.what();
    rep.pass = false;
    return rep;
  }
  if (mode == CheckDef::Mode::Descriptive) {
    rep.status = "descriptive";
    rep.pass = true;
  }
  return rep;
}

namespace {

int thread_budget() {
  if (const char* env = std::getenv("WEYLFLOW_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(std::min(hw, 8u)) : 1;
}

}  // namespace

std::vector<CheckReport> run_suite(std::span<const CatalogEntry> entries, std::uint64_t seed,
                                   int point_count) {
  if (entries.empty()) return {};
  struct Task {
    const CatalogEntry* entry;
    const CheckDef* def;
    const FlowContext* flow;
    const std::vector<std::vector<double>>* points;
  };
  std::vector<std::vector<std::vector<double>>> points_per_entry;
  std::vector<std::unique_ptr<FlowContext>> flows;
  points_per_entry.reserve(entries.size());
  for (const auto& e : entries) {
    points_per_entry.push_back(point_count > 0 ? sample_points(e, point_count, seed)
                                               : std::vector<std::vector<double>>{});
    std::unique_ptr<FlowContext> fc;
    if (e.n >= 3 &&
        (e.name == "sphere" || e.name == "product_spheres" || e.name == "cylinder_RxS")) {
      FlowContext ctx;
      std::vector<double> s0;
      if (e.name == "sphere") {
        ctx.family = FlowFamily::round_sphere(e.n);
        const double r = e.params.at("r");
        s0 = {r * r};
      } else if (e.name == "product_spheres") {
        ctx.family = FlowFamily::product_spheres(static_cast<int>(e.params.at("p")),
                                                 static_cast<int>(e.params.at("q")));
        const double a = e.params.at("a"), b = e.params.at("b");
        s0 = {a * a, b * b};
      } else {
        ctx.family = FlowFamily::cylinder(e.n);
        s0 = {1.0, 1.0 / e.params.at("K")};
      }
      // evaluate well inside the maximal interval of fast-collapsing states
      auto f0 = ctx.family.rhs(s0);
      double T = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < s0.size(); ++c)
        if (f0[c] < 0) T = std::min(T, s0[c] / (-f0[c]));
      ctx.t = std::isfinite(T) ? std::min(0.05, 0.4 * T) : 0.05;
      // near the singular time the step follows the remaining interval
      ctx.h = std::isfinite(T) ? std::min(1e-3, 0.01 * (T - ctx.t)) : 1e-3;
      const double dt = 1e-3;
      const int steps = static_cast<int>(std::ceil((ctx.t + 2 * ctx.h) / dt)) + 2;
      ctx.traj = integrate_flow(ctx.family, s0, dt, steps);
      fc = std::make_unique<FlowContext>(std::move(ctx));
    }
    flows.push_back(std::move(fc));
  }
  std::vector<Task> tasks;
  for (size_t ei = 0; ei < entries.size(); ++ei)
    for (const auto& d : check_registry())
      tasks.push_back({&entries[ei], &d, flows[ei].get(), &points_per_entry[ei]});

  std::vector<CheckReport> reports(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      reports[i] = run_check(t.def->id, *t.entry, *t.points, t.flow);
    }
  };
  const int nthreads = std::min<int>(thread_budget(), static_cast<int>(tasks.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::sort(reports.begin(), reports.end(), [](const CheckReport& a, const CheckReport& b) {
    if (a.check_id != b.check_id) return a.check_id < b.check_id;
    return a.metric < b.metric;
  });
  return reports;
}

}  // namespace weylflow
