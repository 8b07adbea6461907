#include "weylflow/geometry.hpp"

#include <cmath>

namespace weylflow {

JetField::JetField(int n, int rank, int order) : n(n), rank(rank) {
  size_t count = 1;
  for (int r = 0; r < rank; ++r) count *= static_cast<size_t>(n);
  c.assign(count, Jet(n, order));
}

Tensor JetField::values(std::vector<Variance> valence) const {
  Tensor out(n, std::move(valence));
  for (size_t i = 0; i < c.size(); ++i) out.data()[i] = c[i].value();
  return out;
}

namespace {

// Inverse of a jet-valued symmetric matrix by Gauss-Jordan elimination with
// partial pivoting on the value part.
std::vector<Jet> invert_jet_matrix(const std::vector<Jet>& m, int n) {
  const int order = m[0].order();
  const int nv = m[0].nvars();
  std::vector<Jet> a = m;
  std::vector<Jet> inv(static_cast<size_t>(n) * n, Jet(nv, order));
  double scale = 0;
  for (const auto& j : m) scale = std::max(scale, std::abs(j.value()));
  for (int i = 0; i < n; ++i) inv[static_cast<size_t>(i) * n + i] = Jet::constant(nv, order, 1.0);
  auto A = [&](int i, int j) -> Jet& { return a[static_cast<size_t>(i) * n + j]; };
  auto I = [&](int i, int j) -> Jet& { return inv[static_cast<size_t>(i) * n + j]; };
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A(r, col).value()) > std::abs(A(piv, col).value())) piv = r;
    if (std::abs(A(piv, col).value()) < 1e-14 * std::max(scale, 1e-30))
      throw SingularMetricError("singular metric at evaluation point");
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(A(piv, j), A(col, j));
        std::swap(I(piv, j), I(col, j));
      }
    }
    Jet rec = A(col, col).reciprocal();
    for (int j = 0; j < n; ++j) {
      A(col, j) = A(col, j) * rec;
      I(col, j) = I(col, j) * rec;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Jet f = A(r, col);
      if (f.value() == 0.0) {
        bool zero = true;
        for (int k = 0; k < f.size() && zero; ++k) zero = (f.coeff(k) == 0.0);
        if (zero) continue;
      }
      for (int j = 0; j < n; ++j) {
        A(r, j) -= f * A(col, j);
        I(r, j) -= f * I(col, j);
      }
    }
  }
  return inv;
}

}  // namespace

JetCurvature::JetCurvature(const MetricChart& chart, std::span<const double> p, int order,
                           bool with_weyl) {
  n = chart.n;
  g_order = order;
  point.assign(p.begin(), p.end());
  if (n < 2) throw GeometryError("curvature needs dimension >= 2");
  if (order < 2 || order > kMaxJetOrder) throw GeometryError("metric jet order must be 2..4");
  if (with_weyl && n < 3)
    throw GeometryError("Weyl decomposition undefined in dimension " + std::to_string(n));

  g = chart.metric_jets(p, order);
  ginv = invert_jet_matrix(g, n);

  const size_t n2 = static_cast<size_t>(n) * n;
  auto gi = [&](int i, int j) -> const Jet& { return g[static_cast<size_t>(i) * n + j]; };
  auto gu = [&](int i, int j) -> const Jet& { return ginv[static_cast<size_t>(i) * n + j]; };

  // dg[l][i][j] = d_l g_ij
  std::vector<Jet> dg(n2 * n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet d = gi(i, j).derivative(l);
        dg[(static_cast<size_t>(l) * n + i) * n + j] = d;
        if (i != j) dg[(static_cast<size_t>(l) * n + j) * n + i] = std::move(d);
      }
  auto dg_at = [&](int l, int i, int j) -> const Jet& {
    return dg[(static_cast<size_t>(l) * n + i) * n + j];
  };

  gamma.assign(n2 * n, Jet(n, order - 1));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s(n, order - 1);
        for (int l = 0; l < n; ++l)
          s += gu(k, l).truncated(order - 1) * (dg_at(i, j, l) + dg_at(j, i, l) - dg_at(l, i, j));
        s *= 0.5;
        gamma[(static_cast<size_t>(k) * n + i) * n + j] = s;
        if (i != j) gamma[(static_cast<size_t>(k) * n + j) * n + i] = std::move(s);
      }

  // dgamma[d][k][i][j]
  std::vector<Jet> dgam(n2 * n2);
  for (int d = 0; d < n; ++d)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          Jet dd = gamma_at(k, i, j).derivative(d);
          dgam[((static_cast<size_t>(d) * n + k) * n + i) * n + j] = dd;
          if (i != j) dgam[((static_cast<size_t>(d) * n + k) * n + j) * n + i] = std::move(dd);
        }
  auto dgam_at = [&](int d, int k, int i, int j) -> const Jet& {
    return dgam[((static_cast<size_t>(d) * n + k) * n + i) * n + j];
  };

  // R^m_ijk, then lower the first slot
  std::vector<Jet> rup(n2 * n2, Jet(n, order - 2));
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          if (j <= i) continue;  // antisymmetric in (i,j); fill below
          Jet s = dgam_at(j, m, i, k) - dgam_at(i, m, j, k);
          for (int q = 0; q < n; ++q)
            s += gamma_at(m, j, q) * gamma_at(q, i, k) - gamma_at(m, i, q) * gamma_at(q, j, k);
          rup[((static_cast<size_t>(m) * n + i) * n + j) * n + k] = s;
          rup[((static_cast<size_t>(m) * n + j) * n + i) * n + k] = -s;
        }
  auto rup_at = [&](int m, int i, int j, int k) -> const Jet& {
    return rup[((static_cast<size_t>(m) * n + i) * n + j) * n + k];
  };

  riem.assign(n2 * n2, Jet(n, order - 2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet s(n, order - 2);
          for (int m = 0; m < n; ++m) s += gi(l, m).truncated(order - 2) * rup_at(m, i, j, k);
          riem[((static_cast<size_t>(i) * n + j) * n + k) * n + l] = std::move(s);
        }
  auto riem_at = [&](int i, int j, int k, int l) -> const Jet& {
    return riem[((static_cast<size_t>(i) * n + j) * n + k) * n + l];
  };

  ric.assign(n2, Jet(n, order - 2));
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) {
      Jet s(n, order - 2);
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) s += gu(j, l).truncated(order - 2) * riem_at(i, j, k, l);
      ric[static_cast<size_t>(i) * n + k] = s;
      if (i != k) ric[static_cast<size_t>(k) * n + i] = std::move(s);
    }
  auto ric_at = [&](int i, int k) -> const Jet& { return ric[static_cast<size_t>(i) * n + k]; };

  scalar = Jet(n, order - 2);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) scalar += gu(i, k).truncated(order - 2) * ric_at(i, k);

  ric_up.assign(n2, Jet(n, order - 2));
  for (int p_ = 0; p_ < n; ++p_)
    for (int q = 0; q < n; ++q) {
      Jet s(n, order - 2);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          s += gu(p_, i).truncated(order - 2) * gu(q, j).truncated(order - 2) * ric_at(i, j);
      ric_up[static_cast<size_t>(p_) * n + q] = std::move(s);
    }

  ric2 = Jet(n, order - 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ric2 += ric_up[static_cast<size_t>(i) * n + j] * ric_at(i, j);

  schouten.assign(n2, Jet(n, order - 2));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      schouten[static_cast<size_t>(i) * n + k] =
          ric_at(i, k) - scalar * gi(i, k).truncated(order - 2) * (1.0 / (2.0 * (n - 1)));

  if (!with_weyl || n < 3) return;

  const double ca = 1.0 / ((n - 1.0) * (n - 2.0));
  const double cb = -1.0 / (n - 2.0);
  a_t.assign(n2 * n2, Jet(n, order - 2));
  b_t.assign(n2 * n2, Jet(n, order - 2));
  weyl.assign(n2 * n2, Jet(n, order - 2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const size_t idx = ((static_cast<size_t>(i) * n + j) * n + k) * n + l;
          Jet gik = gi(i, k).truncated(order - 2), gjl = gi(j, l).truncated(order - 2);
          Jet gil = gi(i, l).truncated(order - 2), gjk = gi(j, k).truncated(order - 2);
          a_t[idx] = scalar * (gik * gjl - gil * gjk) * ca;
          b_t[idx] =
              (ric_at(i, k) * gjl - ric_at(i, l) * gjk + ric_at(j, l) * gik - ric_at(j, k) * gil) *
              cb;
          weyl[idx] = riem[idx] + a_t[idx] + b_t[idx];
        }
}

JetField JetCurvature::riemann_field() const {
  JetField f(n, 4, g_order - 2);
  f.c = riem;
  return f;
}

JetField JetCurvature::weyl_field() const {
  JetField f(n, 4, g_order - 2);
  f.c = weyl;
  return f;
}

JetField JetCurvature::ricci_field() const {
  JetField f(n, 2, g_order - 2);
  f.c = ric;
  return f;
}

JetField JetCurvature::schouten_field() const {
  JetField f(n, 2, g_order - 2);
  f.c = schouten;
  return f;
}

JetField JetCurvature::scalar_field() const {
  JetField f(n, 0, g_order - 2);
  f.c[0] = scalar;
  return f;
}

JetField JetCurvature::metric_field() const {
  JetField f(n, 2, g_order);
  f.c = g;
  return f;
}

JetField covariant_derivative(const JetField& t, const JetCurvature& jc) {
  const int n = t.n;
  const int order = t.c[0].order();
  if (order < 1) throw GeometryError("insufficient jet order for a covariant derivative");
  JetField out(n, t.rank + 1, order - 1);
  std::vector<int> idx(t.rank, 0);
  std::vector<int> src(t.rank, 0);
  for_each_index(n, t.rank, [&](std::span<const int> ti) {
    for (int s = 0; s < t.rank; ++s) idx[s] = ti[s];
    const Jet& tj = t.at(ti);
    for (int a = 0; a < n; ++a) {
      Jet s = tj.derivative(a);
      for (int m = 0; m < t.rank; ++m) {
        for (int q = 0; q < n; ++q) {
          for (int z = 0; z < t.rank; ++z) src[z] = idx[z];
          src[m] = q;
          s -= jc.gamma_at(q, a, idx[m]).truncated(order - 1) * t.at(src).truncated(order - 1);
        }
      }
      std::vector<int> oi(t.rank + 1);
      oi[0] = a;
      for (int z = 0; z < t.rank; ++z) oi[z + 1] = idx[z];
      out.at(oi) = std::move(s);
    }
  });
  return out;
}

Tensor rough_laplacian(const JetField& t, const JetCurvature& jc) {
  JetField d2 = covariant_derivative(covariant_derivative(t, jc), jc);
  const int n = t.n;
  Tensor out(n, std::vector<Variance>(t.rank, Variance::Dn));
  std::vector<int> di(t.rank + 2, 0);
  for_each_index(n, t.rank, [&](std::span<const int> ti) {
    double sum = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        di[0] = a;
        di[1] = b;
        for (int z = 0; z < t.rank; ++z) di[z + 2] = ti[z];
        sum += jc.ginv_val(a, b) * d2.at(di).value();
      }
    if (t.rank == 0)
      out.data()[0] = sum;
    else
      out.at(ti) = sum;
  });
  return out;
}

Tensor christoffel(const MetricChart& chart, std::span<const double> p) {
  JetCurvature jc(chart, p, 2, false);
  Tensor out(chart.n, {Variance::Up, Variance::Dn, Variance::Dn});
  const int n = chart.n;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(k, i, j) = jc.gamma_at(k, i, j).value();
  return out;
}

Tensor riemann(const MetricChart& chart, std::span<const double> p) {
  JetCurvature jc(chart, p, 2, false);
  return jc.riemann_field().values({Variance::Dn, Variance::Dn, Variance::Dn, Variance::Dn});
}

Tensor quad_product(const Tensor& x, const Tensor& y, const Tensor& ginv) {
  const int n = x.dim();
  // U_{q i j s} = g^{pq} g^{rs} X_{p i j r}
  Tensor u(n, {Variance::Up, Variance::Dn, Variance::Dn, Variance::Up});
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int s = 0; s < n; ++s) {
          double sum = 0;
          for (int p = 0; p < n; ++p)
            for (int r = 0; r < n; ++r) sum += ginv(p, q) * ginv(r, s) * x(p, i, j, r);
          u(q, i, j, s) = sum;
        }
  Tensor out(n, {Variance::Dn, Variance::Dn, Variance::Dn, Variance::Dn});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double sum = 0;
          for (int q = 0; q < n; ++q)
            for (int s = 0; s < n; ++s) sum += u(q, i, j, s) * y(s, l, k, q);
          out(i, j, k, l) = sum;
        }
  return out;
}

CurvaturePack curvature_pack(const MetricChart& chart, std::span<const double> p) {
  JetCurvature jc(chart, p, 2, true);
  const int n = chart.n;
  CurvaturePack pack;
  pack.point.assign(p.begin(), p.end());
  pack.metric = Tensor(n, {Variance::Dn, Variance::Dn});
  pack.inverse_metric = Tensor(n, {Variance::Up, Variance::Up});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      pack.metric(i, j) = jc.g_at(i, j).value();
      pack.inverse_metric(i, j) = jc.ginv_val(i, j);
    }
  pack.gamma = Tensor(n, {Variance::Up, Variance::Dn, Variance::Dn});
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) pack.gamma(k, i, j) = jc.gamma_at(k, i, j).value();
  const std::vector<Variance> v4 = {Variance::Dn, Variance::Dn, Variance::Dn, Variance::Dn};
  pack.riem = jc.riemann_field().values(v4);
  pack.ric = jc.ricci_field().values({Variance::Dn, Variance::Dn});
  pack.scalar = jc.scalar.value();
  pack.ric_norm2 = jc.ric2.value();
  pack.weyl = jc.weyl_field().values(v4);
  JetField af(n, 4, 0), bf(n, 4, 0);
  af.c = jc.a_t;
  bf.c = jc.b_t;
  pack.a_tensor = af.values(v4);
  pack.b_tensor = bf.values(v4);
  pack.schouten = jc.schouten_field().values({Variance::Dn, Variance::Dn});
  pack.c_tensor = quad_product(pack.riem, pack.riem, pack.inverse_metric);
  pack.d_tensor = quad_product(pack.weyl, pack.weyl, pack.inverse_metric);
  for (const Tensor* t : {&pack.riem, &pack.ric, &pack.weyl, &pack.c_tensor, &pack.d_tensor})
    for (double x : t->data())
      if (!std::isfinite(x)) throw GeometryError("non-finite curvature entry");
  if (!std::isfinite(pack.scalar) || !std::isfinite(pack.ric_norm2))
    throw GeometryError("non-finite curvature entry");
  return pack;
}

namespace {

int field_base_order(GeomField f) { return f == GeomField::Metric ? 0 : 2; }

JetField select_field(const JetCurvature& jc, GeomField f) {
  switch (f) {
    case GeomField::Metric: return jc.metric_field();
    case GeomField::Ricci: return jc.ricci_field();
    case GeomField::ScalarCurvature: return jc.scalar_field();
    case GeomField::Riemann: return jc.riemann_field();
    case GeomField::Weyl: return jc.weyl_field();
    case GeomField::Schouten: return jc.schouten_field();
  }
  throw GeometryError("unknown field");
}

std::vector<Variance> dn(int rank) { return std::vector<Variance>(rank, Variance::Dn); }

}  // namespace

Tensor covariant_derivative(const MetricChart& chart, std::span<const double> p, GeomField f) {
  const int need = field_base_order(f) + 1;
  JetCurvature jc(chart, p, std::max(2, need), f == GeomField::Weyl);
  JetField t = select_field(jc, f);
  JetField d = covariant_derivative(t, jc);
  return d.values(dn(d.rank));
}

Tensor rough_laplacian(const MetricChart& chart, std::span<const double> p, GeomField f) {
  const int need = field_base_order(f) + 2;
  JetCurvature jc(chart, p, std::max(2, need), f == GeomField::Weyl);
  return rough_laplacian(select_field(jc, f), jc);
}

Tensor divergence_weyl(const MetricChart& chart, std::span<const double> p) {
  if (chart.n < 4) throw GeometryError("divergence of Weyl needs dimension >= 4");
  JetCurvature jc(chart, p, 3, true);
  JetField dw = covariant_derivative(jc.weyl_field(), jc);
  const int n = chart.n;
  Tensor out(n, {Variance::Dn, Variance::Dn, Variance::Dn});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double sum = 0;
        std::vector<int> idx = {0, i, j, k, 0};
        for (int l = 0; l < n; ++l)
          for (int m = 0; m < n; ++m) {
            idx[0] = m;
            idx[4] = l;
            sum += jc.ginv_val(l, m) * dw.at(idx).value();
          }
        out(i, j, k) = sum;
      }
  return out;
}

Tensor divergence_weyl_codazzi(const MetricChart& chart, std::span<const double> p) {
  if (chart.n < 4) throw GeometryError("divergence of Weyl needs dimension >= 4");
  JetCurvature jc(chart, p, 3, true);
  JetField ds = covariant_derivative(jc.schouten_field(), jc);
  const int n = chart.n;
  const double c = (n - 3.0) / (n - 2.0);
  Tensor out(n, {Variance::Dn, Variance::Dn, Variance::Dn});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        std::vector<int> ji = {j, i, k}, ij = {i, j, k};
        out(i, j, k) = c * (ds.at(ji).value() - ds.at(ij).value());
      }
  return out;
}

Tensor gradient_scalar(const MetricChart& chart, std::span<const double> p, const Expr& f) {
  Jet fj = eval_jet(f, p, 1, chart.bindings);
  Tensor out(chart.n, {Variance::Dn});
  for (int i = 0; i < chart.n; ++i) out(i) = fj.deriv1(i);
  return out;
}

Tensor hessian_scalar(const MetricChart& chart, std::span<const double> p, const Expr& f) {
  JetCurvature jc(chart, p, 2, false);
  Jet fj = eval_jet(f, p, 2, chart.bindings);
  JetField fld(chart.n, 0, 2);
  fld.c[0] = fj;
  JetField d2 = covariant_derivative(covariant_derivative(fld, jc), jc);
  return d2.values({Variance::Dn, Variance::Dn});
}

double laplacian_scalar(const MetricChart& chart, std::span<const double> p, const Expr& f) {
  JetCurvature jc(chart, p, 2, false);
  Jet fj = eval_jet(f, p, 2, chart.bindings);
  JetField fld(chart.n, 0, 2);
  fld.c[0] = fj;
  return rough_laplacian(fld, jc).data()[0];
}

Tensor sym_covariant_oneform(const MetricChart& chart, std::span<const double> p,
                             std::span<const Expr> omega) {
  JetCurvature jc(chart, p, 2, false);
  const int n = chart.n;
  JetField w(n, 1, 1);
  for (int i = 0; i < n; ++i) w.c[i] = eval_jet(omega[i], p, 1, chart.bindings);
  JetField dw = covariant_derivative(w, jc);
  Tensor out(n, {Variance::Dn, Variance::Dn});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<int> ij = {i, j}, ji = {j, i};
      out(i, j) = 0.5 * (dw.at(ij).value() + dw.at(ji).value());
    }
  return out;
}

double tensor_norm2(const Tensor& t, const Tensor& ginv) {
  const int n = t.dim();
  const int r = t.rank();
  double total = 0;
  std::vector<int> b(r, 0);
  for_each_index(n, r, [&](std::span<const int> ai) {
    // raise every slot of the second copy
    double sum = 0;
    for_each_index(n, r, [&](std::span<const int> bi) {
      double w = t.at(bi);
      if (w == 0.0) return;
      double m = 1;
      for (int s = 0; s < r; ++s) m *= ginv(ai[s], bi[s]);
      sum += m * w;
    });
    total += sum * t.at(ai);
  });
  return total;
}

}  // namespace weylflow
