#include "weylflow/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace weylflow {

Tensor::Tensor(int dim, std::vector<Variance> valence) : dim_(dim), valence_(std::move(valence)) {
  assert(dim >= 1);
  size_t count = 1;
  for (size_t i = 0; i < valence_.size(); ++i) count *= static_cast<size_t>(dim);
  data_.assign(count, 0.0);
}

Tensor& Tensor::operator+=(const Tensor& rhs) {
  if (dim_ != rhs.dim_ || valence_ != rhs.valence_) throw TensorError("shape mismatch in +");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& rhs) {
  if (dim_ != rhs.dim_ || valence_ != rhs.valence_) throw TensorError("shape mismatch in -");
  for (size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

double max_abs(const Tensor& t) {
  double m = 0;
  for (double x : t.data()) m = std::max(m, std::abs(x));
  return m;
}

double rel_residual(const Tensor& x, const Tensor& y) {
  Tensor d = x;
  d -= y;
  double scale = std::max(max_abs(x), max_abs(y));
  return max_abs(d) / std::max(scale, kResidualFloor);
}

double gated_residual(double diff, double scale, double tol, double floor) {
  return diff / (scale + floor / tol);
}

Tensor contract(const Tensor& t, int slot_a, int slot_b) {
  const int r = t.rank();
  if (slot_a < 0 || slot_b < 0 || slot_a >= r || slot_b >= r || slot_a == slot_b)
    throw TensorError("contract: slot out of range");
  if (t.variance(slot_a) == t.variance(slot_b))
    throw TensorError("contract: slots must pair one up with one down index");
  const int n = t.dim();
  std::vector<Variance> out_val;
  for (int s = 0; s < r; ++s)
    if (s != slot_a && s != slot_b) out_val.push_back(t.variance(s));
  Tensor out(n, out_val);
  std::vector<int> full(r, 0);
  for_each_index(n, r - 2, [&](std::span<const int> oi) {
    int k = 0;
    for (int s = 0; s < r; ++s)
      if (s != slot_a && s != slot_b) full[s] = oi[k++];
    double sum = 0;
    for (int c = 0; c < n; ++c) {
      full[slot_a] = c;
      full[slot_b] = c;
      sum += t.at(full);
    }
    out.at(oi) = sum;
  });
  return out;
}

Tensor raise_lower(const Tensor& t, int slot, const Tensor& metric, const Tensor& inverse_metric) {
  const int r = t.rank();
  if (slot < 0 || slot >= r) throw TensorError("raise_lower: slot out of range");
  if (metric.rank() != 2 || inverse_metric.rank() != 2)
    throw TensorError("raise_lower: metric must have rank 2");
  if (condition_estimate(metric, inverse_metric) > 1e12)
    throw SingularMetricError("metric condition estimate above 1e12");
  const int n = t.dim();
  const bool raising = t.variance(slot) == Variance::Dn;
  const Tensor& m = raising ? inverse_metric : metric;
  std::vector<Variance> out_val = t.valence();
  out_val[slot] = raising ? Variance::Up : Variance::Dn;
  Tensor out(n, out_val);
  std::vector<int> src(r, 0);
  for_each_index(n, r, [&](std::span<const int> oi) {
    for (int s = 0; s < r; ++s) src[s] = oi[s];
    double sum = 0;
    for (int c = 0; c < n; ++c) {
      src[slot] = c;
      sum += m(oi[slot], c) * t.at(src);
    }
    out.at(oi) = sum;
  });
  return out;
}

Tensor transpose(const Tensor& t, std::span<const int> perm) {
  const int r = t.rank();
  if (static_cast<int>(perm.size()) != r) throw TensorError("transpose: bad permutation length");
  std::vector<bool> seen(r, false);
  for (int p : perm) {
    if (p < 0 || p >= r || seen[p]) throw TensorError("transpose: invalid permutation");
    seen[p] = true;
  }
  std::vector<Variance> out_val(r);
  for (int s = 0; s < r; ++s) out_val[s] = t.variance(perm[s]);
  Tensor out(t.dim(), out_val);
  std::vector<int> src(r, 0);
  for_each_index(t.dim(), r, [&](std::span<const int> oi) {
    for (int s = 0; s < r; ++s) src[s] = oi[perm[s]];
    out.at(oi) = t.at(src);
  });
  return out;
}

double symmetry_residual(const Tensor& t, std::span<const int> perm, int sign) {
  Tensor p = transpose(t, perm);
  p *= static_cast<double>(sign);
  Tensor d = t;
  // transpose may permute valence; symmetry residuals only compare raw
  // component grids, so require matching signatures
  if (p.valence() != t.valence()) throw TensorError("symmetry_residual: permutation mixes variances");
  d -= p;
  double scale = max_abs(t);
  if (scale == 0.0) return 0.0;
  return max_abs(d) / std::max(scale, kResidualFloor);
}

Tensor matrix_inverse_spd(const Tensor& g) {
  if (g.rank() != 2) throw TensorError("matrix_inverse_spd: rank must be 2");
  const int n = g.dim();
  std::vector<std::vector<double>> a(n, std::vector<double>(2 * n, 0.0));
  double scale = std::max(max_abs(g), kResidualFloor);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i][j] = g(i, j);
    a[i][n + i] = 1.0;
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-14 * scale)
      throw SingularMetricError("singular metric");
    std::swap(a[piv], a[col]);
    const double inv = 1.0 / a[col][col];
    for (int j = 0; j < 2 * n; ++j) a[col][j] *= inv;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (int j = 0; j < 2 * n; ++j) a[r][j] -= f * a[col][j];
    }
  }
  Tensor out(n, {Variance::Up, Variance::Up});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = a[i][n + j];
  return out;
}

double condition_estimate(const Tensor& g, const Tensor& ginv) {
  const int n = g.dim();
  double ng = 0, ni = 0;  // infinity norms
  for (int i = 0; i < n; ++i) {
    double rg = 0, ri = 0;
    for (int j = 0; j < n; ++j) {
      rg += std::abs(g(i, j));
      ri += std::abs(ginv(i, j));
    }
    ng = std::max(ng, rg);
    ni = std::max(ni, ri);
  }
  return ng * ni;
}

namespace {

// Cyclic Jacobi eigensolver for small dense symmetric matrices.
void jacobi_eig(std::vector<std::vector<double>>& a, std::vector<std::vector<double>>& v) {
  const int n = static_cast<int>(a.size());
  v.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) return;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
}

}  // namespace

void generalized_sym_eig(const Tensor& a, const Tensor& g, std::vector<double>& eigenvalues,
                         std::vector<std::vector<double>>& eigenvectors) {
  const int n = g.dim();
  // Cholesky g = L L^T
  std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = g(i, j);
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0) throw SingularMetricError("metric not positive definite");
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  // B = L^{-1} A L^{-T}
  std::vector<std::vector<double>> B(n, std::vector<double>(n, 0.0));
  // first solve L X = A  (column-wise), then B = X L^{-T} i.e. solve L B^T = X^T
  std::vector<std::vector<double>> X(n, std::vector<double>(n, 0.0));
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < n; ++i) {
      double s = a(i, col);
      for (int k = 0; k < i; ++k) s -= L[i][k] * X[k][col];
      X[i][col] = s / L[i][i];
    }
  }
  for (int row = 0; row < n; ++row) {
    for (int j = 0; j < n; ++j) {
      double s = X[row][j];
      for (int k = 0; k < j; ++k) s -= L[j][k] * B[row][k];
      B[row][j] = s / L[j][j];
    }
  }
  std::vector<std::vector<double>> V;
  jacobi_eig(B, V);
  // eigenvalues on the diagonal of B; back-substitute v = L^{-T} y
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::vector<double> lam(n);
  for (int i = 0; i < n; ++i) lam[i] = B[i][i];
  std::sort(order.begin(), order.end(), [&](int x, int y) { return lam[x] < lam[y]; });
  eigenvalues.resize(n);
  eigenvectors.assign(n, std::vector<double>(n, 0.0));
  for (int e = 0; e < n; ++e) {
    eigenvalues[e] = lam[order[e]];
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = V[i][order[e]];
    // solve L^T v = y
    std::vector<double>& v = eigenvectors[e];
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < n; ++k) s -= L[k][i] * v[k];
      v[i] = s / L[i][i];
    }
  }
}

}  // namespace weylflow
